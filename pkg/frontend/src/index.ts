export { AuditApiClient, ConflictError } from "./client.js";
export { AuditConsole } from "./console.js";
export { keyToOptionIndex } from "./keyboard.js";
export { ledgerHash } from "./ledger.js";
export { orderWithinStrata, seededShuffle } from "./order.js";
export { escapeHtml, renderDone, renderProgress, renderTask } from "./render.js";
export * from "./types.js";
