// Stable hashing of label ledgers, used to verify that the labels the
// console submitted are exactly the labels the metrics side consumed.

import { LabelRecord } from "./types.js";

/** FNV-1a over a canonical serialization (sorted keys, one row per line). */
export function ledgerHash(rows: readonly LabelRecord[]): string {
  const canonical = rows
    .map((r) =>
      JSON.stringify({
        label: r.label,
        reviewer: r.reviewer,
        stage: r.stage,
        task_id: r.task_id,
      }),
    )
    .join("\n");
  let hash = 0x811c9dc5;
  for (let i = 0; i < canonical.length; i++) {
    hash ^= canonical.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return hash.toString(16).padStart(8, "0");
}
