// Thin fetch client for the audit service; every response is schema-checked.

import {
  ConsoleTaskView,
  LabelRecord,
  ProgressSummary,
  Stage,
  fetchResponseSchema,
  progressSchema,
  submitAckSchema,
} from "./types.js";

export type FetchLike = (
  url: string,
  init?: { method?: string; headers?: Record<string, string>; body?: string },
) => Promise<{ status: number; json(): Promise<unknown> }>;

export class ConflictError extends Error {
  constructor(public taskId: string) {
    super(`task ${taskId} already labeled`);
  }
}

export class AuditApiClient {
  // submittedLedger mirrors exactly what the server accepted, in order, so
  // the console-side ledger can be hash-compared with the server's.
  readonly submittedLedger: LabelRecord[] = [];

  constructor(
    private baseUrl: string,
    private reviewer: string,
    private fetchFn: FetchLike = fetch as unknown as FetchLike,
  ) {}

  private async post(path: string, body: unknown): Promise<{ status: number; data: unknown }> {
    const resp = await this.fetchFn(`${this.baseUrl}${path}`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    });
    return { status: resp.status, data: await resp.json() };
  }

  async fetchNextTask(stage: Stage): Promise<ConsoleTaskView | null> {
    const { status, data } = await this.post("/api/v1/fetch-next-task", {
      stage,
      reviewer: this.reviewer,
    });
    if (status !== 200) {
      throw new Error(`fetch-next-task failed with status ${status}`);
    }
    const parsed = fetchResponseSchema.parse(data);
    return parsed.done ? null : parsed;
  }

  /**
   * Submit one label. A 409 conflict means the task was already labeled;
   * it is surfaced as ConflictError and never appended to the local
   * ledger, so a duplicate submission cannot double-write on either side.
   */
  async submitLabel(task: ConsoleTaskView, label: string, note = ""): Promise<void> {
    if (!task.options.includes(label)) {
      throw new Error(`label ${JSON.stringify(label)} not among task options`);
    }
    const { status, data } = await this.post("/api/v1/submit-label", {
      task_id: task.task_id,
      label,
      reviewer: this.reviewer,
      note,
    });
    if (status === 409) {
      throw new ConflictError(task.task_id);
    }
    if (status !== 200) {
      throw new Error(`submit-label failed with status ${status}`);
    }
    const ack = submitAckSchema.parse(data);
    this.submittedLedger.push({
      task_id: ack.task_id,
      stage: task.stage,
      label: ack.label,
      reviewer: this.reviewer,
    });
  }

  async progress(): Promise<ProgressSummary> {
    const resp = await this.fetchFn(`${this.baseUrl}/api/v1/progress`);
    if (resp.status !== 200) {
      throw new Error(`progress failed with status ${resp.status}`);
    }
    return progressSchema.parse(await resp.json());
  }
}
