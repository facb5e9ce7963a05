// In-memory stand-in for the audit service with the same claim/conflict
// semantics, exposed through the FetchLike interface the client consumes.

import { FetchLike } from "../src/client.js";
import { ConsoleTaskView, LabelRecord, Stage, STAGE_VOCABULARY } from "../src/types.js";

interface StoredTask {
  task_id: string;
  stage: Stage;
  stratum: string;
  payload: ConsoleTaskView["payload"];
  weight: number;
}

export class FakeAuditServer {
  tasks: StoredTask[] = [];
  claimed = new Set<string>();
  labeled = new Map<string, LabelRecord>();
  ledger: LabelRecord[] = [];

  addTask(task: Omit<StoredTask, "weight">, weight = 1.0): void {
    this.tasks.push({ ...task, weight });
  }

  private response(status: number, body: unknown) {
    return Promise.resolve({ status, json: () => Promise.resolve(body) });
  }

  fetchLike: FetchLike = (url, init) => {
    const body = init?.body ? JSON.parse(init.body) : {};
    if (url.endsWith("/api/v1/fetch-next-task")) {
      const next = this.tasks.find(
        (t) =>
          t.stage === body.stage &&
          !this.labeled.has(t.task_id) &&
          !this.claimed.has(t.task_id),
      );
      if (!next) return this.response(200, { done: true });
      this.claimed.add(next.task_id);
      return this.response(200, {
        done: false,
        task_id: next.task_id,
        stage: next.stage,
        stratum: next.stratum,
        payload: next.payload,
        options: [...STAGE_VOCABULARY[next.stage]],
      });
    }
    if (url.endsWith("/api/v1/submit-label")) {
      const task = this.tasks.find((t) => t.task_id === body.task_id);
      if (!task) return this.response(404, { detail: "unknown task id" });
      if (this.labeled.has(body.task_id)) {
        return this.response(409, { detail: "task already labeled" });
      }
      if (!STAGE_VOCABULARY[task.stage].includes(body.label)) {
        return this.response(400, { detail: "label outside stage vocabulary" });
      }
      const row: LabelRecord = {
        task_id: body.task_id,
        stage: task.stage,
        label: body.label,
        reviewer: body.reviewer ?? "",
      };
      this.labeled.set(body.task_id, row);
      this.ledger.push(row);
      this.claimed.delete(body.task_id);
      return this.response(200, { ok: true, task_id: row.task_id, label: row.label });
    }
    if (url.endsWith("/api/v1/progress")) {
      const out: Record<string, Record<string, { done: number; total: number; remaining_weight: number }>> = {};
      for (const t of this.tasks) {
        const stage = (out[t.stage] ??= {});
        const cell = (stage[t.stratum] ??= { done: 0, total: 0, remaining_weight: 0 });
        cell.total += 1;
        if (this.labeled.has(t.task_id)) cell.done += 1;
        else cell.remaining_weight += t.weight;
      }
      return this.response(200, out);
    }
    return this.response(404, { detail: "unknown endpoint" });
  };
}

export function fixtureTasks(): Omit<StoredTask, "weight">[] {
  return [
    {
      task_id: "rel-0",
      stage: "relevance",
      stratum: "crossref",
      payload: {
        title: "Decision trees for triage",
        abstract: "We train a decision tree on admission records.",
        venue: "J. Synthetic Res.",
      },
    },
    {
      task_id: "sec-0",
      stage: "sector",
      stratum: "openalex",
      payload: {
        title: "Churn prediction",
        abstract: "Telecom churn modeling with trees.",
        venue: "Conf.",
        keywords: ["churn", "telecom"],
      },
    },
    {
      task_id: "pred-0",
      stage: "predictor",
      stratum: "crossref",
      payload: {
        title: "Readmission risk",
        abstract: "The model uses age as an input feature.",
        predictors: [{ name: "age", evidence: "The model uses age as an input feature." }],
      },
    },
    {
      task_id: "rdc-0",
      stage: "rdc",
      stratum: "crossref",
      payload: { predictor: "heart rate" },
    },
    {
      task_id: "pair-0",
      stage: "pair-status",
      stratum: "openalex",
      payload: {
        predictor: "heart rate",
        rdc: "Health_Clinical",
        fragments: [
          {
            regulation: "HIPAA",
            article_ref: "§ 164.502",
            text: "Protected health information may not be disclosed.",
          },
        ],
      },
    },
  ];
}
