import { describe, expect, it } from "vitest";

import { AuditApiClient, ConflictError } from "../src/client.js";
import { AuditConsole } from "../src/console.js";
import { ledgerHash } from "../src/ledger.js";
import { STAGE_VOCABULARY } from "../src/types.js";
import { FakeAuditServer, fixtureTasks } from "./fakeServer.js";

function setup() {
  const server = new FakeAuditServer();
  for (const task of fixtureTasks()) server.addTask(task);
  const client = new AuditApiClient("http://test", "r1", server.fetchLike);
  return { server, client };
}

describe("label options", () => {
  it("served options equal the stage vocabulary for every stage", async () => {
    const { client } = setup();
    for (const stage of ["relevance", "sector", "predictor", "rdc", "pair-status"] as const) {
      const task = await client.fetchNextTask(stage);
      expect(task!.options).toEqual([...STAGE_VOCABULARY[stage]]);
    }
  });

  it("rdc tasks offer exactly the 13 category tokens", async () => {
    const { client } = setup();
    const task = await client.fetchNextTask("rdc");
    expect(task!.options).toHaveLength(13);
    expect(task!.options).toContain("Identifier_PII");
    expect(task!.options).toContain("Other");
  });

  it("console refuses a task whose options diverge from the vocabulary", async () => {
    const server = new FakeAuditServer();
    server.addTask(fixtureTasks()[0]);
    const drifted: typeof server.fetchLike = async (url, init) => {
      const resp = await server.fetchLike(url, init);
      const body = (await resp.json()) as Record<string, unknown>;
      if (Array.isArray(body.options)) body.options = ["Yes", "No"];
      return { status: resp.status, json: () => Promise.resolve(body) };
    };
    const console_ = new AuditConsole(
      new AuditApiClient("http://test", "r1", drifted),
      "relevance",
    );
    await expect(console_.next()).rejects.toThrow(/diverge/);
  });
});

describe("submit idempotency", () => {
  it("duplicate submission conflicts and never double-writes", async () => {
    const { server, client } = setup();
    const task = await client.fetchNextTask("relevance");
    await client.submitLabel(task!, "Relevant");
    await expect(client.submitLabel(task!, "Not relevant")).rejects.toThrow(ConflictError);
    expect(server.ledger).toHaveLength(1);
    expect(server.ledger[0].label).toBe("Relevant");
    expect(client.submittedLedger).toHaveLength(1);
  });

  it("console advances past a conflicted task without rewriting it", async () => {
    const server = new FakeAuditServer();
    for (const task of fixtureTasks()) server.addTask(task);
    const clientA = new AuditApiClient("http://test", "a", server.fetchLike);
    const consoleA = new AuditConsole(clientA, "relevance");
    await consoleA.next();
    // Another session labels the same task first.
    server.labeled.set("rel-0", { task_id: "rel-0", stage: "relevance", label: "Relevant", reviewer: "b" });
    server.ledger.push(server.labeled.get("rel-0")!);
    const state = await consoleA.submitIndex(1);
    expect(state.lastError).toMatch(/already labeled/);
    expect(server.ledger).toHaveLength(1);
    expect(server.ledger[0].reviewer).toBe("b");
  });

  it("out-of-vocabulary labels are impossible through the client", async () => {
    const { client } = setup();
    const task = await client.fetchNextTask("relevance");
    await expect(client.submitLabel(task!, "Maybe")).rejects.toThrow(/not among/);
  });
});

describe("round trip", () => {
  it("console-submitted ledger hashes equal to the server ledger", async () => {
    const server = new FakeAuditServer();
    for (const task of fixtureTasks()) server.addTask(task);
    const client = new AuditApiClient("http://test", "r1", server.fetchLike);
    const picks: Record<string, number> = {
      relevance: 0, sector: 1, predictor: 0, rdc: 5, "pair-status": 1,
    };
    for (const stage of ["relevance", "sector", "predictor", "rdc", "pair-status"] as const) {
      const console_ = new AuditConsole(client, stage);
      await console_.next();
      await console_.submitIndex(picks[stage]);
    }
    expect(client.submittedLedger).toHaveLength(5);
    expect(ledgerHash(client.submittedLedger)).toBe(ledgerHash(server.ledger));
  });

  it("hash differs when any label differs", async () => {
    const rows = [
      { task_id: "t", stage: "relevance" as const, label: "Relevant", reviewer: "r" },
    ];
    const altered = [{ ...rows[0], label: "Not relevant" }];
    expect(ledgerHash(rows)).not.toBe(ledgerHash(altered));
  });
});

describe("progress view", () => {
  it("zero labels shows zero done and full remaining weight", async () => {
    const server = new FakeAuditServer();
    for (const task of fixtureTasks()) server.addTask(task, 19.4);
    const client = new AuditApiClient("http://test", "r1", server.fetchLike);
    const progress = await client.progress();
    expect(progress.relevance.crossref).toEqual({
      done: 0,
      total: 1,
      remaining_weight: 19.4,
    });
  });

  it("fractions match a hand count after labeling", async () => {
    const server = new FakeAuditServer();
    for (const task of fixtureTasks()) server.addTask(task);
    const client = new AuditApiClient("http://test", "r1", server.fetchLike);
    const console_ = new AuditConsole(client, "relevance");
    await console_.next();
    await console_.submitIndex(0);
    const progress = await client.progress();
    expect(progress.relevance.crossref.done).toBe(1);
    expect(progress.relevance.crossref.remaining_weight).toBe(0);
  });
});
