// Controller: one task at a time per stage, submit-and-advance, progress.

import { AuditApiClient, ConflictError } from "./client.js";
import { keyToOptionIndex } from "./keyboard.js";
import { renderDone, renderProgress, renderTask } from "./render.js";
import { ConsoleTaskView, Stage, STAGE_VOCABULARY } from "./types.js";

export interface ConsoleState {
  current: ConsoleTaskView | null;
  html: string;
  finished: boolean;
  lastError: string | null;
}

export class AuditConsole {
  state: ConsoleState = { current: null, html: "", finished: false, lastError: null };

  constructor(
    private client: AuditApiClient,
    private stage: Stage,
  ) {}

  async next(): Promise<ConsoleState> {
    const task = await this.client.fetchNextTask(this.stage);
    if (task === null) {
      this.state = { current: null, html: renderDone(), finished: true, lastError: null };
      return this.state;
    }
    // Options served by the API must equal the stage vocabulary exactly;
    // anything else means the console and service have drifted apart.
    const expected = STAGE_VOCABULARY[task.stage];
    if (task.options.length !== expected.length ||
        task.options.some((o, i) => o !== expected[i])) {
      throw new Error(`options for stage ${task.stage} diverge from the vocabulary`);
    }
    this.state = { current: task, html: renderTask(task), finished: false, lastError: null };
    return this.state;
  }

  /** Submit by option index (what the 1..k keyboard shortcuts produce). */
  async submitIndex(index: number): Promise<ConsoleState> {
    const task = this.state.current;
    if (task === null) throw new Error("no task on screen");
    const label = task.options[index];
    if (label === undefined) throw new Error(`no option at index ${index}`);
    try {
      await this.client.submitLabel(task, label);
    } catch (err) {
      if (err instanceof ConflictError) {
        // Already labeled elsewhere: show the conflict, advance, never rewrite.
        const message = `task ${task.task_id} was already labeled`;
        const state = await this.next();
        state.lastError = message;
        return state;
      }
      throw err;
    }
    return this.next();
  }

  async handleKey(key: string): Promise<ConsoleState> {
    const task = this.state.current;
    if (task === null) return this.state;
    const index = keyToOptionIndex(key, task.options.length);
    if (index === null) return this.state;
    return this.submitIndex(index);
  }

  async progressHtml(): Promise<string> {
    return renderProgress(await this.client.progress());
  }
}
