// Pure HTML-string renderers for the one-task-at-a-time view and progress.
// Keeping these pure makes the end-to-end blinding property a plain text
// scan over the rendered markup.

import { ConsoleTaskView, ProgressSummary } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

function evidenceSection(task: ConsoleTaskView): string {
  const p = task.payload;
  const rows: string[] = [];
  if (p.title !== undefined) rows.push(`<h2>${escapeHtml(p.title)}</h2>`);
  if (p.venue !== undefined) rows.push(`<p class="venue">${escapeHtml(p.venue)}</p>`);
  if (p.abstract !== undefined) {
    rows.push(`<p class="abstract">${escapeHtml(p.abstract)}</p>`);
  }
  if (p.keywords !== undefined) {
    rows.push(`<p class="keywords">${p.keywords.map(escapeHtml).join(", ")}</p>`);
  }
  if (p.predictor !== undefined) {
    rows.push(`<p class="predictor-name">${escapeHtml(p.predictor)}</p>`);
  }
  if (p.rdc !== undefined) rows.push(`<p class="rdc-tag">${escapeHtml(p.rdc)}</p>`);
  if (p.predictors !== undefined) {
    const items = p.predictors
      .map((m) => `<li>${escapeHtml(m.name)} &mdash; ${escapeHtml(m.evidence)}</li>`)
      .join("");
    rows.push(`<ul class="mentions">${items}</ul>`);
  }
  if (p.fragments !== undefined) {
    const items = p.fragments
      .map(
        (f) =>
          `<li><strong>${escapeHtml(f.regulation)} ${escapeHtml(f.article_ref)}</strong> ` +
          `${escapeHtml(f.text)}</li>`,
      )
      .join("");
    rows.push(`<ul class="fragments">${items}</ul>`);
  }
  return rows.join("\n");
}

/** Render one blinded task: evidence plus numbered label buttons (1..k). */
export function renderTask(task: ConsoleTaskView): string {
  const buttons = task.options
    .map(
      (option, i) =>
        `<button data-label="${escapeHtml(option)}" accesskey="${i + 1}">` +
        `<kbd>${i + 1}</kbd> ${escapeHtml(option)}</button>`,
    )
    .join("\n");
  return [
    `<section class="task" data-task-id="${escapeHtml(task.task_id)}" ` +
      `data-stage="${escapeHtml(task.stage)}">`,
    evidenceSection(task),
    `<div class="labels">`,
    buttons,
    `</div>`,
    `</section>`,
  ].join("\n");
}

export function renderDone(): string {
  return `<section class="task done"><p>Queue empty. All tasks labeled.</p></section>`;
}

/** Per-stage, per-stratum done/total plus remaining design-weight mass. */
export function renderProgress(summary: ProgressSummary): string {
  const rows: string[] = [];
  for (const stage of Object.keys(summary).sort()) {
    for (const stratum of Object.keys(summary[stage]).sort()) {
      const cell = summary[stage][stratum];
      const pct = cell.total === 0 ? 0 : Math.round((100 * cell.done) / cell.total);
      rows.push(
        `<tr><td>${escapeHtml(stage)}</td><td>${escapeHtml(stratum)}</td>` +
          `<td>${cell.done}/${cell.total} (${pct}%)</td>` +
          `<td>${cell.remaining_weight.toFixed(3)}</td></tr>`,
      );
    }
  }
  return [
    `<table class="progress">`,
    `<tr><th>stage</th><th>stratum</th><th>labeled</th><th>remaining weight</th></tr>`,
    ...rows,
    `</table>`,
  ].join("\n");
}
