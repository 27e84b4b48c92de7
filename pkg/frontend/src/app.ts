/** DOM rendering for the review console. All state changes flow through the
 * controller; this file only paints and forwards events. */
import { ReviewApi } from "./api.js";
import { computeOverlayRects } from "./overlay.js";
import { AppState, ReviewController, formEnabled } from "./state.js";
import type { Scores } from "./types.js";

const SCORE_DIMENSIONS: Array<keyof Scores> = ["correctness", "completeness", "clarity"];

export function mountApp(root: HTMLElement, api: ReviewApi, raterId: string): ReviewController {
  const controller = new ReviewController(api, raterId);
  controller.onChange((state) => render(root, api, controller, state));
  void controller.loadQueue();
  bindShortcuts(controller);
  return controller;
}

function bindShortcuts(controller: ReviewController): void {
  document.addEventListener("keydown", (event) => {
    if (event.target instanceof HTMLInputElement || event.target instanceof HTMLSelectElement) {
      return;
    }
    if (event.key === "a") controller.setDecision("accept");
    else if (event.key === "r") controller.setDecision("reject");
    else if (event.key === "s") void controller.submitVerdict();
    else if (event.key === "q") void controller.loadQueue();
  });
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  className?: string,
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

function render(root: HTMLElement, api: ReviewApi, controller: ReviewController, state: AppState): void {
  root.replaceChildren();
  root.appendChild(renderHeader(controller, state));
  if (state.offline) {
    root.appendChild(el("div", "banner offline", "review service unreachable; retry when back online"));
  }
  if (state.notice) {
    root.appendChild(el("div", "banner notice", state.notice));
  }
  if (state.screen === "queue") root.appendChild(renderQueue(controller, state));
  else if (state.screen === "item") root.appendChild(renderItem(api, controller, state));
  else root.appendChild(renderStats(state));
}

function renderHeader(controller: ReviewController, state: AppState): HTMLElement {
  const header = el("header");
  header.appendChild(el("h1", undefined, "review console"));
  header.appendChild(el("span", "rater", `rater: ${state.raterId}`));
  const queueButton = el("button", undefined, "queue");
  queueButton.onclick = () => void controller.loadQueue();
  const statsButton = el("button", undefined, "dashboard");
  statsButton.onclick = () => void controller.loadStats();
  header.append(queueButton, statsButton);
  return header;
}

function renderQueue(controller: ReviewController, state: AppState): HTMLElement {
  const section = el("section", "queue");
  section.appendChild(el("h2", undefined, `queue (${state.queue.length})`));
  const list = el("ul");
  for (const entry of state.queue) {
    const row = el("li");
    const open = el("button", "open-item", entry.item_id);
    open.onclick = () => void controller.openItem(entry.item_id);
    row.append(
      open,
      el("span", "category", entry.category),
      el("span", `state state-${entry.state}`, entry.state),
      el("span", "question", entry.question),
    );
    list.appendChild(row);
  }
  section.appendChild(list);
  return section;
}

function renderItem(api: ReviewApi, controller: ReviewController, state: AppState): HTMLElement {
  const item = state.item!;
  const section = el("section", "item");
  section.appendChild(el("h2", undefined, `${item.item_id} — ${item.category} (rev ${item.revision})`));
  section.appendChild(el("span", `state state-${item.state}`, item.state));

  if (item.figure) {
    section.appendChild(renderFigure(api, controller, state));
  }

  const record = el("div", "record");
  appendField(record, "context", item.record.context);
  appendField(record, "question", item.record.question);
  appendField(record, "answer", item.record.answer);
  if (item.record.options) {
    item.record.options.forEach((option, index) => {
      const letter = String.fromCharCode(65 + index);
      const flag = letter === item.record.correct_option ? " (correct)" : "";
      appendField(record, `option ${letter}${flag}`, option);
    });
  }
  section.appendChild(record);

  if (state.stalePrompt) {
    const prompt = el("div", "banner stale");
    prompt.appendChild(el("span", undefined,
      "someone updated this item; reload to review the current revision"));
    const reload = el("button", "reload-item", "reload item");
    reload.onclick = () => void controller.reloadStaleItem();
    prompt.appendChild(reload);
    section.appendChild(prompt);
  } else {
    section.appendChild(renderVerdictForm(controller, state));
  }
  return section;
}

function renderFigure(api: ReviewApi, controller: ReviewController, state: AppState): HTMLElement {
  const figure = state.item!.figure!;
  const wrap = el("div", "figure-wrap");
  const img = el("img");
  img.src = api.figureUrl(figure.image_url);
  img.width = figure.width;
  img.height = figure.height;
  wrap.appendChild(img);
  const rects = computeOverlayRects(figure.panels, figure.width, figure.height,
    figure.width, figure.height);
  for (const rect of rects) {
    const overlay = el("div", "panel-overlay");
    if (state.focusPanel && state.focusPanel !== rect.panelId) {
      overlay.classList.add("dimmed");
    }
    overlay.style.left = `${rect.left}px`;
    overlay.style.top = `${rect.top}px`;
    overlay.style.width = `${rect.width}px`;
    overlay.style.height = `${rect.height}px`;
    overlay.appendChild(el("span", "panel-label", rect.label));
    overlay.onclick = () => controller.toggleFocusPanel(rect.panelId);
    wrap.appendChild(overlay);
  }
  return wrap;
}

function renderVerdictForm(controller: ReviewController, state: AppState): HTMLElement {
  const form = el("div", "verdict-form");
  const enabled = formEnabled(state);
  const accept = el("button", "accept", "accept (a)");
  const reject = el("button", "reject", "reject (r)");
  accept.disabled = reject.disabled = !enabled;
  accept.onclick = () => controller.setDecision("accept");
  reject.onclick = () => controller.setDecision("reject");
  if (state.form.decision === "accept") accept.classList.add("chosen");
  if (state.form.decision === "reject") reject.classList.add("chosen");
  form.append(accept, reject);

  for (const dimension of SCORE_DIMENSIONS) {
    const label = el("label", undefined, dimension);
    const select = el("select");
    select.disabled = !enabled;
    select.append(new Option("—", ""));
    for (const score of [1, 3, 5]) {
      select.append(new Option(String(score), String(score)));
    }
    const current = state.form[dimension];
    select.value = current === null ? "" : String(current);
    select.onchange = () => {
      if (select.value !== "") controller.setScore(dimension, Number(select.value));
    };
    label.appendChild(select);
    form.appendChild(label);
  }

  const submit = el("button", "submit", "submit (s)");
  submit.disabled = !enabled;
  submit.onclick = () => void controller.submitVerdict();
  form.appendChild(submit);
  return form;
}

function renderStats(state: AppState): HTMLElement {
  const section = el("section", "stats");
  section.appendChild(el("h2", undefined, "dashboard"));
  const stats = state.stats;
  if (!stats) {
    section.appendChild(el("p", undefined, "no stats loaded"));
    return section;
  }
  const states = el("ul", "per-state");
  for (const [name, count] of Object.entries(stats.per_state)) {
    states.appendChild(el("li", undefined, `${name}: ${count}`));
  }
  section.appendChild(states);
  section.appendChild(el("p", "agreement",
    stats.agreement_pct === null
      ? "agreement: n/a (no dual-reviewed items yet)"
      : `agreement: ${stats.agreement_pct.toFixed(1)}%`));

  const report = stats.ratings_report;
  if (report) {
    const table = el("table", "icc-table");
    const head = el("tr");
    for (const column of ["stage", "correctness", "completeness", "clarity"]) {
      head.appendChild(el("th", undefined, column));
    }
    table.appendChild(head);
    for (const [stage, dims] of Object.entries(report.per_stage_means)) {
      const row = el("tr");
      row.appendChild(el("td", undefined, `stage ${stage}`));
      for (const dimension of SCORE_DIMENSIONS) {
        row.appendChild(el("td", undefined, dims[dimension]?.rendered ?? "—"));
      }
      table.appendChild(row);
    }
    section.appendChild(table);
    section.appendChild(el("p", undefined,
      `ICC overall ${report.icc_overall.toFixed(3)} · correctness ${report.icc_correctness.toFixed(3)} · ` +
      `completeness ${report.icc_completeness.toFixed(3)} · clarity ${report.icc_clarity.toFixed(3)}`));
    section.appendChild(el("p", undefined,
      `exact agreement ${report.exact_pct.toFixed(1)}% · within one ${report.within_one_pct.toFixed(1)}%`));
  }
  return section;
}

function appendField(parent: HTMLElement, name: string, value: string): void {
  const field = el("div", "field");
  field.appendChild(el("strong", undefined, name));
  field.appendChild(el("p", undefined, value));
  parent.appendChild(field);
}
