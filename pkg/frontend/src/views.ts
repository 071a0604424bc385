import { renderGraph } from "./graph.js";
import type { DimensionGraph, Report, ReportEntry } from "./types.js";

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) {
    node.setAttribute(key, value);
  }
  if (text !== undefined) node.textContent = text;
  return node;
}

export function renderEssayForm(onSubmit: (essay: string) => void): HTMLElement {
  const section = el("section", { class: "essay-view" });
  section.appendChild(el("h1", {}, "Submit your essay"));
  const textarea = el("textarea", {
    class: "essay-input",
    "data-testid": "essay-input",
    rows: "14",
    placeholder: "Paste your essay here",
  });
  const button = el("button", { class: "submit-essay", "data-testid": "submit-essay" }, "Get feedback");
  button.addEventListener("click", () => onSubmit(textarea.value));
  section.append(textarea, button);
  return section;
}

export function renderStatus(message: string): HTMLElement {
  return el("p", { class: "status-line", "data-testid": "status" }, message);
}

export function renderError(message: string, onRetry: () => void): HTMLElement {
  const banner = el("div", { class: "error-banner", "data-testid": "error-banner", role: "alert" });
  banner.appendChild(el("span", { class: "error-message" }, message));
  const retry = el("button", { class: "retry", "data-testid": "retry" }, "Retry");
  retry.addEventListener("click", onRetry);
  banner.appendChild(retry);
  return banner;
}

export interface ReportHandlers {
  onOpenGraph: (dimension: string) => void;
  onChallenge: (dimension: string, text: string) => void;
}

function gradeBadge(level: number, contested: boolean): HTMLElement {
  const badge = el(
    "span",
    { class: `grade-badge level-${level}`, "data-level": String(level) },
    `Level ${level}`
  );
  if (contested) badge.classList.add("contested");
  return badge;
}

export function renderDimensionCard(entry: ReportEntry, handlers: ReportHandlers): HTMLElement {
  const card = el("article", { class: "dimension-card", "data-dimension": entry.dimension });
  const header = el("header", {});
  header.appendChild(el("h2", {}, entry.dimension));
  header.appendChild(gradeBadge(entry.grade.level, entry.contested));
  card.appendChild(header);
  card.appendChild(el("p", { class: "feedback-text" }, entry.feedback_text));
  card.appendChild(
    el(
      "p",
      { class: "accepted-claims" },
      entry.accepted_argument_ids.length
        ? `Accepted claims: ${entry.accepted_argument_ids.join(", ")}`
        : "No claim survived formal review."
    )
  );

  const graphButton = el("button", { class: "open-graph", "data-testid": `open-graph-${entry.dimension}` }, "View argument graph");
  graphButton.addEventListener("click", () => handlers.onOpenGraph(entry.dimension));
  card.appendChild(graphButton);

  const composer = el("div", { class: "challenge-composer" });
  const textarea = el("textarea", {
    class: "challenge-input",
    "data-testid": `challenge-input-${entry.dimension}`,
    rows: "3",
    placeholder: "Disagree? Make your case.",
  });
  const submit = el(
    "button",
    { class: "submit-challenge", "data-testid": `submit-challenge-${entry.dimension}` },
    "Challenge this grade"
  );
  submit.addEventListener("click", () => handlers.onChallenge(entry.dimension, textarea.value));
  composer.append(textarea, submit);
  card.appendChild(composer);
  return card;
}

export function renderReportView(report: Report, handlers: ReportHandlers): HTMLElement {
  const section = el("section", { class: "report-view" });
  section.appendChild(el("h1", {}, "Feedback report"));
  const cards = el("div", { class: "dimension-cards" });
  for (const entry of report.entries) {
    cards.appendChild(renderDimensionCard(entry, handlers));
  }
  section.appendChild(cards);
  return section;
}

export function renderGraphPanel(
  graph: DimensionGraph,
  highlightNew: Set<string> = new Set()
): HTMLElement {
  const panel = el("section", { class: "graph-panel", "data-dimension": graph.dimension });
  panel.appendChild(el("h2", {}, `Argument graph: ${graph.dimension}`));
  panel.appendChild(
    el(
      "p",
      { class: "graph-legend" },
      "Accepted claims are highlighted; ringed claims are in the always-accepted core. Arrows are attacks."
    )
  );
  panel.appendChild(renderGraph(graph, highlightNew));
  return panel;
}

/** Before/after comparison shown when a challenge verdict lands. */
export function renderChallengeDiff(before: ReportEntry, after: ReportEntry): HTMLElement {
  const diff = el("section", { class: "challenge-diff", "data-testid": "challenge-diff" });
  diff.appendChild(el("h2", {}, `Challenge outcome: ${after.dimension}`));

  const grades = el("p", { class: "grade-diff" });
  grades.appendChild(el("span", { class: "before" }, `Before: `));
  grades.appendChild(gradeBadge(before.grade.level, before.contested));
  grades.appendChild(el("span", { class: "after" }, ` After: `));
  grades.appendChild(gradeBadge(after.grade.level, after.contested));
  grades.appendChild(
    el(
      "span",
      { class: "verdict", "data-testid": "challenge-verdict" },
      after.grade.level === before.grade.level
        ? " The grade stands."
        : " The grade changed."
    )
  );
  diff.appendChild(grades);

  const feedback = el("div", { class: "feedback-diff" });
  const beforeBlock = el("blockquote", { class: "feedback-before" }, before.feedback_text);
  const afterBlock = el("blockquote", { class: "feedback-after" }, after.feedback_text);
  feedback.append(el("h3", {}, "Feedback before"), beforeBlock, el("h3", {}, "Feedback after"), afterBlock);
  diff.appendChild(feedback);
  return diff;
}
