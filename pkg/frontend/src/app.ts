import { ApiClient } from "./api.js";
import type { DimensionGraph, Report, ReportEntry } from "./types.js";
import {
  renderChallengeDiff,
  renderError,
  renderEssayForm,
  renderGraphPanel,
  renderReportView,
  renderStatus,
} from "./views.js";

/**
 * Single-session controller. One tab drives one session: submit the essay,
 * read the per-dimension report, inspect graphs, file challenges. Draft text
 * survives failures; a retry affordance re-runs the failed step.
 */
export class App {
  private sessionId: string | null = null;
  private report: Report | null = null;
  private graphs = new Map<string, DimensionGraph>();

  constructor(
    private root: HTMLElement,
    private api: ApiClient,
    private pollIntervalMs = 750
  ) {}

  start(): void {
    this.root.replaceChildren(renderEssayForm((essay) => void this.submitEssay(essay)));
  }

  private setStatus(message: string): void {
    this.statusArea().replaceChildren(renderStatus(message));
  }

  private statusArea(): HTMLElement {
    let area = this.root.querySelector<HTMLElement>(".status-area");
    if (!area) {
      area = document.createElement("div");
      area.className = "status-area";
      this.root.prepend(area);
    }
    return area;
  }

  private showError(message: string, retry: () => void): void {
    this.statusArea().replaceChildren(renderError(message, retry));
  }

  async submitEssay(essay: string): Promise<void> {
    if (!essay.trim()) {
      this.showError("The essay is empty.", () => void this.submitEssay(this.draftEssay()));
      return;
    }
    try {
      this.setStatus("Submitting essay…");
      if (this.sessionId === null) {
        const created = await this.api.createSession(essay);
        this.sessionId = created.session_id;
      }
      this.setStatus("Reviewers are discussing your essay…");
      const job = await this.api.evaluate(this.sessionId);
      await this.api.pollJob(job.job_id, this.pollIntervalMs);
      this.report = await this.api.getReport(this.sessionId);
      this.renderReport();
    } catch (err) {
      // the draft stays in the DOM; retry re-runs from where we got to
      this.showError(describe(err), () => void this.submitEssay(this.draftEssay()));
    }
  }

  private draftEssay(): string {
    return this.root.querySelector<HTMLTextAreaElement>(".essay-input")?.value ?? "";
  }

  private renderReport(extra?: HTMLElement): void {
    if (!this.report) return;
    const view = renderReportView(this.report, {
      onOpenGraph: (dimension) => void this.openGraph(dimension),
      onChallenge: (dimension, text) => void this.submitChallenge(dimension, text),
    });
    const children: HTMLElement[] = [view];
    if (extra) children.push(extra);
    this.root.replaceChildren(...children);
  }

  async openGraph(dimension: string): Promise<void> {
    if (!this.sessionId) return;
    try {
      const graph = await this.api.getGraph(this.sessionId, dimension);
      this.graphs.set(dimension, graph);
      this.mountPanel(renderGraphPanel(graph));
    } catch (err) {
      this.showError(describe(err), () => void this.openGraph(dimension));
    }
  }

  async submitChallenge(dimension: string, text: string): Promise<void> {
    if (!this.sessionId || !this.report) return;
    if (!text.trim()) {
      this.showError("Write your challenge first.", () => undefined);
      return;
    }
    const before = this.entry(this.report, dimension);
    const priorGraph = this.graphs.get(dimension);
    const priorIds = new Set(priorGraph?.nodes.map((n) => n.id) ?? []);
    try {
      this.setStatus("The reviewers are weighing your challenge…");
      const job = await this.api.challenge(this.sessionId, dimension, text);
      await this.api.pollJob(job.job_id, this.pollIntervalMs);
      this.report = await this.api.getReport(this.sessionId);
      const after = this.entry(this.report, dimension);
      const graph = await this.api.getGraph(this.sessionId, dimension);
      this.graphs.set(dimension, graph);
      const newIds = new Set(graph.nodes.map((n) => n.id).filter((id) => !priorIds.has(id)));
      const panel = document.createElement("div");
      panel.className = "challenge-result";
      panel.append(renderChallengeDiff(before, after), renderGraphPanel(graph, newIds));
      this.renderReport(panel);
    } catch (err) {
      // draft challenge text is re-rendered so nothing is lost
      const retry = () => void this.submitChallenge(dimension, text);
      this.renderReport();
      const input = this.root.querySelector<HTMLTextAreaElement>(
        `[data-testid="challenge-input-${dimension}"]`
      );
      if (input) input.value = text;
      this.showError(describe(err), retry);
    }
  }

  private entry(report: Report, dimension: string): ReportEntry {
    const found = report.entries.find((e) => e.dimension === dimension);
    if (!found) throw new Error(`no report entry for dimension ${dimension}`);
    return found;
  }

  private mountPanel(panel: HTMLElement): void {
    this.root.querySelectorAll(".graph-panel, .challenge-result").forEach((n) => n.remove());
    this.root.appendChild(panel);
  }
}

function describe(err: unknown): string {
  if (err instanceof Error) return err.message;
  return String(err);
}
