import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient } from "../src/api.js";
import { App } from "../src/app.js";
import type { DimensionGraph, Report } from "../src/types.js";
import fixturesJson from "./fixtures/showcase.json";
import { makeReplayFetch, RecordedFixtures, waitFor } from "./helpers.js";

const fixtures = fixturesJson as unknown as RecordedFixtures;

function mount(): HTMLElement {
  document.body.innerHTML = '<div id="app"></div>';
  return document.getElementById("app") as HTMLElement;
}

async function driveToReport(root: HTMLElement, app: App): Promise<void> {
  app.start();
  const input = root.querySelector<HTMLTextAreaElement>('[data-testid="essay-input"]');
  expect(input).not.toBeNull();
  input!.value = fixtures.essay;
  root.querySelector<HTMLButtonElement>('[data-testid="submit-essay"]')!.click();
  await waitFor(() => root.querySelectorAll(".dimension-card").length === 4, 2000, "report cards");
}

describe("contract: replaying recorded service responses", () => {
  let root: HTMLElement;
  let app: App;

  beforeEach(() => {
    root = mount();
    const { fetchImpl } = makeReplayFetch(fixtures);
    app = new App(root, new ApiClient("", fetchImpl), 0);
  });

  it("renders four dimension cards with the server's grades", async () => {
    await driveToReport(root, app);
    const report = fixtures.report_initial as Report;
    const cards = [...root.querySelectorAll<HTMLElement>(".dimension-card")];
    expect(cards.map((c) => c.dataset.dimension)).toEqual([
      "issue",
      "evidence",
      "position",
      "conclusion",
    ]);
    for (const entry of report.entries) {
      const card = root.querySelector<HTMLElement>(
        `.dimension-card[data-dimension="${entry.dimension}"]`
      );
      expect(card).not.toBeNull();
      const badge = card!.querySelector<HTMLElement>(".grade-badge");
      expect(badge!.dataset.level).toBe(String(entry.grade.level));
      expect(card!.querySelector(".feedback-text")!.textContent).toBe(entry.feedback_text);
    }
  });

  it("marks graph nodes exactly as the server flagged them", async () => {
    await driveToReport(root, app);
    root.querySelector<HTMLButtonElement>('[data-testid="open-graph-issue"]')!.click();
    await waitFor(() => root.querySelector(".graph-panel") !== null, 2000, "graph panel");

    const recorded = fixtures.graph_issue_initial as DimensionGraph;
    const accepted = new Set(
      [...root.querySelectorAll<SVGGElement>('.argument-node[data-accepted="true"]')].map(
        (n) => n.dataset.nodeId
      )
    );
    expect(accepted).toEqual(new Set(["A", "C"]));
    for (const node of recorded.nodes) {
      const rendered = root.querySelector<SVGGElement>(
        `.argument-node[data-node-id="${node.id}"]`
      );
      expect(rendered, `node ${node.id}`).not.toBeNull();
      expect(rendered!.dataset.accepted).toBe(String(node.accepted));
      expect(rendered!.dataset.core).toBe(String(node.in_grounded));
      expect(rendered!.classList.contains(node.accepted ? "accepted" : "rejected")).toBe(true);
    }
    const edges = [...root.querySelectorAll<SVGLineElement>(".attack-edge")].map(
      (e) => `${e.dataset.from}->${e.dataset.to}`
    );
    expect(new Set(edges)).toEqual(
      new Set(recorded.edges.map((e) => `${e.from}->${e.to}`))
    );
  });

  it("after the challenge replay the student node carries the server flag", async () => {
    await driveToReport(root, app);
    root.querySelector<HTMLButtonElement>('[data-testid="open-graph-issue"]')!.click();
    await waitFor(() => root.querySelector(".graph-panel") !== null, 2000, "graph panel");

    const challengeInput = root.querySelector<HTMLTextAreaElement>(
      '[data-testid="challenge-input-issue"]'
    );
    challengeInput!.value = fixtures.challenge_text;
    root.querySelector<HTMLButtonElement>('[data-testid="submit-challenge-issue"]')!.click();
    await waitFor(
      () => root.querySelector('[data-testid="challenge-diff"]') !== null,
      2000,
      "challenge diff"
    );

    const revised = fixtures.graph_issue_revised as DimensionGraph;
    const studentRecorded = revised.nodes.filter((n) => n.author === "student");
    expect(studentRecorded).toHaveLength(1);
    const student = root.querySelector<SVGGElement>(
      `.argument-node[data-node-id="${studentRecorded[0].id}"]`
    );
    expect(student).not.toBeNull();
    expect(student!.dataset.author).toBe("student");
    expect(student!.dataset.accepted).toBe(String(studentRecorded[0].accepted));
    expect(student!.classList.contains("rejected")).toBe(!studentRecorded[0].accepted);
    // new claims from the challenge round are visually highlighted
    expect(student!.classList.contains("new-node")).toBe(true);

    // grade badge unchanged per the recorded revised report
    const verdict = root.querySelector('[data-testid="challenge-verdict"]');
    expect(verdict!.textContent).toContain("stands");
    const diffBadges = [
      ...root.querySelectorAll<HTMLElement>('[data-testid="challenge-diff"] .grade-badge'),
    ];
    expect(diffBadges.map((b) => b.dataset.level)).toEqual(["1", "1"]);
  });

  it("renders every marking from server data, never computing acceptance", async () => {
    // the rendered flags must match the recorded payload for every node of
    // every dimension, including rejected ones
    await driveToReport(root, app);
    for (const dimension of ["issue", "evidence", "position", "conclusion"]) {
      root
        .querySelector<HTMLButtonElement>(`[data-testid="open-graph-${dimension}"]`)!
        .click();
      await waitFor(
        () =>
          root.querySelector(`.graph-panel[data-dimension="${dimension}"]`) !== null,
        2000,
        `${dimension} graph`
      );
      const recorded = fixtures[`graph_${dimension}_initial`] as DimensionGraph;
      for (const node of recorded.nodes) {
        const rendered = root.querySelector<SVGGElement>(
          `.argument-node[data-node-id="${node.id}"]`
        );
        expect(rendered!.dataset.accepted).toBe(String(node.accepted));
      }
    }
  });
});

describe("failure handling", () => {
  it("keeps the draft and offers retry on network failure", async () => {
    const root = mount();
    const { fetchImpl } = makeReplayFetch(fixtures);
    let failNext = true;
    const flaky: typeof fetchImpl = async (input, init) => {
      if (failNext && init?.method === "POST") {
        failNext = false;
        throw new TypeError("network down");
      }
      return fetchImpl(input, init);
    };
    const app = new App(root, new ApiClient("", flaky), 0);
    app.start();
    const input = root.querySelector<HTMLTextAreaElement>('[data-testid="essay-input"]')!;
    input.value = fixtures.essay;
    root.querySelector<HTMLButtonElement>('[data-testid="submit-essay"]')!.click();
    await waitFor(
      () => root.querySelector('[data-testid="error-banner"]') !== null,
      2000,
      "error banner"
    );
    // the draft survived
    expect(root.querySelector<HTMLTextAreaElement>('[data-testid="essay-input"]')!.value).toBe(
      fixtures.essay
    );
    root.querySelector<HTMLButtonElement>('[data-testid="retry"]')!.click();
    await waitFor(() => root.querySelectorAll(".dimension-card").length === 4, 2000, "report");
  });
});
