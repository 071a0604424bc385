import { describe, expect, it } from "vitest";

import { layoutGraph, renderGraph } from "../src/graph.js";
import type { DimensionGraph } from "../src/types.js";

const EDGES = [
  { from: "A", to: "B" },
  { from: "B", to: "A" },
  { from: "C", to: "B" },
];

describe("layoutGraph", () => {
  it("is deterministic for the same ids and edges", () => {
    const first = layoutGraph(["A", "B", "C"], EDGES);
    const second = layoutGraph(["A", "B", "C"], EDGES);
    expect([...second.entries()]).toEqual([...first.entries()]);
  });

  it("ignores node listing order", () => {
    const first = layoutGraph(["A", "B", "C"], EDGES);
    const second = layoutGraph(["C", "A", "B"], EDGES);
    expect([...second.entries()].sort()).toEqual([...first.entries()].sort());
  });

  it("keeps every node inside the canvas", () => {
    const positions = layoutGraph(["A", "B", "C", "D", "E", "F"], EDGES, 640, 420);
    for (const point of positions.values()) {
      expect(point.x).toBeGreaterThanOrEqual(30);
      expect(point.x).toBeLessThanOrEqual(610);
      expect(point.y).toBeGreaterThanOrEqual(30);
      expect(point.y).toBeLessThanOrEqual(390);
    }
  });

  it("separates distinct nodes", () => {
    const positions = layoutGraph(["A", "B", "C"], EDGES);
    const points = [...positions.values()];
    for (let i = 0; i < points.length; i++) {
      for (let j = i + 1; j < points.length; j++) {
        const dist = Math.hypot(points[i].x - points[j].x, points[i].y - points[j].y);
        expect(dist).toBeGreaterThan(20);
      }
    }
  });
});

describe("renderGraph", () => {
  const graph: DimensionGraph = {
    dimension: "issue",
    grade: 1,
    contested: false,
    nodes: [
      { id: "A", label: "a claim", author: "Mike", proposed_level: 1, accepted: true, in_grounded: true },
      { id: "B", label: "b claim", author: "Sarah", proposed_level: 0, accepted: false, in_grounded: false },
    ],
    edges: [{ from: "A", to: "B", rationale: "contradiction" }],
  };

  it("renders nodes with server-provided classes only", () => {
    const svg = renderGraph(graph);
    const a = svg.querySelector('[data-node-id="A"]')!;
    const b = svg.querySelector('[data-node-id="B"]')!;
    expect(a.classList.contains("accepted")).toBe(true);
    expect(a.classList.contains("core")).toBe(true);
    expect(b.classList.contains("rejected")).toBe(true);
    expect(b.classList.contains("core")).toBe(false);
  });

  it("draws one arrowed edge per attack with its rationale as a tooltip", () => {
    const svg = renderGraph(graph);
    const edges = svg.querySelectorAll(".attack-edge");
    expect(edges).toHaveLength(1);
    expect(edges[0].querySelector("title")!.textContent).toContain("contradiction");
  });

  it("highlights nodes named as new", () => {
    const svg = renderGraph(graph, new Set(["B"]));
    expect(svg.querySelector('[data-node-id="B"]')!.classList.contains("new-node")).toBe(true);
    expect(svg.querySelector('[data-node-id="A"]')!.classList.contains("new-node")).toBe(false);
  });
});
