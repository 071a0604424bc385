import type { DimensionGraph } from "./types.js";

/**
 * Force-directed layout with deterministic seeding: positions depend only on
 * the node ids and edges, so the same graph always renders the same picture
 * (stable screenshots, stable tests).
 */

export interface Point {
  x: number;
  y: number;
}

function hashString(text: string): number {
  let hash = 2166136261;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 16777619);
  }
  return hash >>> 0;
}

function mulberry32(seed: number): () => number {
  let state = seed >>> 0;
  return () => {
    state = (state + 0x6d2b79f5) | 0;
    let t = Math.imul(state ^ (state >>> 15), 1 | state);
    t = (t + Math.imul(t ^ (t >>> 7), 61 | t)) ^ t;
    return ((t ^ (t >>> 14)) >>> 0) / 4294967296;
  };
}

export function layoutGraph(
  nodeIds: string[],
  edges: { from: string; to: string }[],
  width = 640,
  height = 420,
  iterations = 200
): Map<string, Point> {
  const ids = [...nodeIds].sort();
  const seed = hashString(ids.join("|"));
  const rand = mulberry32(seed);
  const positions = new Map<string, Point>();
  for (const id of ids) {
    positions.set(id, {
      x: width * (0.2 + 0.6 * rand()),
      y: height * (0.2 + 0.6 * rand()),
    });
  }
  const springLength = Math.min(width, height) / 2.6;
  const repulsion = springLength * springLength;
  for (let step = 0; step < iterations; step++) {
    const cooling = 1 - step / iterations;
    const force = new Map<string, Point>(ids.map((id) => [id, { x: 0, y: 0 }]));
    for (let i = 0; i < ids.length; i++) {
      for (let j = i + 1; j < ids.length; j++) {
        const a = positions.get(ids[i])!;
        const b = positions.get(ids[j])!;
        let dx = a.x - b.x;
        let dy = a.y - b.y;
        const distSq = Math.max(dx * dx + dy * dy, 0.01);
        const dist = Math.sqrt(distSq);
        dx /= dist;
        dy /= dist;
        const push = repulsion / distSq;
        force.get(ids[i])!.x += dx * push;
        force.get(ids[i])!.y += dy * push;
        force.get(ids[j])!.x -= dx * push;
        force.get(ids[j])!.y -= dy * push;
      }
    }
    for (const edge of edges) {
      const a = positions.get(edge.from);
      const b = positions.get(edge.to);
      if (!a || !b) continue;
      let dx = b.x - a.x;
      let dy = b.y - a.y;
      const dist = Math.max(Math.sqrt(dx * dx + dy * dy), 0.1);
      dx /= dist;
      dy /= dist;
      const pull = (dist - springLength) * 0.08;
      force.get(edge.from)!.x += dx * pull;
      force.get(edge.from)!.y += dy * pull;
      force.get(edge.to)!.x -= dx * pull;
      force.get(edge.to)!.y -= dy * pull;
    }
    for (const id of ids) {
      const pos = positions.get(id)!;
      const f = force.get(id)!;
      // gentle centering keeps disconnected nodes on screen
      f.x += (width / 2 - pos.x) * 0.02;
      f.y += (height / 2 - pos.y) * 0.02;
      pos.x += Math.max(-12, Math.min(12, f.x)) * cooling;
      pos.y += Math.max(-12, Math.min(12, f.y)) * cooling;
      pos.x = Math.max(30, Math.min(width - 30, pos.x));
      pos.y = Math.max(30, Math.min(height - 30, pos.y));
    }
  }
  return positions;
}

const SVG_NS = "http://www.w3.org/2000/svg";

function svgElement<K extends keyof SVGElementTagNameMap>(
  tag: K,
  attrs: Record<string, string>
): SVGElementTagNameMap[K] {
  const el = document.createElementNS(SVG_NS, tag);
  for (const [key, value] of Object.entries(attrs)) {
    el.setAttribute(key, value);
  }
  return el;
}

/**
 * Render the attack graph. Every accepted/rejected/core marking comes
 * straight from the server's flags; nothing semantic is computed here.
 */
export function renderGraph(
  graph: DimensionGraph,
  highlightNew: Set<string> = new Set(),
  width = 640,
  height = 420
): SVGSVGElement {
  const positions = layoutGraph(
    graph.nodes.map((n) => n.id),
    graph.edges,
    width,
    height
  );
  const svg = svgElement("svg", {
    viewBox: `0 0 ${width} ${height}`,
    class: "argument-graph",
    role: "img",
  });
  const defs = svgElement("defs", {});
  const marker = svgElement("marker", {
    id: "attack-arrow",
    viewBox: "0 0 10 10",
    refX: "22",
    refY: "5",
    markerWidth: "7",
    markerHeight: "7",
    orient: "auto-start-reverse",
  });
  marker.appendChild(svgElement("path", { d: "M 0 0 L 10 5 L 0 10 z", class: "arrow-head" }));
  defs.appendChild(marker);
  svg.appendChild(defs);

  for (const edge of graph.edges) {
    const a = positions.get(edge.from);
    const b = positions.get(edge.to);
    if (!a || !b) continue;
    const line = svgElement("line", {
      x1: String(a.x),
      y1: String(a.y),
      x2: String(b.x),
      y2: String(b.y),
      class: "attack-edge",
      "marker-end": "url(#attack-arrow)",
      "data-from": edge.from,
      "data-to": edge.to,
    });
    const title = svgElement("title", {});
    title.textContent = `${edge.from} attacks ${edge.to}: ${edge.rationale}`;
    line.appendChild(title);
    svg.appendChild(line);
  }

  for (const node of graph.nodes) {
    const pos = positions.get(node.id)!;
    const classes = ["argument-node", node.accepted ? "accepted" : "rejected"];
    if (node.in_grounded) classes.push("core");
    if (highlightNew.has(node.id)) classes.push("new-node");
    const group = svgElement("g", {
      class: classes.join(" "),
      transform: `translate(${pos.x}, ${pos.y})`,
      "data-node-id": node.id,
      "data-author": node.author,
      "data-accepted": String(node.accepted),
      "data-core": String(node.in_grounded),
    });
    if (node.in_grounded) {
      group.appendChild(svgElement("circle", { r: "24", class: "core-ring" }));
    }
    group.appendChild(svgElement("circle", { r: "19", class: "node-body" }));
    const idLabel = svgElement("text", { class: "node-id", "text-anchor": "middle", dy: "5" });
    idLabel.textContent = node.id;
    group.appendChild(idLabel);
    const authorLabel = svgElement("text", {
      class: "node-author",
      "text-anchor": "middle",
      dy: "36",
    });
    authorLabel.textContent = node.author;
    group.appendChild(authorLabel);
    const title = svgElement("title", {});
    title.textContent = `${node.id} (${node.author}): ${node.label}`;
    group.appendChild(title);
    svg.appendChild(group);
  }
  return svg;
}
