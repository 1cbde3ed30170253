/** Concept graph view: node-link SVG with one visual style per relation kind
 * plus a legend. Layout is a deterministic circle; prettiness is not the point,
 * the four distinguishable edge styles are.
 */

import type { ConceptGraph, RelationKind } from "../api.js";

const SVG_NS = "http://www.w3.org/2000/svg";

export const EDGE_STYLES: Record<RelationKind, { dash: string; color: string; label: string }> = {
  FoundationalPrerequisite: { dash: "", color: "#1c5d99", label: "foundational prerequisite" },
  DefiningTrait: { dash: "6 3", color: "#2e7d32", label: "defining trait" },
  IllustrativeExample: { dash: "2 3", color: "#b26a00", label: "illustrative example" },
  Influence: { dash: "8 3 2 3", color: "#8e24aa", label: "influence" },
};

interface Point {
  x: number;
  y: number;
}

function circleLayout(ids: string[], width: number, height: number): Map<string, Point> {
  const cx = width / 2;
  const cy = height / 2;
  const radius = Math.min(cx, cy) - 60;
  const points = new Map<string, Point>();
  ids.forEach((id, i) => {
    const angle = (2 * Math.PI * i) / Math.max(ids.length, 1) - Math.PI / 2;
    points.set(id, { x: cx + radius * Math.cos(angle), y: cy + radius * Math.sin(angle) });
  });
  return points;
}

export function renderGraph(root: HTMLElement, graph: ConceptGraph | null): void {
  root.replaceChildren();
  if (!graph || graph.concepts.length === 0) {
    const empty = document.createElement("p");
    empty.className = "graph-empty";
    empty.textContent = "No curated concept graph for this document yet.";
    root.appendChild(empty);
    return;
  }

  const width = 520;
  const height = 420;
  const svg = document.createElementNS(SVG_NS, "svg");
  svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
  svg.setAttribute("class", "graph-svg");

  const points = circleLayout(graph.concepts.map((c) => c.id), width, height);

  for (const relation of graph.relations) {
    const from = points.get(relation.from);
    const to = points.get(relation.to);
    if (!from || !to) continue;
    const style = EDGE_STYLES[relation.kind];
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", String(from.x));
    line.setAttribute("y1", String(from.y));
    line.setAttribute("x2", String(to.x));
    line.setAttribute("y2", String(to.y));
    line.setAttribute("stroke", style.color);
    line.setAttribute("stroke-width", "1.6");
    if (style.dash) {
      line.setAttribute("stroke-dasharray", style.dash);
    }
    line.setAttribute("class", `graph-edge kind-${relation.kind}`);
    if (relation.note) {
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent = relation.note;
      line.appendChild(title);
    }
    svg.appendChild(line);
  }

  for (const concept of graph.concepts) {
    const point = points.get(concept.id)!;
    const group = document.createElementNS(SVG_NS, "g");
    group.setAttribute("class", "graph-node");
    const circle = document.createElementNS(SVG_NS, "circle");
    circle.setAttribute("cx", String(point.x));
    circle.setAttribute("cy", String(point.y));
    circle.setAttribute("r", String(8 + 6 * concept.salience));
    const title = document.createElementNS(SVG_NS, "title");
    title.textContent = concept.definition;
    circle.appendChild(title);
    const label = document.createElementNS(SVG_NS, "text");
    label.setAttribute("x", String(point.x));
    label.setAttribute("y", String(point.y - 14));
    label.setAttribute("text-anchor", "middle");
    label.textContent = concept.label;
    group.append(circle, label);
    svg.appendChild(group);
  }

  const legend = document.createElement("ul");
  legend.className = "graph-legend";
  for (const [kind, style] of Object.entries(EDGE_STYLES)) {
    const item = document.createElement("li");
    item.dataset.kind = kind;
    const swatch = document.createElementNS(SVG_NS, "svg");
    swatch.setAttribute("viewBox", "0 0 40 8");
    swatch.setAttribute("class", "legend-swatch");
    const line = document.createElementNS(SVG_NS, "line");
    line.setAttribute("x1", "0");
    line.setAttribute("y1", "4");
    line.setAttribute("x2", "40");
    line.setAttribute("y2", "4");
    line.setAttribute("stroke", style.color);
    line.setAttribute("stroke-width", "2");
    if (style.dash) line.setAttribute("stroke-dasharray", style.dash);
    swatch.appendChild(line);
    const text = document.createElement("span");
    text.textContent = style.label;
    item.append(swatch, text);
    legend.appendChild(item);
  }

  root.append(svg, legend);
}
