/** Tree map view: the query forest in top-down node-link form.
 *
 * Renders exactly the last forest fetched from the server; collapse state
 * lives client-side and only hides descendants (with a count badge), never
 * mutates data. The container scrolls for pan.
 */

import type { TreeNode } from "../api.js";
import type { ViewState } from "../state.js";

const SVG_NS = "http://www.w3.org/2000/svg";

const X_STEP = 150;
const Y_STEP = 64;
const PAD = 28;

export interface TreeCallbacks {
  onToggle(turnIndex: number): void;
  onSelect(turnIndex: number): void;
}

interface Placed {
  node: TreeNode;
  x: number;
  y: number;
  parent: Placed | null;
  hiddenDescendants: number;
}

function countDescendants(node: TreeNode): number {
  return node.children.reduce((sum, child) => sum + 1 + countDescendants(child), 0);
}

function layoutTree(root: TreeNode, collapsed: Set<number>): Placed[] {
  const placed: Placed[] = [];
  let nextLeafColumn = 0;

  const place = (node: TreeNode, depth: number, parent: Placed | null): Placed => {
    const isCollapsed = collapsed.has(node.turnIndex);
    const children = isCollapsed ? [] : node.children;
    const entry: Placed = {
      node,
      x: 0,
      y: PAD + depth * Y_STEP,
      parent,
      hiddenDescendants: isCollapsed ? countDescendants(node) : 0,
    };
    placed.push(entry);
    if (children.length === 0) {
      entry.x = PAD + nextLeafColumn * X_STEP;
      nextLeafColumn += 1;
    } else {
      const placedChildren = children.map((child) => place(child, depth + 1, entry));
      entry.x = (placedChildren[0].x + placedChildren[placedChildren.length - 1].x) / 2;
    }
    return entry;
  };

  place(root, 0, null);
  return placed;
}

function nodeLabel(text: string): string {
  return text.length > 42 ? `${text.slice(0, 39)}…` : text;
}

export function renderTree(
  root: HTMLElement,
  forest: TreeNode[],
  state: ViewState,
  callbacks: TreeCallbacks,
): void {
  root.replaceChildren();
  if (forest.length === 0) {
    const empty = document.createElement("p");
    empty.className = "tree-empty";
    empty.textContent = "Ask a question to start the first query tree.";
    root.appendChild(empty);
    return;
  }

  forest.forEach((tree, i) => {
    const placed = layoutTree(tree, state.collapsedNodes);
    const width = Math.max(...placed.map((p) => p.x)) + X_STEP;
    const height = Math.max(...placed.map((p) => p.y)) + Y_STEP;

    const figure = document.createElement("figure");
    figure.className = "tree-figure";
    figure.dataset.treeIndex = String(i);

    const caption = document.createElement("figcaption");
    caption.textContent = `Topic ${i + 1}`;
    figure.appendChild(caption);

    const scroller = document.createElement("div");
    scroller.className = "tree-scroller"; // overflow scroll gives pan without touching data
    const svg = document.createElementNS(SVG_NS, "svg");
    svg.setAttribute("viewBox", `0 0 ${width} ${height}`);
    svg.setAttribute("width", String(width));
    svg.setAttribute("class", "tree-svg");

    for (const entry of placed) {
      if (!entry.parent) continue;
      const edge = document.createElementNS(SVG_NS, "line");
      edge.setAttribute("x1", String(entry.parent.x));
      edge.setAttribute("y1", String(entry.parent.y + 12));
      edge.setAttribute("x2", String(entry.x));
      edge.setAttribute("y2", String(entry.y - 12));
      edge.setAttribute("class", "tree-edge");
      svg.appendChild(edge);
    }

    for (const entry of placed) {
      const group = document.createElementNS(SVG_NS, "g");
      group.setAttribute("class", "tree-node" + (state.selectedNode === entry.node.turnIndex ? " selected" : ""));
      group.setAttribute("data-turn-index", String(entry.node.turnIndex));

      const circle = document.createElementNS(SVG_NS, "circle");
      circle.setAttribute("cx", String(entry.x));
      circle.setAttribute("cy", String(entry.y));
      circle.setAttribute("r", "10");
      circle.setAttribute("class", entry.node.cause ? `node-cause-${entry.node.cause.toLowerCase()}` : "node-root");
      const title = document.createElementNS(SVG_NS, "title");
      title.textContent = entry.node.text;
      circle.appendChild(title);
      circle.addEventListener("click", () => callbacks.onSelect(entry.node.turnIndex));

      const label = document.createElementNS(SVG_NS, "text");
      label.setAttribute("x", String(entry.x));
      label.setAttribute("y", String(entry.y + 26));
      label.setAttribute("text-anchor", "middle");
      label.setAttribute("class", "tree-label");
      label.textContent = nodeLabel(entry.node.text);

      group.append(circle, label);

      if (entry.node.children.length > 0) {
        const toggle = document.createElementNS(SVG_NS, "text");
        toggle.setAttribute("x", String(entry.x + 16));
        toggle.setAttribute("y", String(entry.y + 4));
        toggle.setAttribute("class", "tree-toggle");
        toggle.textContent = state.collapsedNodes.has(entry.node.turnIndex) ? "⊕" : "⊖";
        toggle.addEventListener("click", () => callbacks.onToggle(entry.node.turnIndex));
        group.appendChild(toggle);
      }
      if (entry.hiddenDescendants > 0) {
        const badge = document.createElementNS(SVG_NS, "text");
        badge.setAttribute("x", String(entry.x + 30));
        badge.setAttribute("y", String(entry.y + 4));
        badge.setAttribute("class", "tree-hidden-count");
        badge.textContent = `+${entry.hiddenDescendants}`;
        group.appendChild(badge);
      }
      svg.appendChild(group);
    }

    scroller.appendChild(svg);
    figure.appendChild(scroller);
    root.appendChild(figure);
  });
}
