/** Client-only view state; never persisted server-side. */

import type { DocumentOut, FollowUp, TreeNode } from "./api.js";

export interface ViewState {
  activeDocument: DocumentOut | null;
  activeSession: string | null;
  /* turnIndex of the node highlighted in the tree map, if any */
  selectedNode: number | null;
  /* turnIndex set of collapsed tree nodes; pruned against each fetched forest */
  collapsedNodes: Set<number>;
  navVisible: boolean;
  /* last forest received from GET /tree; the tree map renders this and only this */
  forest: TreeNode[];
  suggestions: FollowUp[];
  pending: boolean;
  lastJumpAnchor: string | null;
}

export function initialState(): ViewState {
  return {
    activeDocument: null,
    activeSession: null,
    selectedNode: null,
    collapsedNodes: new Set(),
    navVisible: true,
    forest: [],
    suggestions: [],
    pending: false,
    lastJumpAnchor: null,
  };
}

export function collectTurnIndices(forest: TreeNode[]): Set<number> {
  const out = new Set<number>();
  const walk = (node: TreeNode) => {
    out.add(node.turnIndex);
    node.children.forEach(walk);
  };
  forest.forEach(walk);
  return out;
}

/** Drop collapse state for nodes that no longer exist in the fetched forest. */
export function pruneCollapsed(state: ViewState): void {
  const known = collectTurnIndices(state.forest);
  for (const index of [...state.collapsedNodes]) {
    if (!known.has(index)) {
      state.collapsedNodes.delete(index);
    }
  }
}
