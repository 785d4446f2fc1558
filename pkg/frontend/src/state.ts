import type { Ledger, Occurrence, QnView, Tree, TreeNode } from "./types.js";

export type Panel = "results" | "antipatterns" | "qn" | "ledger";

export interface ViewState {
  modelId: string | null;
  sessionId: string | null;
  rootId: string | null;
  cursor: string | null;
  nodes: Record<string, TreeNode>;
  panel: Panel;
  antipatterns: Occurrence[];
  qnView: QnView | null;
  ledger: Ledger | null;
  error: string | null;
  busy: boolean;
}

export function initialState(): ViewState {
  return {
    modelId: null,
    sessionId: null,
    rootId: null,
    cursor: null,
    nodes: {},
    panel: "results",
    antipatterns: [],
    qnView: null,
    ledger: null,
    error: null,
    busy: false,
  };
}

/** Minimal observable store: every mutation re-renders the app. */
export class Store {
  private listeners: Array<(s: ViewState) => void> = [];
  constructor(public state: ViewState = initialState()) {}

  subscribe(listener: (s: ViewState) => void): void {
    this.listeners.push(listener);
  }

  update(patch: Partial<ViewState>): void {
    this.state = { ...this.state, ...patch };
    for (const listener of this.listeners) {
      listener(this.state);
    }
  }

  applyTree(tree: Tree): void {
    const nodes: Record<string, TreeNode> = {};
    for (const node of tree.nodes) {
      nodes[node.id] = node;
    }
    this.update({ nodes, rootId: tree.rootId, cursor: tree.cursor });
  }

  cursorNode(): TreeNode | null {
    if (this.state.cursor === null) {
      return null;
    }
    return this.state.nodes[this.state.cursor] ?? null;
  }
}
