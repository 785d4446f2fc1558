import type { ActionSpec, Ledger, Occurrence, QnEditSpec, QnView, Tree, TreeNode } from "./types.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    detail: string,
  ) {
    super(detail);
  }
}

type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

/** Thin typed client over /api/v1; the fetch implementation is injectable so
 * tests can run against an in-memory backend. */
export class ApiClient {
  constructor(
    private readonly fetchImpl: FetchLike,
    private readonly base: string = "/api/v1",
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchImpl(this.base + path, {
      method,
      headers: body === undefined ? {} : { "Content-Type": "application/json" },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const text = await response.text();
    const doc = text ? JSON.parse(text) : null;
    if (!response.ok && response.status !== 202) {
      const detail = doc && typeof doc.detail === "string" ? doc.detail : `HTTP ${response.status}`;
      throw new ApiError(response.status, detail);
    }
    return doc as T;
  }

  uploadModel(doc: unknown): Promise<{ id: string }> {
    return this.request("POST", "/models", doc);
  }

  createSession(modelId: string): Promise<{ id: string; rootId: string }> {
    return this.request("POST", "/sessions", { modelId });
  }

  getTree(sessionId: string): Promise<Tree> {
    return this.request("GET", `/sessions/${sessionId}/tree`);
  }

  expand(sessionId: string, nodeId: string, action: ActionSpec, actionId: string): Promise<TreeNode> {
    return this.request("POST", `/sessions/${sessionId}/nodes/${nodeId}/expand`, { actionId, action });
  }

  applyQnEdits(sessionId: string, nodeId: string, edits: QnEditSpec[], actionId: string): Promise<TreeNode> {
    return this.request("POST", `/sessions/${sessionId}/nodes/${nodeId}/qn-edits`, { actionId, edits });
  }

  moveCursor(sessionId: string, nodeId: string): Promise<{ cursor: string }> {
    return this.request("POST", `/sessions/${sessionId}/cursor`, { nodeId });
  }

  getAntipatterns(modelId: string): Promise<{ occurrences: Occurrence[] }> {
    return this.request("GET", `/models/${modelId}/antipatterns`);
  }

  getQnView(sessionId: string, nodeId: string): Promise<QnView> {
    return this.request("GET", `/sessions/${sessionId}/nodes/${nodeId}/qn`);
  }

  getLedger(sessionId: string): Promise<Ledger> {
    return this.request("GET", `/sessions/${sessionId}/ledger`);
  }
}
