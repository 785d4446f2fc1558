import { ApiClient, ApiError } from "./api.js";
import { Store, type Panel } from "./state.js";
import type { ActionSpec, QnEditSpec } from "./types.js";
import { renderAntipatterns } from "./views/antipatterns.js";
import { renderDashboard } from "./views/dashboard.js";
import { renderQnEditor } from "./views/qneditor.js";
import { renderTree } from "./views/tree.js";

/** Application controller: every mutation round-trips through the API and
 * re-fetches server truth (no optimistic updates; solver results are the
 * authority). */
export class App {
  readonly store = new Store();
  private actionCounter = 0;

  constructor(
    private readonly api: ApiClient,
    private readonly root: HTMLElement,
  ) {
    this.store.subscribe(() => this.render());
    this.render();
  }

  private nextActionId(): string {
    this.actionCounter += 1;
    return `ui-${this.actionCounter}`;
  }

  async start(modelDoc: unknown): Promise<void> {
    this.store.update({ busy: true, error: null });
    try {
      const { id: modelId } = await this.api.uploadModel(modelDoc);
      const session = await this.api.createSession(modelId);
      this.store.update({ modelId, sessionId: session.id });
      await this.refresh();
      const antipatterns = await this.api.getAntipatterns(modelId);
      this.store.update({ antipatterns: antipatterns.occurrences, busy: false });
    } catch (error) {
      this.fail(error);
    }
  }

  async refresh(): Promise<void> {
    const { sessionId } = this.store.state;
    if (!sessionId) {
      return;
    }
    const tree = await this.api.getTree(sessionId);
    this.store.applyTree(tree);
  }

  async applyAction(action: ActionSpec): Promise<void> {
    const { sessionId, cursor } = this.store.state;
    if (!sessionId || !cursor) {
      return;
    }
    this.store.update({ busy: true, error: null });
    try {
      await this.api.expand(sessionId, cursor, action, this.nextActionId());
      await this.refresh();
      this.store.update({ busy: false, panel: "results" });
    } catch (error) {
      this.fail(error);
    }
  }

  async applyQnEdits(edits: QnEditSpec[]): Promise<void> {
    const { sessionId, cursor } = this.store.state;
    if (!sessionId || !cursor) {
      return;
    }
    this.store.update({ busy: true, error: null });
    try {
      await this.api.applyQnEdits(sessionId, cursor, edits, this.nextActionId());
      await this.refresh();
      this.store.update({ busy: false, panel: "results", qnView: null });
    } catch (error) {
      this.fail(error);
    }
  }

  async backtrack(nodeId: string): Promise<void> {
    const { sessionId } = this.store.state;
    if (!sessionId) {
      return;
    }
    this.store.update({ error: null });
    try {
      await this.api.moveCursor(sessionId, nodeId);
      await this.refresh();
    } catch (error) {
      this.fail(error);
    }
  }

  async showPanel(panel: Panel): Promise<void> {
    const { sessionId, cursor } = this.store.state;
    this.store.update({ panel, error: null });
    try {
      if (panel === "qn" && sessionId && cursor) {
        const qnView = await this.api.getQnView(sessionId, cursor);
        this.store.update({ qnView });
      }
      if (panel === "ledger" && sessionId) {
        const ledger = await this.api.getLedger(sessionId);
        this.store.update({ ledger });
      }
    } catch (error) {
      this.fail(error);
    }
  }

  private fail(error: unknown): void {
    const message = error instanceof ApiError ? `${error.status}: ${error.message}` : String(error);
    this.store.update({ busy: false, error: message });
  }

  private render(): void {
    const state = this.store.state;
    this.root.textContent = "";

    if (!state.sessionId) {
      this.root.appendChild(this.renderStartScreen());
      return;
    }

    const layout = document.createElement("div");
    layout.className = "layout";

    const side = document.createElement("aside");
    if (state.rootId && state.cursor) {
      side.appendChild(
        renderTree(state.nodes, state.rootId, state.cursor, {
          onSelect: (nodeId) => void this.backtrack(nodeId),
        }),
      );
    }
    layout.appendChild(side);

    const mainPanel = document.createElement("main");
    mainPanel.appendChild(this.renderTabs(state.panel));
    if (state.error) {
      const error = document.createElement("p");
      error.className = "api-error";
      error.textContent = state.error;
      mainPanel.appendChild(error);
    }
    const node = this.store.cursorNode();
    if (state.panel === "results" && node) {
      mainPanel.appendChild(renderDashboard(node));
    } else if (state.panel === "antipatterns") {
      mainPanel.appendChild(
        renderAntipatterns(state.antipatterns, { onSubmit: (action) => void this.applyAction(action) }),
      );
    } else if (state.panel === "qn" && state.qnView) {
      mainPanel.appendChild(
        renderQnEditor(state.qnView, { onEdits: (edits) => void this.applyQnEdits(edits) }),
      );
    } else if (state.panel === "ledger" && state.ledger) {
      mainPanel.appendChild(this.renderLedger());
    }
    layout.appendChild(mainPanel);
    this.root.appendChild(layout);
  }

  private renderStartScreen(): HTMLElement {
    const section = document.createElement("section");
    section.className = "start-screen";
    const heading = document.createElement("h1");
    heading.textContent = "Performance analysis workbench";
    const textarea = document.createElement("textarea");
    textarea.name = "model";
    textarea.placeholder = "paste a spe-model/1 JSON document";
    const error = document.createElement("p");
    error.className = "form-error";
    const button = document.createElement("button");
    button.type = "button";
    button.textContent = "upload model & start session";
    button.addEventListener("click", () => {
      try {
        const doc = JSON.parse(textarea.value);
        void this.start(doc);
      } catch {
        error.textContent = "not valid JSON";
      }
    });
    section.append(heading, textarea, error, button);
    return section;
  }

  private renderTabs(active: Panel): HTMLElement {
    const nav = document.createElement("nav");
    nav.className = "tabs";
    const panels: Array<[Panel, string]> = [
      ["results", "Results"],
      ["antipatterns", "Antipatterns"],
      ["qn", "QN editor"],
      ["ledger", "Cost ledger"],
    ];
    for (const [panel, label] of panels) {
      const button = document.createElement("button");
      button.type = "button";
      button.dataset.panel = panel;
      button.textContent = label;
      if (panel === active) {
        button.classList.add("active");
      }
      button.addEventListener("click", () => void this.showPanel(panel));
      nav.appendChild(button);
    }
    return nav;
  }

  private renderLedger(): HTMLElement {
    const ledger = this.store.state.ledger;
    const section = document.createElement("section");
    section.className = "ledger";
    const heading = document.createElement("h2");
    heading.textContent = "Scalability ledger";
    section.appendChild(heading);
    if (!ledger) {
      return section;
    }
    const iterations = document.createElement("p");
    iterations.className = "iterations";
    iterations.textContent =
      `software iterations M=${ledger.softwareIterations}, ` +
      `performance iterations N=${ledger.performanceIterations}`;
    section.appendChild(iterations);
    if (ledger.tradeoff) {
      const tradeoff = document.createElement("p");
      tradeoff.className = "tradeoff";
      tradeoff.textContent =
        `M·mean(tForward)=${ledger.tradeoff.lhs.toExponential(3)}s vs ` +
        `N·(mean(tForth)+mean(tBack))=${ledger.tradeoff.rhs.toExponential(3)}s — ` +
        (ledger.tradeoff.softwareSideCheaper ? "software side cheaper" : "performance side cheaper");
      section.appendChild(tradeoff);
    }
    return section;
  }
}

export function boot(): void {
  const mount = document.getElementById("app");
  if (mount) {
    new App(new ApiClient((input, init) => fetch(input, init)), mount);
  }
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}
