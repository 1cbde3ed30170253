/** App shell: four coordinated panels over the HTTP contract and nothing else.
 *
 * The server owns all dialogue and tree state. After every exchange the app
 * re-fetches the forest from GET /tree and renders that payload as-is, so the
 * display can never drift from server truth.
 */

import { Api, ApiError, type Metrics, type QueryBody, type Turn } from "./api.js";
import { initialState, pruneCollapsed, type ViewState } from "./state.js";
import { jumpToAnchor, renderContent } from "./views/content.js";
import { renderGraph } from "./views/graph.js";
import { renderConversation } from "./views/conversation.js";
import { renderTree } from "./views/tree.js";

export class App {
  readonly state: ViewState = initialState();
  readonly api: Api;
  private turns: Turn[] = [];
  private graphPanel!: HTMLElement;
  private contentPanel!: HTMLElement;
  private conversationPanel!: HTMLElement;
  private treePanel!: HTMLElement;
  private statusBar!: HTMLElement;
  private setupPanel!: HTMLElement;
  private inflight: Promise<void> | null = null;

  constructor(
    private root: HTMLElement,
    baseUrl = "",
  ) {
    this.api = new Api(baseUrl);
    this.buildSkeleton();
  }

  /** Await the end of whatever user action is currently being processed. */
  async settle(): Promise<void> {
    while (this.inflight) {
      await this.inflight;
    }
  }

  private track(work: Promise<void>): void {
    this.inflight = work.finally(() => {
      this.inflight = null;
    });
  }

  private buildSkeleton(): void {
    this.root.replaceChildren();
    this.root.className = "app";

    this.setupPanel = document.createElement("section");
    this.setupPanel.className = "panel setup-panel";
    const intro = document.createElement("p");
    intro.textContent = "Paste a learning document (key: value header, then # headed text) to begin.";
    const textarea = document.createElement("textarea");
    textarea.className = "setup-text";
    const button = document.createElement("button");
    button.type = "button";
    button.className = "setup-load";
    button.textContent = "Load document";
    button.addEventListener("click", () => {
      const raw = textarea.value;
      if (!raw.trim()) return;
      this.track(this.loadDocument(raw));
    });
    this.setupPanel.append(intro, textarea, button);

    const grid = document.createElement("div");
    grid.className = "grid";
    this.contentPanel = this.panel(grid, "content-panel", "Learning material");
    this.graphPanel = this.panel(grid, "graph-panel", "Concept graph");
    this.conversationPanel = this.panel(grid, "conversation-panel", "Conversation");
    this.treePanel = this.panel(grid, "tree-panel", "Query trees");

    this.statusBar = document.createElement("footer");
    this.statusBar.className = "status-bar";

    this.root.append(this.setupPanel, grid, this.statusBar);
  }

  private panel(grid: HTMLElement, className: string, title: string): HTMLElement {
    const section = document.createElement("section");
    section.className = `panel ${className}`;
    const heading = document.createElement("h2");
    heading.textContent = title;
    const body = document.createElement("div");
    body.className = "panel-body";
    section.append(heading, body);
    grid.appendChild(section);
    return body;
  }

  /** Upload the document, open a session, and draw all four views. */
  async loadDocument(raw: string): Promise<void> {
    try {
      const uploaded = await this.api.uploadDocument(raw);
      const [doc, session] = await Promise.all([
        this.api.getDocument(uploaded.documentId),
        this.api.createSession(uploaded.documentId),
      ]);
      this.state.activeDocument = doc;
      this.state.activeSession = session.sessionId;
      this.setupPanel.hidden = true;
      this.renderContentPanel();
      await this.refreshGraph();
      this.renderConversationPanel();
      this.renderTreePanel();
      this.setStatus("Session started. Ask your first question.");
    } catch (error) {
      this.reportError(error);
    }
  }

  private async refreshGraph(): Promise<void> {
    const doc = this.state.activeDocument;
    if (!doc) return;
    try {
      renderGraph(this.graphPanel, await this.api.getGraph(doc.id));
    } catch (error) {
      if (error instanceof ApiError && error.status === 404) {
        renderGraph(this.graphPanel, null);
      } else {
        this.reportError(error);
      }
    }
  }

  private renderContentPanel(): void {
    const doc = this.state.activeDocument;
    if (!doc) return;
    renderContent(this.contentPanel, doc, this.state, {
      onJump: (anchor) => this.jumpTo(anchor),
      onLocate: (quote) => this.api.locate(this.state.activeSession!, quote),
    });
  }

  jumpTo(anchor: string): void {
    jumpToAnchor(this.contentPanel, anchor, this.state);
  }

  private renderConversationPanel(): void {
    renderConversation(this.conversationPanel, this.turns, this.state, {
      onTyped: (text) => this.track(this.runQuery({ text, provenance: "Typed" })),
      onClickSuggestion: (slot) => this.track(this.runQuery({ provenance: "ClickedFollowUp", slot })),
      onModifiedSubmit: (slot, text) =>
        this.track(this.runQuery({ text, provenance: "ModifiedFollowUp", slot })),
    });
  }

  private renderTreePanel(): void {
    renderTree(this.treePanel, this.state.forest, this.state, {
      onToggle: (turnIndex) => {
        if (this.state.collapsedNodes.has(turnIndex)) {
          this.state.collapsedNodes.delete(turnIndex);
        } else {
          this.state.collapsedNodes.add(turnIndex);
        }
        this.renderTreePanel();
      },
      onSelect: (turnIndex) => {
        this.state.selectedNode = turnIndex;
        this.renderTreePanel();
      },
    });
  }

  private async runQuery(body: QueryBody): Promise<void> {
    const sessionId = this.state.activeSession;
    if (!sessionId || this.state.pending) return;
    this.state.pending = true;
    this.renderConversationPanel();
    try {
      const result = await this.api.postQuery(sessionId, body);
      this.state.suggestions = result.followUps;
      const [session, forest, metrics] = await Promise.all([
        this.api.getSession(sessionId),
        this.api.getTree(sessionId),
        this.api.getMetrics(sessionId),
      ]);
      this.turns = session.turns;
      this.state.forest = forest;
      pruneCollapsed(this.state);
      this.renderMetrics(metrics);
      this.setStatus("");
    } catch (error) {
      this.reportError(error);
    } finally {
      this.state.pending = false;
      this.renderConversationPanel();
      this.renderTreePanel();
    }
  }

  private renderMetrics(metrics: Metrics): void {
    this.statusBar.dataset.queries = String(metrics.userQueryCount);
    this.statusBar.textContent =
      `${metrics.userQueryCount} queries · ${metrics.distinctDimensions} dimensions · ` +
      `${metrics.distinctStrategies} strategies · ${metrics.treeCount} trees (max depth ${metrics.maxTreeDepth})`;
  }

  private setStatus(text: string): void {
    if (text) {
      this.statusBar.textContent = text;
    }
  }

  private reportError(error: unknown): void {
    const message =
      error instanceof ApiError ? `${error.problem.code}: ${error.problem.message}` : String(error);
    this.statusBar.textContent = message;
    this.statusBar.classList.add("status-error");
  }
}

export function initApp(root: HTMLElement, baseUrl = ""): App {
  return new App(root, baseUrl);
}
