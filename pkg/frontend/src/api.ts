/** Typed client for the causequest HTTP+JSON contract (see ../openapi.json).
 *
 * The UI talks to the service through this module only; every request it can
 * make maps to a documented endpoint.
 */

export type Cause = "Material" | "Formal" | "Efficient" | "Final";

export type RelationKind =
  | "FoundationalPrerequisite"
  | "DefiningTrait"
  | "IllustrativeExample"
  | "Influence";

export interface NavigationEntry {
  anchor: string;
  level: number;
  heading: string;
}

export interface Section {
  anchor: string;
  level: number;
  heading: string;
  body: string;
  children: Section[];
}

export interface DocumentOut {
  id: string;
  title: string;
  authors: string[];
  published: string | null;
  sections: Section[];
  navigation: NavigationEntry[];
}

export interface Concept {
  id: string;
  label: string;
  definition: string;
  salience: number;
}

export interface Relation {
  from: string;
  to: string;
  kind: RelationKind;
  note?: string | null;
}

export interface ConceptGraph {
  documentId: string | null;
  version: number;
  concepts: Concept[];
  relations: Relation[];
}

export interface FollowUp {
  text: string;
  cause: Cause;
  origin: string;
}

export interface TreeNode {
  turnIndex: number;
  text: string;
  cause: Cause | null;
  children: TreeNode[];
}

export interface QueryResult {
  answer: string;
  followUps: FollowUp[];
  tree: TreeNode[];
}

export interface Turn {
  index: number;
  role: "user" | "assistant";
  text: string;
  provenance: string;
  cause: Cause | null;
}

export interface SessionOut {
  id: string;
  documentId: string;
  turns: Turn[];
  forest: TreeNode[];
  activeFollowUps: { retryCount: number; questions: FollowUp[] } | null;
}

export interface Metrics {
  userQueryCount: number;
  dialogueTurns: number;
  distinctDimensions: number;
  distinctStrategies: number;
  followUpClickRate: number;
  treeCount: number;
  maxTreeDepth: number;
}

export interface Excerpt {
  documentId: string;
  anchor: string;
  text: string;
  charOffset: number;
}

export interface Problem {
  code: string;
  message: string;
  detail?: string;
}

export type QueryBody =
  | { text: string; provenance: "Typed" }
  | { provenance: "ClickedFollowUp"; slot: number }
  | { text: string; provenance: "ModifiedFollowUp"; slot: number };

export class ApiError extends Error {
  constructor(
    public status: number,
    public problem: Problem,
  ) {
    super(`${problem.code}: ${problem.message}`);
  }
}

export class Api {
  constructor(private baseUrl: string = "") {}

  private async request<T>(method: string, path: string, body?: string, contentType?: string): Promise<T> {
    const response = await fetch(this.baseUrl + path, {
      method,
      headers: contentType ? { "Content-Type": contentType } : undefined,
      body,
    });
    if (response.status === 204) {
      return undefined as T;
    }
    const data = await response.json();
    if (!response.ok) {
      throw new ApiError(response.status, data as Problem);
    }
    return data as T;
  }

  uploadDocument(raw: string): Promise<{ documentId: string; navigation: NavigationEntry[] }> {
    return this.request("POST", "/documents", raw, "text/plain");
  }

  getDocument(documentId: string): Promise<DocumentOut> {
    return this.request("GET", `/documents/${documentId}`);
  }

  getGraph(documentId: string): Promise<ConceptGraph> {
    return this.request("GET", `/documents/${documentId}/graph`);
  }

  putGraph(documentId: string, graph: unknown): Promise<void> {
    return this.request("PUT", `/documents/${documentId}/graph`, JSON.stringify(graph), "application/json");
  }

  createSession(documentId: string): Promise<{ sessionId: string }> {
    return this.request("POST", "/sessions", JSON.stringify({ documentId }), "application/json");
  }

  getSession(sessionId: string): Promise<SessionOut> {
    return this.request("GET", `/sessions/${sessionId}`);
  }

  postQuery(sessionId: string, body: QueryBody): Promise<QueryResult> {
    return this.request("POST", `/sessions/${sessionId}/query`, JSON.stringify(body), "application/json");
  }

  getTree(sessionId: string): Promise<TreeNode[]> {
    return this.request("GET", `/sessions/${sessionId}/tree`);
  }

  getMetrics(sessionId: string): Promise<Metrics> {
    return this.request("GET", `/sessions/${sessionId}/metrics`);
  }

  locate(sessionId: string, quote: string): Promise<Excerpt[]> {
    return this.request("GET", `/sessions/${sessionId}/locate?quote=${encodeURIComponent(quote)}`);
  }
}
