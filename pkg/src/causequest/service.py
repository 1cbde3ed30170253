"""HTTP+JSON surface over documents, graphs, sessions, and metrics.

The UI is a pure client of this API; nothing it needs lives anywhere else.
JSON keys are lowerCamelCase and enums travel as their exact member strings.
Errors use a problem-details body {code, message, detail?} where code is the
stable error name. Per-session writes are serialized by the session manager's
non-blocking lock: a concurrent second query gets 409 GenerationPending.

No authentication; bind to loopback unless told otherwise.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from typing import Literal

from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .analytics import compute_metrics, metrics_to_dict
from .concepts import ConceptGraph, graph_to_dict, load_curated_graph
from .content import ContentStore, document_to_dict, locate, navigation_index
from .errors import (
    CauseQuestError,
    CorruptSnapshot,
    DanglingEndpoint,
    DocumentNotFound,
    DuplicateConcept,
    DuplicateDocument,
    DuplicateRelation,
    EmptyBody,
    EmptyQuery,
    EmptySlotText,
    GenerationPending,
    GraphNotFound,
    InvalidRelation,
    InvalidSlot,
    MalformedGraphFile,
    MalformedHeader,
    NoActiveFollowUps,
    ProviderRefusal,
    ProviderUnavailable,
    QuoteTooShort,
    SessionNotFound,
    UnknownRelationKind,
)
from .gateway import Gateway, GatewayConfig, HttpGateway, MockGateway, load_script
from .prompts import DEFAULT_EXCERPT_BUDGET
from .sessions import Provenance, SessionManager, TreeNode, session_to_dict

_STATUS: dict[type[CauseQuestError], int] = {
    MalformedHeader: 400,
    EmptyBody: 400,
    QuoteTooShort: 400,
    EmptyQuery: 400,
    EmptySlotText: 400,
    InvalidSlot: 400,
    DocumentNotFound: 404,
    SessionNotFound: 404,
    GraphNotFound: 404,
    DuplicateDocument: 409,
    GenerationPending: 409,
    NoActiveFollowUps: 409,
    MalformedGraphFile: 422,
    UnknownRelationKind: 422,
    DanglingEndpoint: 422,
    DuplicateRelation: 422,
    DuplicateConcept: 422,
    InvalidRelation: 422,
    CorruptSnapshot: 500,
    ProviderUnavailable: 502,
    ProviderRefusal: 502,
}


def status_for(error: CauseQuestError) -> int:
    for cls in type(error).__mro__:
        if cls in _STATUS:
            return _STATUS[cls]
    return 500


@dataclass
class ServiceConfig:
    data_dir: Path
    host: str = "127.0.0.1"
    port: int = 8000
    excerpt_budget: int = DEFAULT_EXCERPT_BUDGET
    mock_script: Path | None = None
    ui_dir: Path | None = None
    gateway_config: GatewayConfig = field(default_factory=GatewayConfig.from_env)

    def __post_init__(self):
        self.data_dir = Path(self.data_dir)
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port out of range: {self.port}")
        self.data_dir.mkdir(parents=True, exist_ok=True)
        probe = self.data_dir / ".writable"
        probe.write_text("ok", encoding="utf-8")
        probe.unlink()


# --- wire models ----------------------------------------------------------------

class Problem(BaseModel):
    code: str
    message: str
    detail: str | None = None


class NavigationEntry(BaseModel):
    anchor: str
    level: int
    heading: str


class DocumentCreated(BaseModel):
    documentId: str
    navigation: list[NavigationEntry]


class SectionOut(BaseModel):
    anchor: str
    level: int
    heading: str
    body: str
    children: list["SectionOut"] = Field(default_factory=list)


class DocumentOut(BaseModel):
    id: str
    title: str
    authors: list[str]
    published: str | None = None
    sections: list[SectionOut]
    navigation: list[NavigationEntry]


class ConceptOut(BaseModel):
    id: str
    label: str
    definition: str
    salience: float = 0.0


class RelationOut(BaseModel):
    from_: str = Field(alias="from")
    to: str
    kind: str
    note: str | None = None

    model_config = {"populate_by_name": True}


class GraphOut(BaseModel):
    documentId: str | None = None
    version: int
    curatedBy: str | None = None
    concepts: list[ConceptOut]
    relations: list[RelationOut]


class SessionCreateIn(BaseModel):
    documentId: str


class SessionCreated(BaseModel):
    sessionId: str


class QueryIn(BaseModel):
    text: str | None = None
    provenance: Literal["Typed", "ClickedFollowUp", "ModifiedFollowUp"] = "Typed"
    slot: int | None = None


class FollowUpOut(BaseModel):
    text: str
    cause: str
    origin: str


class TreeNodeOut(BaseModel):
    turnIndex: int
    text: str
    cause: str | None = None
    children: list["TreeNodeOut"] = Field(default_factory=list)


class QueryResult(BaseModel):
    answer: str
    followUps: list[FollowUpOut]
    tree: list[TreeNodeOut]


class TurnOut(BaseModel):
    index: int
    role: str
    text: str
    provenance: str
    cause: str | None = None
    classifiedDimension: str | None = None
    strategy: str | None = None
    originalSuggestion: str | None = None


class FollowUpSetOut(BaseModel):
    retryCount: int
    questions: list[FollowUpOut]


class SessionOut(BaseModel):
    schemaVersion: int
    id: str
    documentId: str
    createdAt: str
    updatedAt: str
    turns: list[TurnOut]
    forest: list[TreeNodeOut]
    activeFollowUps: FollowUpSetOut | None = None


class MetricsOut(BaseModel):
    userQueryCount: int
    dialogueTurns: int
    distinctDimensions: int
    distinctStrategies: int
    followUpClickRate: float
    treeCount: int
    maxTreeDepth: int


class ExcerptOut(BaseModel):
    documentId: str
    anchor: str
    text: str
    charOffset: int


def _nodes_out(forest: list[TreeNode]) -> list[dict]:
    def node(n: TreeNode) -> dict:
        return {
            "turnIndex": n.turn_index,
            "text": n.text,
            "cause": n.cause.value if n.cause else None,
            "children": [node(c) for c in n.children],
        }

    return [node(n) for n in forest]


_PROBLEM_RESPONSES: dict = {
    400: {"model": Problem},
    404: {"model": Problem},
    409: {"model": Problem},
    422: {"model": Problem},
    502: {"model": Problem},
}


def build_gateway(config: ServiceConfig) -> Gateway:
    if config.mock_script is not None:
        return MockGateway(load_script(config.mock_script), retries=config.gateway_config.retries)
    return HttpGateway(config.gateway_config)


class GraphStore:
    """Curated graphs keyed by document id; a reload replaces atomically."""

    def __init__(self, data_dir: Path):
        self._dir = data_dir / "graphs"
        self._dir.mkdir(parents=True, exist_ok=True)
        self._graphs: dict[str, ConceptGraph] = {}
        for path in sorted(self._dir.glob("*.json")):
            self._graphs[path.stem] = load_curated_graph(path, document_id=path.stem)

    def get(self, document_id: str) -> ConceptGraph:
        graph = self._graphs.get(document_id)
        if graph is None:
            raise GraphNotFound(f"no curated graph for document {document_id!r}")
        return graph

    def put(self, document_id: str, data: dict) -> ConceptGraph:
        graph = load_curated_graph(data, document_id=document_id)
        path = self._dir / f"{document_id}.json"
        tmp = path.with_name(path.name + ".tmp")
        import json as _json

        tmp.write_text(_json.dumps(graph_to_dict(graph), ensure_ascii=False, indent=2), encoding="utf-8")
        tmp.replace(path)
        self._graphs[document_id] = graph
        return graph


def create_app(config: ServiceConfig, gateway: Gateway | None = None) -> FastAPI:
    gateway = gateway or build_gateway(config)
    store = ContentStore(config.data_dir / "documents")
    graphs = GraphStore(config.data_dir)
    manager = SessionManager(store, gateway, data_dir=config.data_dir, excerpt_budget=config.excerpt_budget)

    app = FastAPI(title="causequest", version="0.1.0", description=__doc__)
    app.state.store = store
    app.state.graphs = graphs
    app.state.manager = manager
    app.state.gateway = gateway

    @app.exception_handler(CauseQuestError)
    async def handle_package_error(_request: Request, error: CauseQuestError):
        body = {"code": error.code, "message": error.message}
        if error.detail is not None:
            body["detail"] = error.detail
        return JSONResponse(status_code=status_for(error), content=body)

    @app.exception_handler(RequestValidationError)
    async def handle_validation_error(_request: Request, error: RequestValidationError):
        return JSONResponse(
            status_code=422,
            content={"code": "ValidationError", "message": "request body or parameters failed validation", "detail": str(error.errors())},
        )

    @app.post("/documents", status_code=201, response_model=DocumentCreated, responses=_PROBLEM_RESPONSES)
    async def upload_document(request: Request):
        raw = (await request.body()).decode("utf-8")
        doc = store.ingest(raw)
        nav = [NavigationEntry(anchor=a, level=l, heading=h) for a, l, h in navigation_index(doc)]
        return DocumentCreated(documentId=doc.id, navigation=nav)

    @app.get("/documents/{document_id}", response_model=DocumentOut, responses=_PROBLEM_RESPONSES)
    def get_document(document_id: str):
        doc = store.get(document_id)
        nav = [NavigationEntry(anchor=a, level=l, heading=h) for a, l, h in navigation_index(doc)]
        return DocumentOut(**document_to_dict(doc), navigation=nav)

    @app.get("/documents/{document_id}/graph", response_model=GraphOut, responses=_PROBLEM_RESPONSES)
    def get_graph(document_id: str):
        store.get(document_id)
        graph = graphs.get(document_id)
        data = graph_to_dict(graph)
        data.setdefault("documentId", document_id)
        return GraphOut.model_validate(data)

    @app.put("/documents/{document_id}/graph", status_code=204, response_class=Response, responses=_PROBLEM_RESPONSES)
    async def put_graph(document_id: str, request: Request):
        store.get(document_id)
        try:
            data = await request.json()
        except ValueError as exc:
            raise MalformedGraphFile(f"body is not valid JSON: {exc}") from exc
        graphs.put(document_id, data)
        return Response(status_code=204)

    @app.post("/sessions", status_code=201, response_model=SessionCreated, responses=_PROBLEM_RESPONSES)
    def create_session(body: SessionCreateIn):
        session = manager.create_session(body.documentId)
        return SessionCreated(sessionId=session.id)

    @app.get("/sessions/{session_id}", response_model=SessionOut, responses=_PROBLEM_RESPONSES)
    def get_session(session_id: str):
        session = manager.get_session(session_id)
        return SessionOut.model_validate(session_to_dict(session))

    @app.post("/sessions/{session_id}/query", response_model=QueryResult, responses=_PROBLEM_RESPONSES)
    def post_query(session_id: str, body: QueryIn):
        result = manager.submit_query(
            session_id, text=body.text, provenance=Provenance(body.provenance), slot=body.slot
        )
        return QueryResult(
            answer=result.assistant_turn.text,
            followUps=[
                FollowUpOut(text=q.text, cause=q.cause.value, origin=q.origin.value)
                for q in result.followups.questions
            ],
            tree=[TreeNodeOut.model_validate(n) for n in _nodes_out(result.forest)],
        )

    @app.get("/sessions/{session_id}/tree", response_model=list[TreeNodeOut], responses=_PROBLEM_RESPONSES)
    def get_tree(session_id: str):
        session = manager.get_session(session_id)
        return [TreeNodeOut.model_validate(n) for n in _nodes_out(session.forest)]

    @app.get("/sessions/{session_id}/metrics", response_model=MetricsOut, responses=_PROBLEM_RESPONSES)
    def get_metrics(session_id: str):
        session = manager.get_session(session_id)
        return MetricsOut.model_validate(metrics_to_dict(compute_metrics(session)))

    @app.get("/sessions/{session_id}/locate", response_model=list[ExcerptOut], responses=_PROBLEM_RESPONSES)
    def locate_quote(session_id: str, quote: str):
        session = manager.get_session(session_id)
        doc = store.get(session.document_id)
        return [
            ExcerptOut(documentId=e.document_id, anchor=e.anchor, text=e.text, charOffset=e.char_offset)
            for e in locate(doc, quote)
        ]

    ui_dir = config.ui_dir or Path(__file__).resolve().parents[2] / "frontend" / "dist"
    if ui_dir.is_dir():
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
