"""Dialogue state: turns, active follow-up set, query-tree forest, snapshots.

Tree rule: a free-typed query always starts a new tree; a clicked or modified
suggestion always extends the current path, attaching under the most recent
node. Forest node count therefore equals the number of user turns at all
times, with roots corresponding to typed turns and non-roots to suggestion
turns.

Snapshots are JSON, one file per session, written with a temp-file-then-rename
so a crash between writes never leaves a corrupt file behind. Within a session
operations are single-writer: a second submit while one is pending is rejected
with GenerationPending, never queued.
"""

from __future__ import annotations

import json
import os
import threading
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Callable
from uuid import uuid4

from .content import ContentStore
from .errors import (
    CorruptSnapshot,
    EmptyQuery,
    EmptySlotText,
    GenerationPending,
    InvalidSlot,
    NoActiveFollowUps,
    ProviderUnavailable,
    SessionNotFound,
)
from .gateway import ANSWER_TEMPERATURE, ChatRequest, Gateway, new_request_id
from .prompts import (
    DEFAULT_EXCERPT_BUDGET,
    FollowUpOrigin,
    FollowUpQuestion,
    FollowUpSet,
    build_system_prompt,
    fallback_followups,
    generate_followups,
)
from .taxonomy import Cause, ConversationStrategy, KnowledgeDimension, classify_query, classify_strategy

SCHEMA_VERSION = 1


class Provenance(Enum):
    TYPED = "Typed"
    CLICKED_FOLLOW_UP = "ClickedFollowUp"
    MODIFIED_FOLLOW_UP = "ModifiedFollowUp"
    GENERATED = "Generated"


USER_PROVENANCES = {Provenance.TYPED, Provenance.CLICKED_FOLLOW_UP, Provenance.MODIFIED_FOLLOW_UP}


@dataclass
class Turn:
    index: int
    role: str  # "user" | "assistant"
    text: str
    provenance: Provenance
    cause: Cause | None = None
    classified_dimension: KnowledgeDimension | None = None
    strategy: ConversationStrategy | None = None
    original_suggestion: str | None = None


@dataclass
class TreeNode:
    turn_index: int
    text: str
    cause: Cause | None = None
    children: list["TreeNode"] = field(default_factory=list)


@dataclass
class Session:
    id: str
    document_id: str
    turns: list[Turn] = field(default_factory=list)
    forest: list[TreeNode] = field(default_factory=list)
    active_followups: FollowUpSet | None = None
    created_at: str = ""
    updated_at: str = ""

    def user_turns(self) -> list[Turn]:
        return [t for t in self.turns if t.role == "user"]

    def last_turn(self) -> Turn | None:
        return self.turns[-1] if self.turns else None


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def walk_forest(forest: list[TreeNode]):
    stack = list(reversed(forest))
    while stack:
        node = stack.pop()
        yield node
        stack.extend(reversed(node.children))


def tree_update(forest: list[TreeNode], user_turn: Turn) -> list[TreeNode]:
    """Apply the topic-change rule for one user turn and return the forest.

    Typed provenance appends a new root tree; clicked or modified provenance
    appends a child under the most recently added node (the active path tip).
    """
    node = TreeNode(turn_index=user_turn.index, text=user_turn.text, cause=user_turn.cause)
    if user_turn.provenance is Provenance.TYPED:
        forest.append(node)
        return forest
    tip = None
    for existing in walk_forest(forest):
        if tip is None or existing.turn_index > tip.turn_index:
            tip = existing
    if tip is None:
        raise NoActiveFollowUps("a suggestion turn needs an existing tree to extend")
    tip.children.append(node)
    return forest


@dataclass
class StagedQuery:
    text: str
    provenance: Provenance
    cause: Cause | None
    original_suggestion: str | None


@dataclass
class SubmitResult:
    user_turn: Turn
    assistant_turn: Turn
    followups: FollowUpSet
    forest: list[TreeNode]


FollowupSource = Callable[[Gateway, str, tuple, str, str], FollowUpSet]


class SessionManager:
    """Owns sessions end to end: orchestration, tree updates, persistence."""

    def __init__(
        self,
        store: ContentStore,
        gateway: Gateway,
        data_dir: Path | None = None,
        excerpt_budget: int = DEFAULT_EXCERPT_BUDGET,
        followup_source: FollowupSource | None = None,
    ):
        self._store = store
        self._gateway = gateway
        self._dir = Path(data_dir) / "sessions" if data_dir is not None else None
        if self._dir is not None:
            self._dir.mkdir(parents=True, exist_ok=True)
        self._excerpt_budget = excerpt_budget
        self._followup_source = followup_source or generate_followups
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._prompt_cache: dict[str, str] = {}

    # -- session lifecycle ---------------------------------------------------

    def create_session(self, document_id: str) -> Session:
        self._store.get(document_id)  # raises DocumentNotFound
        session = Session(id=f"sess-{uuid4().hex[:12]}", document_id=document_id, created_at=_now(), updated_at=_now())
        with self._registry_lock:
            self._sessions[session.id] = session
        self.persist(session)
        return session

    def get_session(self, session_id: str) -> Session:
        with self._registry_lock:
            session = self._sessions.get(session_id)
        if session is not None:
            return session
        return self.load_session(session_id)

    def session_ids(self) -> list[str]:
        with self._registry_lock:
            known = set(self._sessions)
        if self._dir is not None:
            known.update(p.stem for p in self._dir.glob("*.json"))
        return sorted(known)

    def _lock_for(self, session_id: str) -> threading.Lock:
        with self._registry_lock:
            return self._locks.setdefault(session_id, threading.Lock())

    def _system_prompt(self, document_id: str) -> str:
        cached = self._prompt_cache.get(document_id)
        if cached is None:
            doc = self._store.get(document_id)
            cached = build_system_prompt(doc, excerpt_budget=self._excerpt_budget)
            self._prompt_cache[document_id] = cached
        return cached

    # -- query flow ------------------------------------------------------------

    def modify_followup(self, session: Session, slot: int, new_text: str) -> StagedQuery:
        """Stage a user edit of suggestion `slot`; the slot's cause is kept."""
        if session.active_followups is None:
            raise NoActiveFollowUps("no suggestions to modify")
        if not isinstance(slot, int) or not 1 <= slot <= 4:
            raise InvalidSlot(f"slot must be 1..4, got {slot!r}")
        if not new_text or not new_text.strip():
            raise EmptySlotText("modified suggestion text is empty")
        original = session.active_followups.slot(slot)
        return StagedQuery(
            text=new_text.strip(),
            provenance=Provenance.MODIFIED_FOLLOW_UP,
            cause=original.cause,
            original_suggestion=original.text,
        )

    def _stage(self, session: Session, text: str | None, provenance: Provenance, slot: int | None) -> StagedQuery:
        if provenance is Provenance.TYPED:
            if not text or not text.strip():
                raise EmptyQuery("typed query text is empty")
            return StagedQuery(text=text.strip(), provenance=provenance, cause=None, original_suggestion=None)
        if provenance is Provenance.CLICKED_FOLLOW_UP:
            if session.active_followups is None:
                raise NoActiveFollowUps("no suggestions to click")
            if not isinstance(slot, int) or not 1 <= slot <= 4:
                raise InvalidSlot(f"slot must be 1..4, got {slot!r}")
            chosen = session.active_followups.slot(slot)
            return StagedQuery(text=chosen.text, provenance=provenance, cause=chosen.cause, original_suggestion=None)
        if provenance is Provenance.MODIFIED_FOLLOW_UP:
            if slot is None:
                raise InvalidSlot("modified suggestion needs its slot")
            return self.modify_followup(session, slot, text or "")
        raise ValueError(f"not a user provenance: {provenance}")

    def submit_query(
        self,
        session_id: str,
        text: str | None = None,
        provenance: Provenance = Provenance.TYPED,
        slot: int | None = None,
    ) -> SubmitResult:
        """Run one full exchange: classify, answer, suggest, update, persist.

        Rejected with GenerationPending while another submit for the same
        session is in flight. If the answer call fails at transport level the
        user turn is rolled back and nothing is persisted.
        """
        lock = self._lock_for(session_id)
        if not lock.acquire(blocking=False):
            raise GenerationPending(f"a generation is already running for {session_id}")
        try:
            session = self.get_session(session_id)
            staged = self._stage(session, text, provenance, slot)

            prev_answer = session.turns[-1].text if session.turns else None
            classification = classify_query(staged.text)
            strategy = classify_strategy(staged.text, prev_text=prev_answer)

            system_prompt = self._system_prompt(session.document_id)
            history = tuple((t.role, t.text) for t in session.turns)
            answer_request = ChatRequest(
                system_prompt=system_prompt,
                messages=history + (("user", staged.text),),
                temperature=ANSWER_TEMPERATURE,
                request_id=new_request_id("ans"),
            )
            reply = self._gateway.complete(answer_request)  # rollback = no mutation yet

            user_turn = Turn(
                index=len(session.turns),
                role="user",
                text=staged.text,
                provenance=staged.provenance,
                cause=staged.cause,
                classified_dimension=classification.dimension if classification else None,
                strategy=strategy,
                original_suggestion=staged.original_suggestion,
            )
            assistant_turn = Turn(
                index=user_turn.index + 1,
                role="assistant",
                text=reply.text,
                provenance=Provenance.GENERATED,
            )
            try:
                followups = self._followup_source(
                    self._gateway,
                    system_prompt,
                    history + (("user", user_turn.text), ("assistant", assistant_turn.text)),
                    user_turn.text,
                    assistant_turn.text,
                )
            except ProviderUnavailable:
                # The answer already succeeded; degrade to templates rather
                # than losing the turn or showing zero suggestions.
                followups = fallback_followups(user_turn.text)

            session.turns.extend([user_turn, assistant_turn])
            tree_update(session.forest, user_turn)
            session.active_followups = followups
            session.updated_at = _now()
            self.persist(session)
            return SubmitResult(user_turn=user_turn, assistant_turn=assistant_turn, followups=followups, forest=session.forest)
        finally:
            lock.release()

    # -- persistence -----------------------------------------------------------

    def persist(self, session: Session, _crash_hook: Callable[[str], None] | None = None) -> None:
        """Write a complete snapshot atomically (write temp, fsync, rename).

        ``_crash_hook`` is a test injection point called between the steps
        named "mid-write", "before-rename" and "after-rename".
        """
        if self._dir is None:
            return
        path = self._dir / f"{session.id}.json"
        tmp = path.with_name(path.name + ".tmp")
        payload = json.dumps(session_to_dict(session), ensure_ascii=False, indent=2)
        half = len(payload) // 2
        with open(tmp, "w", encoding="utf-8") as fh:
            fh.write(payload[:half])
            if _crash_hook:
                _crash_hook("mid-write")
            fh.write(payload[half:])
            fh.flush()
            os.fsync(fh.fileno())
        if _crash_hook:
            _crash_hook("before-rename")
        os.replace(tmp, path)
        if _crash_hook:
            _crash_hook("after-rename")

    def load_session(self, session_id: str) -> Session:
        """Reconstruct a session from its snapshot or fail loudly."""
        if self._dir is None:
            raise SessionNotFound(f"no session {session_id!r}")
        path = self._dir / f"{session_id}.json"
        if not path.exists():
            raise SessionNotFound(f"no session {session_id!r}")
        try:
            data = json.loads(path.read_text(encoding="utf-8"))
        except (json.JSONDecodeError, OSError) as exc:
            raise CorruptSnapshot(f"snapshot for {session_id!r} unreadable: {exc}") from exc
        session = session_from_dict(data)
        validate_session(session)
        with self._registry_lock:
            self._sessions[session.id] = session
        return session


# --- invariants ------------------------------------------------------------

def validate_session(session: Session) -> None:
    """Check structural invariants; raise CorruptSnapshot on any violation."""
    for i, turn in enumerate(session.turns):
        expected_role = "user" if i % 2 == 0 else "assistant"
        if turn.role != expected_role or turn.index != i:
            raise CorruptSnapshot(f"turn sequence broken at index {i}")
        if turn.role == "user" and turn.provenance not in USER_PROVENANCES:
            raise CorruptSnapshot(f"user turn {i} has provenance {turn.provenance}")
        if turn.role == "assistant" and turn.provenance is not Provenance.GENERATED:
            raise CorruptSnapshot(f"assistant turn {i} has provenance {turn.provenance}")

    user_turns = {t.index: t for t in session.turns if t.role == "user"}
    nodes = list(walk_forest(session.forest))
    if len(nodes) != len(user_turns):
        raise CorruptSnapshot(f"forest has {len(nodes)} nodes for {len(user_turns)} user turns")
    seen: set[int] = set()
    for node in nodes:
        if node.turn_index in seen:
            raise CorruptSnapshot(f"turn {node.turn_index} appears twice in the forest")
        seen.add(node.turn_index)
        turn = user_turns.get(node.turn_index)
        if turn is None:
            raise CorruptSnapshot(f"forest node {node.turn_index} has no user turn")
    for root in session.forest:
        if user_turns[root.turn_index].provenance is not Provenance.TYPED:
            raise CorruptSnapshot(f"root {root.turn_index} is not a typed turn")
    root_indices = {r.turn_index for r in session.forest}
    for node in nodes:
        if node.turn_index not in root_indices:
            if user_turns[node.turn_index].provenance is Provenance.TYPED:
                raise CorruptSnapshot(f"typed turn {node.turn_index} is not a root")

    last = session.last_turn()
    if last is not None and last.role == "assistant":
        if session.active_followups is None:
            raise CorruptSnapshot("assistant turn without an active follow-up set")
    elif session.active_followups is not None:
        raise CorruptSnapshot("follow-up set present without a trailing assistant turn")


# --- snapshot serialization ---------------------------------------------------

def _turn_to_dict(turn: Turn) -> dict:
    return {
        "index": turn.index,
        "role": turn.role,
        "text": turn.text,
        "provenance": turn.provenance.value,
        "cause": turn.cause.value if turn.cause else None,
        "classifiedDimension": turn.classified_dimension.value if turn.classified_dimension else None,
        "strategy": turn.strategy.value if turn.strategy else None,
        "originalSuggestion": turn.original_suggestion,
    }


def _node_to_dict(node: TreeNode) -> dict:
    return {
        "turnIndex": node.turn_index,
        "text": node.text,
        "cause": node.cause.value if node.cause else None,
        "children": [_node_to_dict(c) for c in node.children],
    }


def _followups_to_dict(followups: FollowUpSet | None) -> dict | None:
    if followups is None:
        return None
    return {
        "retryCount": followups.retry_count,
        "questions": [
            {"text": q.text, "cause": q.cause.value, "origin": q.origin.value} for q in followups.questions
        ],
    }


def session_to_dict(session: Session) -> dict:
    return {
        "schemaVersion": SCHEMA_VERSION,
        "id": session.id,
        "documentId": session.document_id,
        "createdAt": session.created_at,
        "updatedAt": session.updated_at,
        "turns": [_turn_to_dict(t) for t in session.turns],
        "forest": [_node_to_dict(n) for n in session.forest],
        "activeFollowUps": _followups_to_dict(session.active_followups),
    }


def _turn_from_dict(data: dict) -> Turn:
    return Turn(
        index=data["index"],
        role=data["role"],
        text=data["text"],
        provenance=Provenance(data["provenance"]),
        cause=Cause(data["cause"]) if data.get("cause") else None,
        classified_dimension=KnowledgeDimension(data["classifiedDimension"]) if data.get("classifiedDimension") else None,
        strategy=ConversationStrategy(data["strategy"]) if data.get("strategy") else None,
        original_suggestion=data.get("originalSuggestion"),
    )


def _node_from_dict(data: dict) -> TreeNode:
    return TreeNode(
        turn_index=data["turnIndex"],
        text=data["text"],
        cause=Cause(data["cause"]) if data.get("cause") else None,
        children=[_node_from_dict(c) for c in data.get("children", [])],
    )


def _followups_from_dict(data: dict | None) -> FollowUpSet | None:
    if data is None:
        return None
    questions = tuple(
        FollowUpQuestion(text=q["text"], cause=Cause(q["cause"]), origin=FollowUpOrigin(q["origin"]))
        for q in data["questions"]
    )
    return FollowUpSet(questions=questions, retry_count=data.get("retryCount", 0))


def session_from_dict(data: dict) -> Session:
    try:
        if data.get("schemaVersion") != SCHEMA_VERSION:
            raise CorruptSnapshot(f"unsupported schemaVersion {data.get('schemaVersion')!r}")
        return Session(
            id=data["id"],
            document_id=data["documentId"],
            turns=[_turn_from_dict(t) for t in data["turns"]],
            forest=[_node_from_dict(n) for n in data["forest"]],
            active_followups=_followups_from_dict(data.get("activeFollowUps")),
            created_at=data.get("createdAt", ""),
            updated_at=data.get("updatedAt", ""),
        )
    except CorruptSnapshot:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise CorruptSnapshot(f"snapshot fields invalid: {exc}") from exc
