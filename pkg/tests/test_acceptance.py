"""Acceptance suite: one test per release criterion, one printed line each.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the PASS/FAIL lines.
Everything runs offline against the scripted gateway mock.
"""

import json
import random
import time
from contextlib import contextmanager

import pytest
from fastapi.testclient import TestClient

from causequest.analytics import compute_metrics
from causequest.concepts import RelationKind, graph_to_dict, load_curated_graph
from causequest.content import ContentStore
from causequest.errors import MalformedReply, NoActiveFollowUps, ProviderUnavailable
from causequest.gateway import (
    ChatReply,
    Gateway,
    Malformed,
    MockGateway,
    Reply,
    Timeout,
    TransportError,
)
from causequest.prompts import (
    PERSONA_CLAUSE,
    RESTRICTION_SENTENCE,
    FollowUpOrigin,
    FollowUpQuestion,
    FollowUpSet,
    generate_followups,
)
from causequest.service import ServiceConfig, create_app
from causequest.sessions import Provenance, SessionManager, session_from_dict, session_to_dict
from causequest.taxonomy import Cause, cause_of, classify_query

from regression_data import TAXONOMY_EXAMPLES
from test_concepts import fuzzed_graph_file


@contextmanager
def criterion(name: str):
    try:
        yield
    except BaseException:
        print(f"[acceptance] {name}: FAIL")
        raise
    print(f"[acceptance] {name}: PASS")


CAUSES = (Cause.MATERIAL, Cause.FORMAL, Cause.EFFICIENT, Cause.FINAL)
TAGS = ("MATERIAL", "FORMAL", "EFFICIENT", "FINAL")


def followup_lines(texts):
    return "\n".join(f"{i}. [{tag}] {text}" for i, (tag, text) in enumerate(zip(TAGS, texts), start=1))


def valid_reply(salt: str) -> str:
    return followup_lines(
        [
            f"What parts underlie {salt}?",
            f"What form does {salt} take?",
            f"How does {salt} come about?",
            f"Why does {salt} matter?",
        ]
    )


# --- criterion 1: taxonomy example regression ------------------------------------------

def test_taxonomy_regression_14_of_14():
    with criterion("taxonomy-regression"):
        started = time.perf_counter()
        for query, dimension, cause in TAXONOMY_EXAMPLES:
            result = classify_query(query)
            assert result is not None, f"unclassified: {query!r}"
            assert result.dimension is dimension, f"{query!r} -> {result.dimension}"
            assert cause_of(result.dimension) is cause
        elapsed = time.perf_counter() - started
        assert len(TAXONOMY_EXAMPLES) == 14
        assert elapsed < 1.0, f"taxonomy regression took {elapsed:.3f}s"


# --- criterion 2: follow-up contract over 200 scripted behaviors -----------------

def scripted_generation_cases(rng: random.Random, count: int):
    """Yield (script, expects_unavailable) pairs covering every behavior mix."""
    kinds = [
        "valid",
        "malformed-then-valid",
        "malformed-twice",
        "duplicate-cause",
        "timeout-then-valid",
        "transport-then-malformed",
        "transport-twice",
        "adversarial",
    ]
    for i in range(count):
        kind = kinds[i % len(kinds)]
        salt = f"case {i}"
        if kind == "valid":
            yield [Reply(valid_reply(salt))], False
        elif kind == "malformed-then-valid":
            yield [Malformed("no lines here"), Reply(valid_reply(salt))], False
        elif kind == "malformed-twice":
            yield [Malformed("junk"), Malformed("more junk")], False
        elif kind == "duplicate-cause":
            dup = valid_reply(salt).replace("[FORMAL]", "[MATERIAL]")
            yield [Malformed(dup), Reply(valid_reply(salt))], False
        elif kind == "timeout-then-valid":
            yield [Timeout(), Reply(valid_reply(salt))], False
        elif kind == "transport-then-malformed":
            yield [TransportError(), Malformed("garbage")], False
        elif kind == "transport-twice":
            yield [rng.choice([Timeout(), TransportError()]), rng.choice([Timeout(), TransportError()])], True
        else:
            tricks = [
                "1. [MATERIAL] only one line?",
                valid_reply(salt) + "\n5. [MATERIAL] an extra line?",
                valid_reply(salt).replace("?", "."),
                valid_reply(salt).replace("[FINAL]", "[CAUSAL]"),
                "1. [MATERIAL] same text?\n2. [FORMAL] same text?\n3. [EFFICIENT] same text?\n4. [FINAL] same text?",
            ]
            yield [Malformed(rng.choice(tricks)), Reply(valid_reply(salt))], False


def run_generation(script):
    gateway = MockGateway(script, retries=0)
    followups = generate_followups(
        gateway,
        system_prompt="sys",
        history=(("user", "Seed question?"), ("assistant", "Seed answer.")),
        last_question="Seed question?",
        last_answer="Seed answer.",
    )
    return gateway, followups


def test_followup_contract_over_200_scripted_behaviors():
    with criterion("follow-up-contract"):
        started = time.perf_counter()
        rng = random.Random(11)
        cases = list(scripted_generation_cases(rng, 200))
        behaviors_total = sum(len(script) for script, _ in cases)
        assert behaviors_total >= 200
        violations = 0
        for script, expects_unavailable in cases:
            if expects_unavailable:
                with pytest.raises(ProviderUnavailable):
                    run_generation(script)
                # Deterministic: the identical script fails identically.
                with pytest.raises(ProviderUnavailable):
                    run_generation(script)
                continue
            gateway, followups = run_generation(script)
            again = run_generation(script)[1]
            if not (
                len(followups.questions) == 4
                and {q.cause for q in followups.questions} == set(CAUSES)
                and len({q.text for q in followups.questions}) == 4
                and all(q.text.endswith("?") for q in followups.questions)
                and followups.retry_count <= 1
                and gateway.consumed <= 2
                and again == followups
            ):
                violations += 1
        assert violations == 0
        elapsed = time.perf_counter() - started
        assert elapsed < 5.0, f"follow-up contract suite took {elapsed:.3f}s"


def test_followup_contract_never_raises_malformed_reply():
    with criterion("follow-up-contract-no-malformed-escape"):
        for script in ([Malformed("x"), Malformed("y")], [Malformed("x"), Timeout()]):
            try:
                _, followups = run_generation(list(script))
            except MalformedReply:  # pragma: no cover - the contract under test
                pytest.fail("MalformedReply escaped generate_followups")
            assert all(q.origin is FollowUpOrigin.TEMPLATE_FALLBACK for q in followups.questions)


# --- criterion 3: grounding assertion over a 20-turn end-to-end session -----------

def test_grounding_clauses_on_all_answer_requests(tmp_path, nft_raw):
    with criterion("grounding-assertion"):
        script = []
        for i in range(20):
            script.append(Reply(f"Grounded answer {i}."))
            script.append(Reply(valid_reply(f"turn {i}")))
        gateway = MockGateway(script)
        app = create_app(ServiceConfig(data_dir=tmp_path / "data"), gateway=gateway)
        client = TestClient(app)
        client.post("/documents", content=nft_raw.encode("utf-8"))
        sid = client.post("/sessions", json={"documentId": "nft-basics"}).json()["sessionId"]

        rng = random.Random(5)
        for i in range(20):
            if i == 0 or rng.random() < 0.4:
                body = {"text": f"What is the meaning of topic {i}?", "provenance": "Typed"}
            else:
                body = {"provenance": "ClickedFollowUp", "slot": rng.randint(1, 4)}
            assert client.post(f"/sessions/{sid}/query", json=body).status_code == 200

        answer_requests = [e for e in gateway.capture_log() if e.request.request_id.startswith("ans-")]
        assert len(answer_requests) == 20
        excerpt_marker = "Minting is the act of writing a new token onto the ledger."
        for entry in answer_requests:
            prompt = entry.request.system_prompt
            assert PERSONA_CLAUSE in prompt
            assert RESTRICTION_SENTENCE in prompt
            assert excerpt_marker in prompt


# --- criterion 4: tree-forest property suite --------------------------------------

class CannedGateway(Gateway):
    provider_name = "canned"

    def _call_once(self, request):
        return ChatReply(text="Canned answer.", provider="canned", latency_ms=0, request_id=request.request_id)


def canned_followup_source_factory():
    counter = {"n": 0}

    def source(_gateway, _system_prompt, _history, last_question, _last_answer):
        counter["n"] += 1
        n = counter["n"]
        questions = tuple(
            FollowUpQuestion(text=f"Suggestion {n}-{i} about {last_question[:24]}?", cause=cause)
            for i, cause in enumerate(CAUSES)
        )
        return FollowUpSet(questions=questions)

    return source


def independent_forest_check(session):
    """Invariant oracle written against the snapshot shape, not tree_update."""
    nodes = []

    def walk(node, ancestors):
        assert node.turn_index not in ancestors, "cycle detected"
        nodes.append(node)
        for child in node.children:
            walk(child, ancestors | {node.turn_index})

    for root in session.forest:
        walk(root, set())

    user_turns = [t for t in session.turns if t.role == "user"]
    assert len(nodes) == len(user_turns)
    by_index = {t.index: t for t in user_turns}
    seen = set()
    for node in nodes:
        assert node.turn_index in by_index and node.turn_index not in seen
        seen.add(node.turn_index)
        assert node.text == by_index[node.turn_index].text
    root_set = {r.turn_index for r in session.forest}
    for turn in user_turns:
        if turn.provenance is Provenance.TYPED:
            assert turn.index in root_set, "typed turn must be a root"
        else:
            assert turn.index not in root_set, "suggestion turn must not be a root"


def test_tree_forest_property_suite(nft_raw):
    with criterion("tree-forest-properties"):
        started = time.perf_counter()
        store = ContentStore()
        store.ingest(nft_raw)
        rng = random.Random(42)
        sequences = 1000
        length = 20
        for _ in range(sequences):
            manager = SessionManager(
                store, CannedGateway(), followup_source=canned_followup_source_factory()
            )
            session = manager.create_session("nft-basics")
            for step in range(length):
                action = rng.choice(("typed", "click", "modify"))
                try:
                    if action == "typed":
                        manager.submit_query(session.id, text=f"What is topic {step}?")
                    elif action == "click":
                        manager.submit_query(
                            session.id, provenance=Provenance.CLICKED_FOLLOW_UP, slot=rng.randint(1, 4)
                        )
                    else:
                        manager.submit_query(
                            session.id,
                            text=f"Edited question {step}?",
                            provenance=Provenance.MODIFIED_FOLLOW_UP,
                            slot=rng.randint(1, 4),
                        )
                except NoActiveFollowUps:
                    pass  # click/modify before any suggestions exist; state must be unchanged
                independent_forest_check(session)
        elapsed = time.perf_counter() - started
        assert elapsed < 10.0, f"tree-forest suite took {elapsed:.3f}s"


# --- criterion 5: appendix fixture replay ------------------------------------------

def test_appendix_fixture_replay(fixtures_dir):
    with criterion("appendix-fixture-replay"):
        spec = json.loads((fixtures_dir / "followup-replay.json").read_text(encoding="utf-8"))
        for flow in spec["flows"]:
            store = ContentStore()
            store.ingest((fixtures_dir / flow["documentFile"]).read_text(encoding="utf-8"))
            script = []
            for answer, texts in zip(flow["answers"], flow["sets"]):
                script.append(Reply(answer))
                script.append(Reply(followup_lines(texts)))
            manager = SessionManager(store, MockGateway(script))
            session = manager.create_session(flow["documentId"])

            manager.submit_query(session.id, text=flow["seed"])
            manager.submit_query(session.id, provenance=Provenance.CLICKED_FOLLOW_UP, slot=1)
            manager.submit_query(session.id, provenance=Provenance.CLICKED_FOLLOW_UP, slot=1)

            assert len(session.forest) == 1
            root = session.forest[0]
            assert root.text == flow["seed"]
            assert len(root.children) == 1
            child = root.children[0]
            assert child.text == flow["sets"][0][0]
            assert len(child.children) == 1
            grandchild = child.children[0]
            assert grandchild.text == flow["sets"][1][0]
            assert grandchild.children == []
            # Transcript carries the same texts, bit-exact.
            user_texts = [t.text for t in session.turns if t.role == "user"]
            assert user_texts == [flow["seed"], flow["sets"][0][0], flow["sets"][1][0]]


# --- criterion 6: concept-graph validation over a fuzzed corpus ---------------------

def test_concept_graph_validation_corpus():
    with criterion("concept-graph-validation"):
        rng = random.Random(7)
        outcomes = {"valid": 0, "invalid": 0}
        for _ in range(50):
            text, flaw = fuzzed_graph_file(rng)
            if flaw is None:
                graph = load_curated_graph(text)
                assert load_curated_graph(graph_to_dict(graph)) == graph
                assert all(r.kind in RelationKind for r in graph.relations)
                outcomes["valid"] += 1
            else:
                with pytest.raises(flaw) as excinfo:
                    load_curated_graph(text)
                assert excinfo.value.code == flaw.code
                outcomes["invalid"] += 1
        assert outcomes["valid"] > 0 and outcomes["invalid"] > 0


# --- criterion 7: metrics oracle -----------------------------------------------------

def test_metrics_oracle_on_shipped_fixture(fixtures_dir):
    with criterion("metrics-oracle"):
        data = json.loads((fixtures_dir / "metrics-session.json").read_text(encoding="utf-8"))
        metrics = compute_metrics(session_from_dict(data))
        assert metrics.user_query_count == 7
        assert metrics.dialogue_turns == 7
        assert metrics.distinct_dimensions == 4
        assert metrics.distinct_strategies == 2
        assert metrics.followup_click_rate == 5 / 7
        assert metrics.tree_count == 2
        assert metrics.max_tree_depth == 4


# --- criterion 8: persistence crash-safety ---------------------------------------------

class SimulatedCrash(Exception):
    pass


def test_persistence_crash_safety(tmp_path, nft_raw):
    with criterion("persistence-crash-safety"):
        store = ContentStore()
        store.ingest(nft_raw)
        rng = random.Random(99)
        steps = ("mid-write", "before-rename", "after-rename")
        for trial in range(100):
            data_dir = tmp_path / f"trial-{trial}"
            manager = SessionManager(
                store, CannedGateway(), data_dir=data_dir, followup_source=canned_followup_source_factory()
            )
            session = manager.create_session("nft-basics")
            manager.submit_query(session.id, text=f"What is the meaning of trial {trial}?")
            before = session_to_dict(session)

            crash_step = rng.choice(steps)

            def crashing_persist(sess, _original=manager.persist, _step=crash_step):
                def hook(step):
                    if step == _step:
                        raise SimulatedCrash(step)

                _original(sess, _crash_hook=hook)

            manager.persist = crashing_persist
            with pytest.raises(SimulatedCrash):
                manager.submit_query(session.id, text=f"What is the outlook for trial {trial}?")
            after = session_to_dict(session)

            fresh = SessionManager(store, CannedGateway(), data_dir=data_dir)
            loaded = fresh.load_session(session.id)  # must never raise CorruptSnapshot
            loaded_dict = session_to_dict(loaded)
            if crash_step == "after-rename":
                assert loaded_dict == after
            else:
                assert loaded_dict == before


def test_crash_mid_write_never_corrupts_existing_snapshot(tmp_path, nft_raw):
    with criterion("persistence-crash-safety-negative-control"):
        store = ContentStore()
        store.ingest(nft_raw)
        data_dir = tmp_path / "control"
        manager = SessionManager(
            store, CannedGateway(), data_dir=data_dir, followup_source=canned_followup_source_factory()
        )
        session = manager.create_session("nft-basics")
        manager.submit_query(session.id, text="What is the meaning of control?")
        path = data_dir / "sessions" / f"{session.id}.json"
        snapshot_bytes = path.read_bytes()
        # A torn temp write must leave the published snapshot untouched.
        tmp = path.with_name(path.name + ".tmp")
        tmp.write_text('{"schemaVersion": 1, "id": "torn', encoding="utf-8")
        fresh = SessionManager(store, CannedGateway(), data_dir=data_dir)
        loaded = fresh.load_session(session.id)
        assert session_to_dict(loaded) == json.loads(snapshot_bytes)
        assert tmp.exists()  # the torn temp file is simply never read
