import json

import pytest

from causequest.content import ContentStore
from causequest.errors import (
    CorruptSnapshot,
    EmptyQuery,
    EmptySlotText,
    GenerationPending,
    InvalidSlot,
    NoActiveFollowUps,
    ProviderUnavailable,
    SessionNotFound,
)
from causequest.gateway import MockGateway, Reply, TransportError
from causequest.prompts import FollowUpOrigin
from causequest.sessions import (
    Provenance,
    SessionManager,
    session_from_dict,
    session_to_dict,
    tree_update,
    validate_session,
    walk_forest,
)
from causequest.taxonomy import Cause


def fq_reply(tag: int) -> str:
    return "\n".join(
        [
            f"1. [MATERIAL] What parts underlie topic {tag}?",
            f"2. [FORMAL] What form does topic {tag} take?",
            f"3. [EFFICIENT] How does topic {tag} come about?",
            f"4. [FINAL] Why does topic {tag} matter?",
        ]
    )


def exchange_script(n: int) -> list:
    script = []
    for i in range(n):
        script.append(Reply(f"Answer {i}."))
        script.append(Reply(fq_reply(i)))
    return script


@pytest.fixture()
def store(nft_raw):
    s = ContentStore()
    s.ingest(nft_raw)
    return s


def make_manager(store, script, data_dir=None, retries=0):
    gateway = MockGateway(script, retries=retries)
    return SessionManager(store, gateway, data_dir=data_dir), gateway


def test_first_typed_query_starts_tree(store):
    manager, _ = make_manager(store, exchange_script(1))
    session = manager.create_session("nft-basics")
    result = manager.submit_query(session.id, text="What is semiotics in concise summary?")
    assert len(result.forest) == 1
    assert result.forest[0].children == []
    assert len(result.followups.questions) == 4
    assert session.active_followups is result.followups
    assert session.turns[0].provenance is Provenance.TYPED
    assert session.turns[1].role == "assistant"


def test_click_extends_current_path_with_slot_cause(store):
    manager, _ = make_manager(store, exchange_script(2))
    session = manager.create_session("nft-basics")
    manager.submit_query(session.id, text="What is the meaning of non-fungible?")
    result = manager.submit_query(session.id, provenance=Provenance.CLICKED_FOLLOW_UP, slot=1)
    root = result.forest[0]
    assert len(result.forest) == 1
    assert [c.text for c in root.children] == ["What parts underlie topic 0?"]
    assert root.children[0].cause is Cause.MATERIAL
    assert session.turns[2].provenance is Provenance.CLICKED_FOLLOW_UP


def test_typed_after_click_starts_second_tree(store):
    manager, _ = make_manager(store, exchange_script(3))
    session = manager.create_session("nft-basics")
    manager.submit_query(session.id, text="What is the meaning of non-fungible?")
    manager.submit_query(session.id, provenance=Provenance.CLICKED_FOLLOW_UP, slot=2)
    result = manager.submit_query(session.id, text="How do NFTs influence society?")
    assert len(result.forest) == 2
    assert result.forest[1].children == []


def test_three_clicks_build_depth_four_chain(store):
    manager, _ = make_manager(store, exchange_script(4))
    session = manager.create_session("nft-basics")
    manager.submit_query(session.id, text="What is the meaning of non-fungible?")
    for _ in range(3):
        manager.submit_query(session.id, provenance=Provenance.CLICKED_FOLLOW_UP, slot=3)
    node, depth = session.forest[0], 1
    while node.children:
        node = node.children[0]
        depth += 1
    assert depth == 4


def test_modified_followup_keeps_slot_cause_and_original(store):
    manager, _ = make_manager(store, exchange_script(2))
    session = manager.create_session("nft-basics")
    result = manager.submit_query(session.id, text="What is the meaning of non-fungible?")
    original = result.followups.slot(2)
    out = manager.submit_query(
        session.id, text="What form does a LEDGER take?", provenance=Provenance.MODIFIED_FOLLOW_UP, slot=2
    )
    turn = out.user_turn
    assert turn.provenance is Provenance.MODIFIED_FOLLOW_UP
    assert turn.cause is original.cause
    assert turn.original_suggestion == original.text
    assert out.forest[0].children[0].text == "What form does a LEDGER take?"


def test_modify_rejects_empty_text(store):
    manager, _ = make_manager(store, exchange_script(1))
    session = manager.create_session("nft-basics")
    manager.submit_query(session.id, text="What is the meaning of non-fungible?")
    with pytest.raises(EmptySlotText):
        manager.submit_query(session.id, text="   ", provenance=Provenance.MODIFIED_FOLLOW_UP, slot=1)


def test_modify_without_suggestions_rejected(store):
    manager, _ = make_manager(store, [])
    session = manager.create_session("nft-basics")
    with pytest.raises(NoActiveFollowUps):
        manager.submit_query(session.id, text="Anything?", provenance=Provenance.MODIFIED_FOLLOW_UP, slot=1)


def test_click_without_suggestions_rejected(store):
    manager, _ = make_manager(store, [])
    session = manager.create_session("nft-basics")
    with pytest.raises(NoActiveFollowUps):
        manager.submit_query(session.id, provenance=Provenance.CLICKED_FOLLOW_UP, slot=1)


def test_bad_slot_rejected(store):
    manager, _ = make_manager(store, exchange_script(1))
    session = manager.create_session("nft-basics")
    manager.submit_query(session.id, text="What is the meaning of non-fungible?")
    with pytest.raises(InvalidSlot):
        manager.submit_query(session.id, provenance=Provenance.CLICKED_FOLLOW_UP, slot=7)


def test_blank_typed_query_rejected(store):
    manager, _ = make_manager(store, [])
    session = manager.create_session("nft-basics")
    with pytest.raises(EmptyQuery):
        manager.submit_query(session.id, text="  \n ")


def test_second_submit_while_pending_rejected(store):
    manager, _ = make_manager(store, exchange_script(1))
    session = manager.create_session("nft-basics")
    lock = manager._lock_for(session.id)
    assert lock.acquire(blocking=False)
    try:
        with pytest.raises(GenerationPending):
            manager.submit_query(session.id, text="What is the meaning of non-fungible?")
    finally:
        lock.release()
    manager.submit_query(session.id, text="What is the meaning of non-fungible?")


def test_failed_answer_rolls_back_user_turn(store, tmp_path):
    manager, _ = make_manager(store, [TransportError()], data_dir=tmp_path)
    session = manager.create_session("nft-basics")
    with pytest.raises(ProviderUnavailable):
        manager.submit_query(session.id, text="What is the meaning of non-fungible?")
    assert session.turns == []
    assert session.forest == []
    reloaded = manager.load_session(session.id)
    assert reloaded.turns == []


def test_followup_transport_double_failure_degrades_to_templates(store):
    manager, _ = make_manager(store, [Reply("Answer."), TransportError(), TransportError()])
    session = manager.create_session("nft-basics")
    result = manager.submit_query(session.id, text="What is the meaning of non-fungible?")
    assert all(q.origin is FollowUpOrigin.TEMPLATE_FALLBACK for q in result.followups.questions)
    assert session.turns[1].text == "Answer."


def test_persist_then_load_round_trips(store, tmp_path):
    manager, _ = make_manager(store, exchange_script(2), data_dir=tmp_path)
    session = manager.create_session("nft-basics")
    manager.submit_query(session.id, text="What is the meaning of non-fungible?")
    manager.submit_query(session.id, provenance=Provenance.CLICKED_FOLLOW_UP, slot=4)

    fresh = SessionManager(store, MockGateway([]), data_dir=tmp_path)
    loaded = fresh.load_session(session.id)
    assert loaded == session


def test_truncated_snapshot_is_corrupt(store, tmp_path):
    manager, _ = make_manager(store, exchange_script(1), data_dir=tmp_path)
    session = manager.create_session("nft-basics")
    manager.submit_query(session.id, text="What is the meaning of non-fungible?")
    path = tmp_path / "sessions" / f"{session.id}.json"
    path.write_text(path.read_text(encoding="utf-8")[:40], encoding="utf-8")

    fresh = SessionManager(store, MockGateway([]), data_dir=tmp_path)
    with pytest.raises(CorruptSnapshot):
        fresh.load_session(session.id)


def test_unknown_session_id(store, tmp_path):
    manager, _ = make_manager(store, [], data_dir=tmp_path)
    with pytest.raises(SessionNotFound):
        manager.load_session("sess-doesnotexist")


def test_snapshot_dict_round_trip(store):
    manager, _ = make_manager(store, exchange_script(3))
    session = manager.create_session("nft-basics")
    manager.submit_query(session.id, text="What is the meaning of non-fungible?")
    manager.submit_query(session.id, provenance=Provenance.CLICKED_FOLLOW_UP, slot=1)
    manager.submit_query(session.id, text="How was the first NFT created?", provenance=Provenance.TYPED)
    data = json.loads(json.dumps(session_to_dict(session)))
    assert session_from_dict(data) == session
    validate_session(session)


def test_validate_rejects_tampered_forest(store):
    manager, _ = make_manager(store, exchange_script(1))
    session = manager.create_session("nft-basics")
    manager.submit_query(session.id, text="What is the meaning of non-fungible?")
    session.forest.clear()
    with pytest.raises(CorruptSnapshot):
        validate_session(session)


def test_tree_update_requires_existing_tree_for_suggestions():
    from causequest.sessions import Turn

    turn = Turn(index=0, role="user", text="x?", provenance=Provenance.CLICKED_FOLLOW_UP)
    with pytest.raises(NoActiveFollowUps):
        tree_update([], turn)


def test_walk_forest_preorder(store):
    manager, _ = make_manager(store, exchange_script(4))
    session = manager.create_session("nft-basics")
    manager.submit_query(session.id, text="What is the meaning of non-fungible?")
    manager.submit_query(session.id, provenance=Provenance.CLICKED_FOLLOW_UP, slot=1)
    manager.submit_query(session.id, text="How was the first NFT created?")
    manager.submit_query(session.id, provenance=Provenance.CLICKED_FOLLOW_UP, slot=2)
    indices = [n.turn_index for n in walk_forest(session.forest)]
    assert indices == [0, 2, 4, 6]
