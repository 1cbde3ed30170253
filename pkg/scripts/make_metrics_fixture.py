"""Regenerate fixtures/metrics-session.json.

Replays a fixed 7-query session (2 typed, 5 clicked) through the real manager
against a scripted mock, pins the id and timestamps, and writes the snapshot.
Expected metrics, counted by hand from the action list below:

    userQueryCount 7, dialogueTurns 7, distinctDimensions 4
    (Attributes, Development, CoExistent, Significance),
    distinctStrategies 2 (SummarizeContent, ValidateHypothesis),
    followUpClickRate 5/7, treeCount 2, maxTreeDepth 4.
"""

import json
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parents[1]
sys.path.insert(0, str(ROOT / "src"))

from causequest.content import ContentStore
from causequest.gateway import MockGateway, Reply
from causequest.sessions import Provenance, SessionManager, session_to_dict

FIXTURES = ROOT / "fixtures"


def fq(slot1_tag: str, slot1_text: str, n: int) -> str:
    other_tags = [t for t in ("MATERIAL", "FORMAL", "EFFICIENT", "FINAL") if t != slot1_tag]
    return "\n".join(
        [
            f"1. [{slot1_tag}] {slot1_text}",
            f"2. [{other_tags[0]}] What else sits behind topic {n}?",
            f"3. [{other_tags[1]}] How does topic {n} unfold?",
            f"4. [{other_tags[2]}] Why does topic {n} matter at all?",
        ]
    )


SCRIPT = [
    Reply("Non-fungible means each record is unique and not interchangeable."),
    Reply(fq("EFFICIENT", "How was the first NFT created?", 1)),
    Reply("The first token experiments appeared as one-off ledger entries."),
    Reply(fq("FORMAL", "Can you explain what fungible means in one sentence?", 2)),
    Reply("Fungible means any unit can replace any other unit."),
    Reply(fq("FORMAL", "Is it correct that NFTs protect copyrights?", 3)),
    Reply("Owning a token does not by itself transfer copyright."),
    Reply(fq("MATERIAL", "What components give a token its identity?", 4)),
    Reply("Compared to cryptocurrencies, tokens are not interchangeable units."),
    Reply(fq("FINAL", "What is the importance of NFTs?", 5)),
    Reply("Supporters see importance in direct artist-to-audience sales."),
    Reply(fq("EFFICIENT", "What is the outlook for NFTs?", 6)),
    Reply("The outlook in the material is cautious: young markets move sharply."),
    Reply(fq("MATERIAL", "What records sit inside one entry?", 7)),
]

ACTIONS = [
    (Provenance.TYPED, "What is the meaning of non-fungible?"),
    (Provenance.CLICKED_FOLLOW_UP, None),
    (Provenance.CLICKED_FOLLOW_UP, None),
    (Provenance.CLICKED_FOLLOW_UP, None),
    (Provenance.TYPED, "What are the benefits of NFTs compared to cryptocurrencies?"),
    (Provenance.CLICKED_FOLLOW_UP, None),
    (Provenance.CLICKED_FOLLOW_UP, None),
]


def main():
    store = ContentStore()
    store.ingest((FIXTURES / "nft-basics.txt").read_text(encoding="utf-8"))
    manager = SessionManager(store, MockGateway(SCRIPT))
    session = manager.create_session("nft-basics")
    for provenance, text in ACTIONS:
        manager.submit_query(session.id, text=text, provenance=provenance, slot=1 if text is None else None)

    session.id = "sess-metrics-fixture"
    session.created_at = "2026-08-08T00:00:00+00:00"
    session.updated_at = "2026-08-08T00:10:00+00:00"
    out = FIXTURES / "metrics-session.json"
    out.write_text(json.dumps(session_to_dict(session), ensure_ascii=False, indent=2) + "\n", encoding="utf-8")
    print(f"wrote {out}")


if __name__ == "__main__":
    main()
