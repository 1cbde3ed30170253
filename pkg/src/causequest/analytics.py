"""Log-derived interactivity metrics per session.

Everything here is a pure function of a session snapshot, so it can run
concurrently with live sessions. Only log-observable quantities are reported:
reflective-mindedness and the quadrant interaction-pattern labels needed
interview data and are deliberately not computed. Queries the classifier
could not place count toward frequency but not toward dimension coverage.

The CSV report uses the fixed header below; rates are printed with six
decimal places.
"""

from __future__ import annotations

import io
from dataclasses import dataclass

from .sessions import Provenance, Session, TreeNode

CSV_HEADER = (
    "sessionId,documentId,userQueryCount,dialogueTurns,distinctDimensions,"
    "distinctStrategies,followUpClickRate,treeCount,maxTreeDepth"
)


@dataclass(frozen=True)
class InteractionMetrics:
    user_query_count: int
    dialogue_turns: int
    distinct_dimensions: int
    distinct_strategies: int
    followup_click_rate: float
    tree_count: int
    max_tree_depth: int


def _depth(node: TreeNode) -> int:
    if not node.children:
        return 1
    return 1 + max(_depth(child) for child in node.children)


def compute_metrics(session: Session) -> InteractionMetrics:
    """Count queries, answered pairs, coverage, click rate, and tree shape.

    A dialogue turn is one answered user query. The click rate counts only
    suggestions taken as-is (clicked, not modified) over all user queries,
    and is defined as 0 for an empty session.
    """
    users = [t for t in session.turns if t.role == "user"]
    answered = sum(1 for t in session.turns if t.role == "assistant")
    dimensions = {t.classified_dimension for t in users if t.classified_dimension is not None}
    strategies = {t.strategy for t in users if t.strategy is not None}
    clicked = sum(1 for t in users if t.provenance is Provenance.CLICKED_FOLLOW_UP)
    return InteractionMetrics(
        user_query_count=len(users),
        dialogue_turns=answered,
        distinct_dimensions=len(dimensions),
        distinct_strategies=len(strategies),
        followup_click_rate=clicked / len(users) if users else 0.0,
        tree_count=len(session.forest),
        max_tree_depth=max((_depth(root) for root in session.forest), default=0),
    )


def metrics_to_dict(metrics: InteractionMetrics) -> dict:
    return {
        "userQueryCount": metrics.user_query_count,
        "dialogueTurns": metrics.dialogue_turns,
        "distinctDimensions": metrics.distinct_dimensions,
        "distinctStrategies": metrics.distinct_strategies,
        "followUpClickRate": metrics.followup_click_rate,
        "treeCount": metrics.tree_count,
        "maxTreeDepth": metrics.max_tree_depth,
    }


def export_metrics(sessions: list[Session]) -> str:
    """One CSV row per session under the documented header."""
    out = io.StringIO()
    out.write(CSV_HEADER + "\n")
    for session in sessions:
        m = compute_metrics(session)
        out.write(
            f"{session.id},{session.document_id},{m.user_query_count},{m.dialogue_turns},"
            f"{m.distinct_dimensions},{m.distinct_strategies},{m.followup_click_rate:.6f},"
            f"{m.tree_count},{m.max_tree_depth}\n"
        )
    return out.getvalue()
