"""Query taxonomy: four causes, seven knowledge dimensions, five strategies.

``cause_of`` is the fixed total mapping from knowledge dimension to cause.
``classify_query`` and ``classify_strategy`` are deterministic rule-based
classifiers over the cue lexicon shipped in ``data/lexicon.json``; they exist
so metrics and regression tests run offline and reproducibly. When no cue
fires with enough confidence the classifier says so instead of guessing.

All functions here are pure over immutable lexicon data and thread-safe.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources

from .errors import EmptyQuery


class Cause(Enum):
    MATERIAL = "Material"
    FORMAL = "Formal"
    EFFICIENT = "Efficient"
    FINAL = "Final"


class KnowledgeDimension(Enum):
    COMPONENTS_OF_CONCEPTS = "ComponentsOfConcepts"
    ATTRIBUTES_OF_CONCEPTS = "AttributesOfConcepts"
    CO_EXISTENT_CONCEPTS = "CoExistentConcepts"
    REALISTIC_APPLICATION = "RealisticApplication"
    DEVELOPMENT_OF_CONCEPTS = "DevelopmentOfConcepts"
    SIGNIFICANCE_OF_CONCEPTS = "SignificanceOfConcepts"
    REAL_WORLD_CONSEQUENCES = "RealWorldConsequences"


class ConversationStrategy(Enum):
    CHANGE_PERSPECTIVES = "ChangePerspectives"
    REPHRASE_REQUESTS = "RephraseRequests"
    VALIDATE_HYPOTHESIS = "ValidateHypothesis"
    ASSESS_ACCURACY = "AssessAccuracy"
    SUMMARIZE_CONTENT = "SummarizeContent"


# Dimension -> cause, total by construction. Material covers what a concept is
# made of; Formal covers its essence and what sits beside it; Efficient covers
# what brings it about or applies it; Final covers what it is for.
CAUSE_OF: dict[KnowledgeDimension, Cause] = {
    KnowledgeDimension.COMPONENTS_OF_CONCEPTS: Cause.MATERIAL,
    KnowledgeDimension.ATTRIBUTES_OF_CONCEPTS: Cause.FORMAL,
    KnowledgeDimension.CO_EXISTENT_CONCEPTS: Cause.FORMAL,
    KnowledgeDimension.REALISTIC_APPLICATION: Cause.EFFICIENT,
    KnowledgeDimension.DEVELOPMENT_OF_CONCEPTS: Cause.EFFICIENT,
    KnowledgeDimension.SIGNIFICANCE_OF_CONCEPTS: Cause.FINAL,
    KnowledgeDimension.REAL_WORLD_CONSEQUENCES: Cause.FINAL,
}


def cause_of(dimension: KnowledgeDimension) -> Cause:
    return CAUSE_OF[dimension]


@dataclass(frozen=True)
class QueryClassification:
    dimension: KnowledgeDimension
    confidence: float


@dataclass(frozen=True)
class _DimensionCue:
    regex: re.Pattern
    weight: int
    dimension: KnowledgeDimension


@dataclass(frozen=True)
class _StrategyCue:
    regex: re.Pattern
    strategy: ConversationStrategy
    followup_only: bool


@dataclass(frozen=True)
class _Lexicon:
    max_weight: int
    dimension_cues: tuple[_DimensionCue, ...]
    strategy_cues: tuple[_StrategyCue, ...]


@lru_cache(maxsize=1)
def _lexicon() -> _Lexicon:
    raw = json.loads(resources.files("causequest.data").joinpath("lexicon.json").read_text(encoding="utf-8"))
    dims = tuple(
        _DimensionCue(
            regex=re.compile(entry["pattern"]),
            weight=int(entry["weight"]),
            dimension=KnowledgeDimension(entry["dimension"]),
        )
        for entry in raw["dimensions"]
    )
    strats = tuple(
        _StrategyCue(
            regex=re.compile(entry["pattern"]),
            strategy=ConversationStrategy(entry["strategy"]),
            followup_only=bool(entry["followUpOnly"]),
        )
        for entry in raw["strategies"]
    )
    return _Lexicon(max_weight=int(raw["maxWeight"]), dimension_cues=dims, strategy_cues=strats)


_TERMINAL_PUNCT = ".?!…"


def _normalize(text: str) -> str:
    collapsed = " ".join(text.lower().split())
    return collapsed.rstrip(_TERMINAL_PUNCT + " ")


CONFIDENCE_THRESHOLD = 0.5


def classify_query(text: str) -> QueryClassification | None:
    """Classify a learner query into a knowledge dimension.

    Returns None (unclassified) when no cue fires or the best cue's confidence
    falls below the 0.5 threshold; never fabricates a low-confidence label.
    The result is invariant under surrounding whitespace and terminal
    punctuation. The highest-weight matching cue wins; ties go to the cue
    that appears first in the lexicon file.
    """
    if not text or not text.strip():
        raise EmptyQuery("query text is empty")
    normalized = _normalize(text)
    lex = _lexicon()
    best: _DimensionCue | None = None
    for cue in lex.dimension_cues:
        if cue.regex.search(normalized) and (best is None or cue.weight > best.weight):
            best = cue
    if best is None:
        return None
    confidence = best.weight / lex.max_weight
    if confidence < CONFIDENCE_THRESHOLD:
        return None
    return QueryClassification(dimension=best.dimension, confidence=confidence)


def classify_strategy(text: str, prev_text: str | None = None) -> ConversationStrategy | None:
    """Detect the conversation strategy of a query, if any cue fires.

    Cues marked follow-up-only in the lexicon need a preceding turn and stay
    silent without one. First matching cue in file order wins.
    """
    if not text or not text.strip():
        return None
    normalized = _normalize(text)
    has_prev = bool(prev_text and prev_text.strip())
    for cue in _lexicon().strategy_cues:
        if cue.followup_only and not has_prev:
            continue
        if cue.regex.search(normalized):
            return cue.strategy
    return None
