"""Concept graph over a document: key concepts plus four curated relation kinds.

The pipeline is semi-automated on purpose. Keyword extraction and glossary
proposal only bootstrap a draft file; a human-curated JSON file is the source
of truth for concepts and relations. Loaded graphs are immutable; a reload
replaces the whole object.

Curated file schema::

    {
      "documentId": "...",            # optional, the store keys by document
      "version": 1,
      "curatedBy": "initials",        # optional
      "concepts": [{"id", "label", "definition", "salience"?}],
      "relations": [{"from", "to", "kind", "note"?}]
    }

``kind`` must be exactly one of FoundationalPrerequisite, DefiningTrait,
IllustrativeExample, Influence.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

from .content import Document, slugify
from .errors import (
    DanglingEndpoint,
    DuplicateConcept,
    DuplicateRelation,
    InvalidRelation,
    MalformedGraphFile,
    UnknownRelationKind,
)
from .gateway import ChatRequest, Gateway

_TOKEN_RE = re.compile(r"[a-z0-9]+(?:[-'][a-z0-9]+)*")
_GLOSSARY_LINE_RE = re.compile(r"^\s*(?:[-*]\s*)?(?:\d+[.)]\s*)?([^:]+?)\s*:\s*(.+?)\s*$")


class RelationKind(Enum):
    FOUNDATIONAL_PREREQUISITE = "FoundationalPrerequisite"
    DEFINING_TRAIT = "DefiningTrait"
    ILLUSTRATIVE_EXAMPLE = "IllustrativeExample"
    INFLUENCE = "Influence"


@dataclass
class Concept:
    id: str
    label: str
    definition: str
    salience: float = 0.0


@dataclass
class ConceptRelation:
    from_id: str
    to_id: str
    kind: RelationKind
    note: str | None = None


@dataclass
class ConceptGraph:
    document_id: str | None
    concepts: list[Concept]
    relations: list[ConceptRelation]
    curated_by: str | None = None
    version: int = 1


@dataclass
class GlossaryProposal:
    """Concepts parsed from a provider reply plus per-line warnings."""

    concepts: list[Concept] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)


def load_stopwords() -> frozenset[str]:
    text = resources.files("causequest.data").joinpath("stopwords.txt").read_text(encoding="utf-8")
    words = {line.strip() for line in text.splitlines() if line.strip() and not line.startswith("#")}
    return frozenset(words)


_STOPWORDS = load_stopwords()


def extract_keywords(doc: Document, k: int) -> list[tuple[str, float]]:
    """Top-k body terms by frequency, salience = count / max count.

    Lowercased, stop words removed, terms shorter than 3 characters dropped.
    Ties break lexicographically; k beyond the vocabulary returns everything.
    """
    counts: Counter[str] = Counter()
    for section in doc.walk():
        for token in _TOKEN_RE.findall(section.body.lower()):
            if len(token) >= 3 and token not in _STOPWORDS:
                counts[token] += 1
    if not counts:
        return []
    peak = max(counts.values())
    ranked = sorted(counts.items(), key=lambda item: (-item[1], item[0]))
    return [(term, count / peak) for term, count in ranked[:k]]


GLOSSARY_PROMPT = (
    "For each term below, write exactly one line in the form 'term: definition', "
    "where the definition is a single sentence grounded in the learning material. "
    "Do not add any other text.\n\nTerms: {terms}"
)


def propose_glossary(doc: Document, keywords: list[str], gateway: Gateway) -> GlossaryProposal:
    """Ask the provider for one-sentence definitions of the given keywords.

    Lines that do not parse, define an unrequested term, or repeat a term are
    dropped and recorded as warnings. Transport errors propagate.
    """
    if not keywords:
        raise ValueError("keywords must be nonempty")
    wanted = {kw.lower(): kw for kw in keywords}
    request = ChatRequest(
        system_prompt=f"You are compiling a glossary for the document titled {doc.title!r}.",
        messages=(("user", GLOSSARY_PROMPT.format(terms=", ".join(keywords))),),
        max_tokens=1024,
        temperature=0.3,
    )
    reply = gateway.complete(request)
    proposal = GlossaryProposal()
    seen: set[str] = set()
    for line in reply.text.splitlines():
        if not line.strip():
            continue
        m = _GLOSSARY_LINE_RE.match(line)
        if m is None:
            proposal.warnings.append(f"unparseable glossary line: {line.strip()!r}")
            continue
        term, definition = m.group(1).strip(), m.group(2).strip()
        key = term.lower()
        if key not in wanted:
            proposal.warnings.append(f"definition for unrequested term {term!r} dropped")
            continue
        if key in seen:
            proposal.warnings.append(f"duplicate definition for {term!r} dropped")
            continue
        seen.add(key)
        proposal.concepts.append(Concept(id=slugify(term), label=wanted[key], definition=definition))
    return proposal


def _parse_graph_dict(data: dict, document_id: str | None) -> ConceptGraph:
    if not isinstance(data, dict):
        raise MalformedGraphFile("graph file must be a JSON object")
    raw_concepts = data.get("concepts")
    raw_relations = data.get("relations", [])
    if not isinstance(raw_concepts, list) or not isinstance(raw_relations, list):
        raise MalformedGraphFile("graph file needs 'concepts' and 'relations' arrays")

    concepts: list[Concept] = []
    ids: set[str] = set()
    for entry in raw_concepts:
        try:
            concept = Concept(
                id=str(entry["id"]),
                label=str(entry["label"]),
                definition=str(entry.get("definition", "")),
                salience=float(entry.get("salience", 0.0)),
            )
        except (TypeError, KeyError) as exc:
            raise MalformedGraphFile(f"bad concept entry: {entry!r}") from exc
        if not concept.id or not concept.label:
            raise MalformedGraphFile(f"concept id and label must be nonempty: {entry!r}")
        if not 0.0 <= concept.salience <= 1.0:
            raise MalformedGraphFile(f"salience out of [0,1] for {concept.id!r}")
        if concept.id in ids:
            raise DuplicateConcept(f"concept id {concept.id!r} declared twice")
        ids.add(concept.id)
        concepts.append(concept)

    relations: list[ConceptRelation] = []
    triples: set[tuple[str, str, str]] = set()
    for entry in raw_relations:
        try:
            from_id, to_id, kind_name = str(entry["from"]), str(entry["to"]), str(entry["kind"])
        except (TypeError, KeyError) as exc:
            raise MalformedGraphFile(f"bad relation entry: {entry!r}") from exc
        try:
            kind = RelationKind(kind_name)
        except ValueError:
            raise UnknownRelationKind(f"unknown relation kind {kind_name!r}") from None
        if from_id == to_id:
            raise InvalidRelation(f"relation may not point at itself: {from_id!r}")
        if from_id not in ids:
            raise DanglingEndpoint(f"relation endpoint {from_id!r} is not a declared concept")
        if to_id not in ids:
            raise DanglingEndpoint(f"relation endpoint {to_id!r} is not a declared concept")
        triple = (from_id, to_id, kind.value)
        if triple in triples:
            raise DuplicateRelation(f"relation {triple!r} declared twice")
        triples.add(triple)
        note = entry.get("note")
        relations.append(ConceptRelation(from_id=from_id, to_id=to_id, kind=kind, note=str(note) if note is not None else None))

    version = data.get("version", 1)
    if not isinstance(version, int):
        raise MalformedGraphFile("version must be an integer")
    return ConceptGraph(
        document_id=document_id or data.get("documentId"),
        concepts=concepts,
        relations=relations,
        curated_by=data.get("curatedBy"),
        version=version,
    )


def load_curated_graph(source: str | Path | dict, document_id: str | None = None) -> ConceptGraph:
    """Load and validate a curated graph from a path, JSON text, or dict."""
    if isinstance(source, dict):
        return _parse_graph_dict(source, document_id)
    if isinstance(source, Path):
        text = source.read_text(encoding="utf-8")
    else:
        text = source
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedGraphFile(f"graph file is not valid JSON: {exc}") from exc
    return _parse_graph_dict(data, document_id)


def graph_to_dict(graph: ConceptGraph) -> dict:
    data: dict = {
        "version": graph.version,
        "concepts": [
            {"id": c.id, "label": c.label, "definition": c.definition, "salience": c.salience}
            for c in graph.concepts
        ],
        "relations": [
            {"from": r.from_id, "to": r.to_id, "kind": r.kind.value}
            | ({"note": r.note} if r.note is not None else {})
            for r in graph.relations
        ],
    }
    if graph.document_id is not None:
        data["documentId"] = graph.document_id
    if graph.curated_by is not None:
        data["curatedBy"] = graph.curated_by
    return data


def draft_graph(doc: Document, gateway: Gateway, k: int = 15) -> dict:
    """Bootstrap a draft curation file: extracted keywords + proposed glossary.

    Relations are left empty for the curator to fill in; the draft is not a
    valid deliverable until reviewed.
    """
    keywords = extract_keywords(doc, k)
    salience = dict(keywords)
    proposal = propose_glossary(doc, [term for term, _ in keywords], gateway)
    for concept in proposal.concepts:
        concept.salience = salience.get(concept.label.lower(), 0.0)
    draft = graph_to_dict(
        ConceptGraph(document_id=doc.id, concepts=proposal.concepts, relations=[], version=1)
    )
    if proposal.warnings:
        draft["draftWarnings"] = proposal.warnings
    return draft
