"""Learning-document ingestion, navigation index, and verbatim excerpt lookup.

Input format: a ``key: value`` metadata header (``title`` required, ``authors``
and ``published``/``date`` optional) terminated by a blank line, followed by a
markdown-style body where ``#`` depth gives the heading level. Documents are
immutable once ingested; the store is safe for concurrent reads.

Section anchors are slugs derived from headings: lowercase, non-alphanumeric
runs become ``-``, and collisions get ``-2``, ``-3``, ... suffixes. Image
lines are dropped from body text and replaced by their alt text.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DocumentNotFound, DuplicateDocument, EmptyBody, MalformedHeader, QuoteTooShort

_HEADING_RE = re.compile(r"^(#{1,6})\s+(.*\S)\s*$")
_HEADER_LINE_RE = re.compile(r"^([A-Za-z][\w-]*)\s*:\s*(.*)$")
_IMAGE_RE = re.compile(r"!\[([^\]]*)\]\([^)]*\)")
_SLUG_STRIP_RE = re.compile(r"[^a-z0-9]+")


@dataclass
class Section:
    anchor: str
    level: int
    heading: str
    body: str
    children: list["Section"] = field(default_factory=list)


@dataclass
class Document:
    id: str
    title: str
    authors: list[str]
    published: str | None
    sections: list[Section]

    def walk(self):
        """Yield sections depth-first in pre-order."""
        stack = list(reversed(self.sections))
        while stack:
            section = stack.pop()
            yield section
            stack.extend(reversed(section.children))

    def section(self, anchor: str) -> Section | None:
        for s in self.walk():
            if s.anchor == anchor:
                return s
        return None


@dataclass
class Excerpt:
    document_id: str
    anchor: str
    text: str
    char_offset: int


def slugify(text: str) -> str:
    slug = _SLUG_STRIP_RE.sub("-", text.lower()).strip("-")
    return slug or "section"


def normalize_ws(text: str) -> str:
    """Collapse whitespace runs to single spaces and trim."""
    return " ".join(text.split())


def _strip_images(line: str) -> str:
    """Replace image markup with its alt text (possibly empty)."""
    return _IMAGE_RE.sub(lambda m: m.group(1), line)


def _parse_header(lines: list[str]) -> tuple[dict, int]:
    """Parse ``key: value`` lines up to the first blank line.

    Returns the metadata dict and the index of the first body line.
    """
    meta: dict[str, str] = {}
    i = 0
    for i, line in enumerate(lines):
        if not line.strip():
            i += 1
            break
        if line.lstrip().startswith("#"):
            # Body reached without a blank separator: no header at all.
            break
        m = _HEADER_LINE_RE.match(line)
        if m is None:
            raise MalformedHeader(f"unparseable header line: {line!r}")
        meta[m.group(1).lower()] = m.group(2).strip()
    else:
        i = len(lines)
    return meta, i


def ingest_document(raw: str) -> Document:
    """Parse raw text into an immutable section tree.

    Raises EmptyBody for blank input or a header with no body, and
    MalformedHeader when the title is missing or a header line is unparseable.
    Heading levels that skip depth are clamped so each child sits exactly one
    level below its parent; text before the first heading lands in a synthetic
    root section named after the title.
    """
    if not raw.strip():
        raise EmptyBody("document text is empty")

    lines = raw.splitlines()
    meta, body_start = _parse_header(lines)
    title = meta.get("title", "").strip()
    if not title:
        raise MalformedHeader("header is missing a title")

    authors = [a.strip() for a in meta.get("authors", "").split(",") if a.strip()]
    published = meta.get("published") or meta.get("date") or None

    body_lines = lines[body_start:]
    if not any(line.strip() for line in body_lines):
        raise EmptyBody("document has a header but no body")

    roots: list[Section] = []
    stack: list[Section] = []
    taken_anchors: set[str] = set()
    pending_text: list[str] = []

    def unique_anchor(heading: str) -> str:
        base = slugify(heading)
        anchor = base
        n = 2
        while anchor in taken_anchors:
            anchor = f"{base}-{n}"
            n += 1
        taken_anchors.add(anchor)
        return anchor

    def flush_text(section: Section | None):
        text = "\n".join(pending_text).strip("\n")
        pending_text.clear()
        if not text.strip():
            return
        if section is None:
            # Preamble before the first heading: synthesize a title section.
            synthetic = Section(anchor=unique_anchor(title), level=1, heading=title, body=text)
            roots.append(synthetic)
            stack.append(synthetic)
        else:
            section.body = text if not section.body else section.body + "\n" + text

    for line in body_lines:
        m = _HEADING_RE.match(line)
        if m is None:
            pending_text.append(_strip_images(line))
            continue
        flush_text(stack[-1] if stack else None)
        level = len(m.group(1))
        heading = _strip_images(m.group(2)).strip()
        while stack and stack[-1].level >= level:
            stack.pop()
        if stack:
            level = min(level, stack[-1].level + 1)
        else:
            level = 1
        section = Section(anchor=unique_anchor(heading), level=level, heading=heading, body="")
        if stack:
            stack[-1].children.append(section)
        else:
            roots.append(section)
        stack.append(section)
    flush_text(stack[-1] if stack else None)

    return Document(id=slugify(title), title=title, authors=authors, published=published, sections=roots)


def navigation_index(doc: Document) -> list[tuple[str, int, str]]:
    """Depth-first pre-order listing of (anchor, level, heading)."""
    return [(s.anchor, s.level, s.heading) for s in doc.walk()]


def _normalized_with_map(text: str) -> tuple[str, list[int]]:
    """Casefolded, whitespace-collapsed text plus a map back to source offsets."""
    out: list[str] = []
    backmap: list[int] = []
    in_space = True
    for i, ch in enumerate(text):
        if ch.isspace():
            if not in_space:
                out.append(" ")
                backmap.append(i)
                in_space = True
        else:
            out.append(ch.casefold())
            backmap.append(i)
            in_space = False
    if out and out[-1] == " ":
        out.pop()
        backmap.pop()
    return "".join(out), backmap


def locate(doc: Document, quote: str) -> list[Excerpt]:
    """Find case-insensitive, whitespace-normalized matches of a quote.

    Matching is per section; a quote spanning two sections yields nothing.
    Every returned excerpt is a verbatim substring of the section body.
    """
    needle = normalize_ws(quote).casefold()
    if len(needle) < 3:
        raise QuoteTooShort("quote must be at least 3 characters after trimming")
    found: list[Excerpt] = []
    for section in doc.walk():
        haystack, backmap = _normalized_with_map(section.body)
        start = haystack.find(needle)
        while start != -1:
            first = backmap[start]
            last = backmap[start + len(needle) - 1]
            found.append(
                Excerpt(
                    document_id=doc.id,
                    anchor=section.anchor,
                    text=section.body[first : last + 1],
                    char_offset=first,
                )
            )
            start = haystack.find(needle, start + 1)
    return found


def verify_excerpt(doc: Document, excerpt: Excerpt) -> bool:
    """Re-validate an excerpt against the stored document."""
    section = doc.section(excerpt.anchor)
    if section is None or excerpt.document_id != doc.id:
        return False
    end = excerpt.char_offset + len(excerpt.text)
    return section.body[excerpt.char_offset : end] == excerpt.text


# --- serialization -----------------------------------------------------------

def _section_to_dict(section: Section) -> dict:
    return {
        "anchor": section.anchor,
        "level": section.level,
        "heading": section.heading,
        "body": section.body,
        "children": [_section_to_dict(c) for c in section.children],
    }


def _section_from_dict(data: dict) -> Section:
    return Section(
        anchor=data["anchor"],
        level=data["level"],
        heading=data["heading"],
        body=data["body"],
        children=[_section_from_dict(c) for c in data.get("children", [])],
    )


def document_to_dict(doc: Document) -> dict:
    return {
        "id": doc.id,
        "title": doc.title,
        "authors": list(doc.authors),
        "published": doc.published,
        "sections": [_section_to_dict(s) for s in doc.sections],
    }


def document_from_dict(data: dict) -> Document:
    return Document(
        id=data["id"],
        title=data["title"],
        authors=list(data.get("authors", [])),
        published=data.get("published"),
        sections=[_section_from_dict(s) for s in data["sections"]],
    )


class ContentStore:
    """Registry of ingested documents, one canonical JSON file each.

    Documents are immutable after ingestion; ingestion is single-writer per
    document id and re-ingesting an existing id is rejected.
    """

    def __init__(self, data_dir: Path | None = None):
        self._docs: dict[str, Document] = {}
        self._lock = threading.Lock()
        self._dir = Path(data_dir) if data_dir is not None else None
        if self._dir is not None:
            self._dir.mkdir(parents=True, exist_ok=True)
            for path in sorted(self._dir.glob("*.json")):
                doc = document_from_dict(json.loads(path.read_text(encoding="utf-8")))
                self._docs[doc.id] = doc

    def ingest(self, raw: str) -> Document:
        doc = ingest_document(raw)
        with self._lock:
            if doc.id in self._docs:
                raise DuplicateDocument(f"document {doc.id!r} already ingested")
            self._docs[doc.id] = doc
            if self._dir is not None:
                path = self._dir / f"{doc.id}.json"
                tmp = path.with_name(path.name + ".tmp")
                tmp.write_text(json.dumps(document_to_dict(doc), ensure_ascii=False, indent=2), encoding="utf-8")
                tmp.replace(path)
        return doc

    def get(self, document_id: str) -> Document:
        doc = self._docs.get(document_id)
        if doc is None:
            raise DocumentNotFound(f"no document {document_id!r}")
        return doc

    def ids(self) -> list[str]:
        return sorted(self._docs)
