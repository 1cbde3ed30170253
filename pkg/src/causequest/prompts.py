"""Prompt construction and follow-up question handling.

Three jobs live here:

* build the tutor-persona system prompt that pins the model to the learning
  document, with the restriction sentence included verbatim on every request;
* issue the follow-up directive after each answer and parse the reply into
  exactly four cause-tagged questions;
* guarantee the learner always gets a full set: one repair retry, then the
  deterministic templates from ``data/followup_templates.txt``.

Follow-up line grammar, bit-exact (``N`` in 1..4, tag case-insensitive)::

    N. [CAUSE] question text ending with a question mark?

with CAUSE one of MATERIAL, FORMAL, EFFICIENT, FINAL and each cause appearing
exactly once across the four lines.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources

from .content import Document, Section
from .errors import EmptyTurnText, MalformedReply, ProviderRefusal, ProviderUnavailable
from .gateway import FOLLOWUP_TEMPERATURE, ChatRequest, Gateway, new_request_id
from .taxonomy import Cause

PERSONA_CLAUSE = "You are an educational tutor guiding a learner through the material below."

RESTRICTION_SENTENCE = (
    "Answer only from the provided learning material; "
    "if the material does not contain the answer, say so."
)

FOLLOWUP_INSTRUCTION = (
    "Provide the top four related follow-up questions based on the previous "
    "question using the four causes idea"
)

REPAIR_INSTRUCTION = (
    "Your previous reply did not match the required format. Reply again with "
    "exactly four lines, numbered 1. to 4., each starting with one bracketed "
    "cause tag ([MATERIAL], [FORMAL], [EFFICIENT], [FINAL]) used exactly once, "
    "each line a question ending with a question mark, and no other text."
)

DEFAULT_EXCERPT_BUDGET = 6000

_SENTENCE_END_RE = re.compile(r"[.!?](?=\s)")
_FOLLOWUP_LINE_RE = re.compile(r"^([1-4])[.)]\s*\[([A-Za-z]+)\]\s*(.+)$")


class FollowUpOrigin(Enum):
    GENERATED = "Generated"
    TEMPLATE_FALLBACK = "TemplateFallback"
    USER_MODIFIED = "UserModified"


@dataclass(frozen=True)
class FollowUpQuestion:
    text: str
    cause: Cause
    origin: FollowUpOrigin = FollowUpOrigin.GENERATED

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("follow-up text must be nonempty")
        if not self.text.rstrip().endswith("?"):
            raise ValueError(f"follow-up must end with '?': {self.text!r}")


@dataclass
class FollowUpSet:
    questions: tuple[FollowUpQuestion, ...]
    retry_count: int = 0

    def __post_init__(self):
        self.questions = tuple(self.questions)
        if len(self.questions) != 4:
            raise ValueError(f"a follow-up set holds exactly 4 questions, got {len(self.questions)}")
        causes = [q.cause for q in self.questions]
        if len(set(causes)) != 4:
            raise ValueError("follow-up causes must be pairwise distinct")
        texts = [q.text for q in self.questions]
        if len(set(texts)) != 4:
            raise ValueError("follow-up texts must be pairwise distinct")

    def slot(self, number: int) -> FollowUpQuestion:
        """1-based accessor matching the numbered lines shown to the learner."""
        return self.questions[number - 1]


def _section_digest(section: Section) -> str:
    return f"[{section.anchor}] {section.heading}\n{section.body}".strip()


def _truncate_at_sentence(text: str, budget: int) -> str:
    if len(text) <= budget:
        return text
    cut = text[:budget]
    ends = [m.end() for m in _SENTENCE_END_RE.finditer(cut)]
    if ends:
        return cut[: ends[-1]].rstrip()
    return cut.rsplit(" ", 1)[0].rstrip()


def build_excerpt(doc: Document, focus_anchors: list[str] | None = None, budget: int = DEFAULT_EXCERPT_BUDGET) -> str:
    """Concatenate whole sections up to the budget, in pre-order.

    The digest never stops mid-sentence: a section either fits whole or, when
    the very first candidate is itself over budget, it is cut at the last
    sentence boundary inside the budget.
    """
    if focus_anchors:
        wanted = set(focus_anchors)
        sections = [s for s in doc.walk() if s.anchor in wanted]
    else:
        sections = list(doc.walk())
    parts: list[str] = []
    used = 0
    for section in sections:
        digest = _section_digest(section)
        cost = len(digest) + (2 if parts else 0)
        if used + cost <= budget:
            parts.append(digest)
            used += cost
        elif not parts:
            return _truncate_at_sentence(digest, budget)
        else:
            break
    return "\n\n".join(parts)


def build_system_prompt(
    doc: Document,
    focus_anchors: list[str] | None = None,
    excerpt_budget: int = DEFAULT_EXCERPT_BUDGET,
) -> str:
    """Persona clause + grounding excerpt + verbatim restriction sentence."""
    excerpt = build_excerpt(doc, focus_anchors, excerpt_budget)
    header = f'Learning material: "{doc.title}"'
    if doc.authors:
        header += f' by {", ".join(doc.authors)}'
    if doc.published:
        header += f" ({doc.published})"
    return "\n\n".join([PERSONA_CLAUSE, header, excerpt, RESTRICTION_SENTENCE])


def _one_line(text: str) -> str:
    return " ".join(text.split())


def build_followup_directive(last_question: str, last_answer: str) -> str:
    """Directive sent after each answer; embeds the instruction verbatim."""
    if not last_question.strip():
        raise EmptyTurnText("last question is empty")
    if not last_answer.strip():
        raise EmptyTurnText("last answer is empty")
    return (
        f'The previous question was: "{_one_line(last_question)}"\n'
        f'The previous answer was: "{_one_line(last_answer)}"\n'
        f"{FOLLOWUP_INSTRUCTION}.\n"
        "Reply with exactly four lines in this format and nothing else:\n"
        "1. [MATERIAL] <question ending with a question mark>\n"
        "2. [FORMAL] <question ending with a question mark>\n"
        "3. [EFFICIENT] <question ending with a question mark>\n"
        "4. [FINAL] <question ending with a question mark>\n"
        "Use each cause tag exactly once."
    )


def parse_followups(reply: str) -> FollowUpSet:
    """Parse a provider reply against the follow-up line grammar.

    Raises MalformedReply on wrong line count, an unrecognized or missing
    cause tag, a repeated cause, a repeated question, or a line that does not
    end with a question mark.
    """
    lines = [line.strip() for line in reply.splitlines() if line.strip()]
    if len(lines) != 4:
        raise MalformedReply(f"expected 4 follow-up lines, got {len(lines)}")
    questions: list[FollowUpQuestion] = []
    seen_causes: set[Cause] = set()
    seen_texts: set[str] = set()
    for line in lines:
        m = _FOLLOWUP_LINE_RE.match(line)
        if m is None:
            raise MalformedReply(f"line does not match 'N. [CAUSE] question': {line!r}")
        tag = m.group(2).capitalize()
        try:
            cause = Cause(tag)
        except ValueError:
            raise MalformedReply(f"unknown cause tag {m.group(2)!r}") from None
        text = m.group(3).strip()
        if not text.endswith("?"):
            raise MalformedReply(f"follow-up line is not a question: {text!r}")
        if cause in seen_causes:
            raise MalformedReply(f"cause {cause.value} appears twice")
        if text in seen_texts:
            raise MalformedReply(f"question appears twice: {text!r}")
        seen_causes.add(cause)
        seen_texts.add(text)
        questions.append(FollowUpQuestion(text=text, cause=cause, origin=FollowUpOrigin.GENERATED))
    return FollowUpSet(questions=tuple(questions))


def render_followups(followups: FollowUpSet) -> str:
    """Inverse of parse_followups for the defined line grammar."""
    return "\n".join(
        f"{i}. [{q.cause.value.upper()}] {q.text}" for i, q in enumerate(followups.questions, start=1)
    )


def _load_templates() -> dict[Cause, str]:
    text = resources.files("causequest.data").joinpath("followup_templates.txt").read_text(encoding="utf-8")
    templates: dict[Cause, str] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cause_name, _, template = line.partition("|")
        templates[Cause(cause_name)] = template
    if set(templates) != set(Cause):
        raise ValueError("followup_templates.txt must define one template per cause")
    return templates


def topic_label(last_question: str, max_len: int = 80) -> str:
    label = _one_line(last_question).rstrip(".?! ")
    if len(label) > max_len:
        label = label[:max_len].rsplit(" ", 1)[0].rstrip(",;: ")
    return label


def fallback_followups(last_question: str, retry_count: int = 1) -> FollowUpSet:
    """Template set, one question per cause, instantiated with the topic."""
    topic = topic_label(last_question)
    templates = _load_templates()
    questions = tuple(
        FollowUpQuestion(
            text=templates[cause].format(topic=topic),
            cause=cause,
            origin=FollowUpOrigin.TEMPLATE_FALLBACK,
        )
        for cause in (Cause.MATERIAL, Cause.FORMAL, Cause.EFFICIENT, Cause.FINAL)
    )
    return FollowUpSet(questions=questions, retry_count=retry_count)


def generate_followups(
    gateway: Gateway,
    system_prompt: str,
    history: tuple[tuple[str, str], ...],
    last_question: str,
    last_answer: str,
    max_tokens: int = 512,
) -> FollowUpSet:
    """Ask the provider for the next follow-up set; never returns less than 4.

    One retry total: a malformed reply gets a repair prompt, a transport
    failure gets one identical re-send. A second malformed reply falls back to
    the deterministic templates; only two transport failures in a row
    propagate as ProviderUnavailable.
    """
    directive = build_followup_directive(last_question, last_answer)
    messages = tuple(history) + (("user", directive),)

    def call(msgs: tuple[tuple[str, str], ...]):
        request = ChatRequest(
            system_prompt=system_prompt,
            messages=msgs,
            max_tokens=max_tokens,
            temperature=FOLLOWUP_TEMPERATURE,
            request_id=new_request_id("fq"),
        )
        return gateway.complete(request)

    try:
        reply = call(messages)
    except ProviderUnavailable:
        try:
            reply = call(messages)
        except ProviderUnavailable as exc:
            raise ProviderUnavailable("follow-up generation failed twice at transport level") from exc
        except ProviderRefusal:
            return fallback_followups(last_question)
        return _parse_or_fallback(reply.text, last_question, retry_count=1)
    except ProviderRefusal:
        try:
            reply = call(messages)
        except (ProviderUnavailable, ProviderRefusal):
            return fallback_followups(last_question)
        return _parse_or_fallback(reply.text, last_question, retry_count=1)

    try:
        return parse_followups(reply.text)
    except MalformedReply:
        repair = messages + (("assistant", reply.text), ("user", REPAIR_INSTRUCTION))
        try:
            second = call(repair)
        except (ProviderUnavailable, ProviderRefusal):
            return fallback_followups(last_question)
        return _parse_or_fallback(second.text, last_question, retry_count=1)


def _parse_or_fallback(text: str, last_question: str, retry_count: int) -> FollowUpSet:
    try:
        followups = parse_followups(text)
    except MalformedReply:
        return fallback_followups(last_question, retry_count=retry_count)
    followups.retry_count = retry_count
    return followups
