"""Exception types shared across the package.

Every error carries a stable ``code`` string that the HTTP layer echoes in
problem-details bodies, so clients can branch on codes instead of messages.
"""

from __future__ import annotations


class CauseQuestError(Exception):
    """Base class for all package errors."""

    code: str = "InternalError"

    def __init__(self, message: str = "", detail: str | None = None):
        super().__init__(message or self.code)
        self.message = message or self.code
        self.detail = detail


# --- document ingestion and lookup -----------------------------------------

class MalformedHeader(CauseQuestError):
    code = "MalformedHeader"


class EmptyBody(CauseQuestError):
    code = "EmptyBody"


class QuoteTooShort(CauseQuestError):
    code = "QuoteTooShort"


class DocumentNotFound(CauseQuestError):
    code = "DocumentNotFound"


class DuplicateDocument(CauseQuestError):
    code = "DuplicateDocument"


# --- concept graph ----------------------------------------------------------

class MalformedGraphFile(CauseQuestError):
    code = "MalformedGraphFile"


class UnknownRelationKind(CauseQuestError):
    code = "UnknownRelationKind"


class DanglingEndpoint(CauseQuestError):
    code = "DanglingEndpoint"


class DuplicateRelation(CauseQuestError):
    code = "DuplicateRelation"


class DuplicateConcept(CauseQuestError):
    code = "DuplicateConcept"


class InvalidRelation(CauseQuestError):
    """Relation that is structurally impossible, e.g. a self loop."""

    code = "InvalidRelation"


class GraphNotFound(CauseQuestError):
    code = "GraphNotFound"


# --- query classification ---------------------------------------------------

class EmptyQuery(CauseQuestError):
    code = "EmptyQuery"


# --- prompting and reply parsing ---------------------------------------------

class EmptyTurnText(CauseQuestError):
    """A directive was requested for a blank question or answer."""

    code = "EmptyTurnText"


class MalformedReply(CauseQuestError):
    """Provider reply does not match the follow-up line grammar.

    Never escapes ``generate_followups``; callers of the parser see it.
    """

    code = "MalformedReply"


# --- provider gateway ---------------------------------------------------------

class GatewayError(CauseQuestError):
    code = "GatewayError"


class ProviderUnavailable(GatewayError):
    """Transport-level failure talking to the chat-completion provider."""

    code = "ProviderUnavailable"


class ProviderTimeout(ProviderUnavailable):
    code = "ProviderTimeout"


class ProviderRefusal(GatewayError):
    """Provider answered but refused to produce content."""

    code = "ProviderRefusal"


class MockScriptExhausted(CauseQuestError):
    """The scripted mock ran out of behaviors; always a test bug."""

    code = "MockScriptExhausted"


# --- sessions ----------------------------------------------------------------

class SessionNotFound(CauseQuestError):
    code = "SessionNotFound"


class CorruptSnapshot(CauseQuestError):
    code = "CorruptSnapshot"


class GenerationPending(CauseQuestError):
    code = "GenerationPending"


class NoActiveFollowUps(CauseQuestError):
    code = "NoActiveFollowUps"


class EmptySlotText(CauseQuestError):
    code = "EmptySlotText"


class InvalidSlot(CauseQuestError):
    code = "InvalidSlot"
