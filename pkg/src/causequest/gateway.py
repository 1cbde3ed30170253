"""Chat-completion provider abstraction with a deterministic scripted mock.

Every other module talks to a ``Gateway`` and stays testable offline. Both
implementations share the same bounded retry loop (total attempts =
1 + retries) and append every logical call to a capture log so tests can
assert on outgoing prompts.

Provider configuration comes from environment variables only and is never
persisted: CAUSEQUEST_BASE_URL, CAUSEQUEST_MODEL, CAUSEQUEST_API_KEY,
CAUSEQUEST_TIMEOUT_S, CAUSEQUEST_RETRIES.

Mock script files hold one behavior per line::

    reply <text, with \\n escapes for newlines>
    malformed <text>
    timeout
    transport-error

Blank lines and lines starting with "#" are ignored. Behaviors are consumed
strictly in order; running out of script is a test failure.
"""

from __future__ import annotations

import logging
import os
import threading
import time
import uuid
from dataclasses import dataclass
from pathlib import Path

import httpx

from .errors import MockScriptExhausted, ProviderRefusal, ProviderTimeout, ProviderUnavailable

logger = logging.getLogger(__name__)

ANSWER_TEMPERATURE = 0.7
FOLLOWUP_TEMPERATURE = 0.3


def new_request_id(prefix: str = "req") -> str:
    return f"{prefix}-{uuid.uuid4()}"


@dataclass
class ChatRequest:
    system_prompt: str
    messages: tuple[tuple[str, str], ...]
    max_tokens: int = 1024
    temperature: float = 0.7
    request_id: str = ""

    def __post_init__(self):
        self.messages = tuple((role, text) for role, text in self.messages)
        if not self.messages:
            raise ValueError("messages must be nonempty")
        for i, (role, _) in enumerate(self.messages):
            expected = "user" if i % 2 == 0 else "assistant"
            if role != expected:
                raise ValueError(f"message roles must alternate starting with user, got {role!r} at {i}")
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be within [0, 2]")
        if not self.request_id:
            self.request_id = new_request_id()


@dataclass
class ChatReply:
    text: str
    provider: str
    latency_ms: int
    request_id: str


@dataclass
class CaptureEntry:
    request: ChatRequest
    outcome: str  # "ok" or the error code
    reply_text: str | None
    timestamp: float


class CaptureLog:
    """Append-only record of every logical gateway call."""

    def __init__(self):
        self._entries: list[CaptureEntry] = []
        self._lock = threading.Lock()

    def append(self, entry: CaptureEntry) -> None:
        with self._lock:
            self._entries.append(entry)

    def entries(self, since: float | None = None) -> list[CaptureEntry]:
        with self._lock:
            if since is None:
                return list(self._entries)
            return [e for e in self._entries if e.timestamp >= since]


class Gateway:
    """Template for providers: retry loop, capture log, error mapping."""

    provider_name = "unknown"

    def __init__(self, retries: int = 0):
        if retries < 0:
            raise ValueError("retries must be >= 0")
        self.retries = retries
        self.capture = CaptureLog()

    def complete(self, request: ChatRequest) -> ChatReply:
        """Return the provider reply, retrying transport failures.

        One capture entry is appended per logical call regardless of how many
        attempts it took.
        """
        last_error: ProviderUnavailable | None = None
        for _ in range(1 + self.retries):
            try:
                reply = self._call_once(request)
            except ProviderUnavailable as exc:
                last_error = exc
                continue
            except ProviderRefusal:
                self.capture.append(CaptureEntry(request, "ProviderRefusal", None, time.time()))
                raise
            self.capture.append(CaptureEntry(request, "ok", reply.text, time.time()))
            return reply
        assert last_error is not None
        self.capture.append(CaptureEntry(request, last_error.code, None, time.time()))
        raise last_error

    def capture_log(self, since: float | None = None) -> list[CaptureEntry]:
        return self.capture.entries(since)

    def _call_once(self, request: ChatRequest) -> ChatReply:
        raise NotImplementedError


# --- scripted mock ------------------------------------------------------------

@dataclass
class Reply:
    text: str


@dataclass
class Malformed:
    """A returned reply that is expected to fail downstream parsing."""

    text: str


@dataclass
class Timeout:
    pass


@dataclass
class TransportError:
    pass


Behavior = Reply | Malformed | Timeout | TransportError


def parse_script(text: str) -> list[Behavior]:
    behaviors: list[Behavior] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        keyword, _, rest = stripped.partition(" ")
        payload = rest.replace("\\n", "\n")
        if keyword == "reply":
            behaviors.append(Reply(payload))
        elif keyword == "malformed":
            behaviors.append(Malformed(payload))
        elif keyword == "timeout":
            behaviors.append(Timeout())
        elif keyword == "transport-error":
            behaviors.append(TransportError())
        else:
            raise ValueError(f"unknown script behavior {keyword!r} on line {lineno}")
    return behaviors


def load_script(path: Path) -> list[Behavior]:
    return parse_script(Path(path).read_text(encoding="utf-8"))


class MockGateway(Gateway):
    """Deterministic scripted provider for offline tests and demos.

    Identical scripts and call sequences always produce identical outcomes.
    """

    provider_name = "mock"

    def __init__(self, script: list[Behavior], retries: int = 0):
        super().__init__(retries=retries)
        self._script = list(script)
        self._cursor = 0
        self._cursor_lock = threading.Lock()

    @property
    def consumed(self) -> int:
        return self._cursor

    @property
    def remaining(self) -> int:
        return len(self._script) - self._cursor

    def _next_behavior(self) -> Behavior:
        with self._cursor_lock:
            if self._cursor >= len(self._script):
                raise MockScriptExhausted(f"script exhausted after {self._cursor} behaviors")
            behavior = self._script[self._cursor]
            self._cursor += 1
            return behavior

    def _call_once(self, request: ChatRequest) -> ChatReply:
        behavior = self._next_behavior()
        if isinstance(behavior, (Reply, Malformed)):
            return ChatReply(text=behavior.text, provider=self.provider_name, latency_ms=0, request_id=request.request_id)
        if isinstance(behavior, Timeout):
            raise ProviderTimeout("scripted timeout")
        raise ProviderUnavailable("scripted transport error")


# --- HTTP provider -------------------------------------------------------------

@dataclass
class GatewayConfig:
    base_url: str = ""
    model: str = ""
    api_key: str = ""
    timeout_s: float = 30.0
    retries: int = 1

    @classmethod
    def from_env(cls, env: dict | None = None) -> "GatewayConfig":
        env = dict(os.environ if env is None else env)
        return cls(
            base_url=env.get("CAUSEQUEST_BASE_URL", ""),
            model=env.get("CAUSEQUEST_MODEL", ""),
            api_key=env.get("CAUSEQUEST_API_KEY", ""),
            timeout_s=float(env.get("CAUSEQUEST_TIMEOUT_S", "30")),
            retries=int(env.get("CAUSEQUEST_RETRIES", "1")),
        )


class HttpGateway(Gateway):
    """OpenAI-compatible chat completions over HTTP."""

    provider_name = "http"

    def __init__(self, config: GatewayConfig):
        if not config.base_url or not config.model:
            raise ValueError("provider base URL and model are required; set CAUSEQUEST_BASE_URL and CAUSEQUEST_MODEL")
        super().__init__(retries=config.retries)
        self.config = config
        self.provider_name = config.model

    def _call_once(self, request: ChatRequest) -> ChatReply:
        url = self.config.base_url.rstrip("/") + "/chat/completions"
        payload = {
            "model": self.config.model,
            "max_tokens": request.max_tokens,
            "temperature": request.temperature,
            "messages": [{"role": "system", "content": request.system_prompt}]
            + [{"role": role, "content": text} for role, text in request.messages],
        }
        headers = {}
        if self.config.api_key:
            headers["Authorization"] = f"Bearer {self.config.api_key}"
        started = time.monotonic()
        try:
            response = httpx.post(url, json=payload, headers=headers, timeout=self.config.timeout_s)
        except httpx.TimeoutException as exc:
            raise ProviderTimeout(str(exc)) from exc
        except httpx.HTTPError as exc:
            raise ProviderUnavailable(str(exc)) from exc
        if response.status_code >= 500 or response.status_code == 429:
            raise ProviderUnavailable(f"provider returned HTTP {response.status_code}")
        if response.status_code >= 400:
            raise ProviderRefusal(f"provider rejected the request: HTTP {response.status_code}")
        try:
            data = response.json()
            choice = data["choices"][0]
            text = choice["message"]["content"]
        except (KeyError, IndexError, ValueError) as exc:
            raise ProviderUnavailable(f"unexpected provider payload: {exc}") from exc
        if choice.get("finish_reason") == "content_filter":
            raise ProviderRefusal("provider filtered the completion")
        latency_ms = int((time.monotonic() - started) * 1000)
        return ChatReply(text=text, provider=self.provider_name, latency_ms=latency_ms, request_id=request.request_id)
