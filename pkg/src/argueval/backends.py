"""Chat-completion backends.

Every agent in the pipeline talks to a backend through one contract: a list
of chat messages in, assistant text out. The scripted backend answers from a
fixture table and makes whole runs bit-deterministic; the HTTP backend speaks
the common JSON chat-completion wire shape and treats the model name as pure
configuration.

Each rendered prompt carries one routing tag of the form ``[[k=v ...]]``.
The scripted backend matches on that tag, and capture files record it, so a
recorded session can be replayed verbatim.
"""

from __future__ import annotations

import json
import os
import random
import re
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import httpx

SCRIPTED = "scripted"
HTTP = "http"

_TAG_RE = re.compile(r"\[\[([^\[\]]+)\]\]")


class BackendError(Exception):
    """Base class for backend failures."""


class NoScriptMatchError(BackendError):
    """No scripted exchange matched the request."""


class AmbiguousScriptError(BackendError):
    """More than one scripted exchange matched; the fixture set is ambiguous."""


class TransportError(BackendError):
    """Connection, DNS or timeout failure; retried up to max_retries."""


class RateLimitError(BackendError):
    """The remote endpoint throttled the request; retried up to max_retries."""


class AuthError(BackendError):
    """The endpoint rejected our credentials; never retried."""


class MalformedResponseError(BackendError):
    """The endpoint answered but not in the expected shape; never retried."""


@dataclass(frozen=True)
class ChatMessage:
    role: str  # system | user | assistant
    content: str

    def __post_init__(self) -> None:
        if self.role not in ("system", "user", "assistant"):
            raise ValueError(f"unknown role {self.role!r}")
        if self.role in ("user", "assistant") and not self.content:
            raise ValueError(f"{self.role} message content must be nonempty")


@dataclass(frozen=True)
class BackendConfig:
    kind: str = SCRIPTED
    model_name: str = "default"
    temperature: float = 0.2
    endpoint: str | None = None
    credentials_env: str | None = None  # env var NAME; the value is never persisted
    request_timeout_s: float = 60.0
    max_retries: int = 3
    script_path: str | None = None
    capture_path: str | None = None

    def __post_init__(self) -> None:
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError("temperature must be in [0, 1]")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")


Matcher = Callable[[Sequence[ChatMessage]], bool]


@dataclass(frozen=True)
class ScriptedExchange:
    """One canned reply. ``matcher`` is a routing-tag string or a predicate."""

    matcher: str | Matcher
    response: str

    def matches(self, messages: Sequence[ChatMessage], tag: str | None) -> bool:
        if callable(self.matcher):
            return self.matcher(messages)
        return tag is not None and tag == self.matcher


def routing_tag(messages: Iterable[ChatMessage]) -> str | None:
    """The last ``[[...]]`` tag anywhere in the message contents, if any."""
    tag = None
    for message in messages:
        for match in _TAG_RE.finditer(message.content):
            tag = match.group(1)
    return tag


def make_tag(**fields: object) -> str:
    """Render a routing tag; key order is the caller's declaration order."""
    return " ".join(f"{k}={v}" for k, v in fields.items())


class Backend:
    """Text-in/text-out completion interface; safe for concurrent calls."""

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        raise NotImplementedError


class ScriptedBackend(Backend):
    """Deterministic fixture backend. The exchange table is read-only after setup."""

    def __init__(self, exchanges: Iterable[ScriptedExchange | dict | tuple]):
        table = []
        for item in exchanges:
            if isinstance(item, ScriptedExchange):
                table.append(item)
            elif isinstance(item, dict):
                table.append(ScriptedExchange(item["match"], item["response"]))
            else:
                matcher, response = item
                table.append(ScriptedExchange(matcher, response))
        self._exchanges = tuple(table)
        self.requests: list[tuple[ChatMessage, ...]] = []
        self._lock = threading.Lock()

    @classmethod
    def from_file(cls, path: str | Path) -> "ScriptedBackend":
        exchanges = []
        with open(path, encoding="utf-8") as handle:
            for line in handle:
                line = line.strip()
                if line:
                    exchanges.append(json.loads(line))
        return cls(exchanges)

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        if not messages:
            raise ValueError("messages must be nonempty")
        with self._lock:
            self.requests.append(tuple(messages))
        tag = routing_tag(messages)
        hits = [x for x in self._exchanges if x.matches(messages, tag)]
        if not hits:
            head = messages[-1].content[:200].replace("\n", " ")
            raise NoScriptMatchError(f"no scripted response for tag {tag!r} (prompt: {head!r})")
        if len(hits) > 1:
            raise AmbiguousScriptError(f"{len(hits)} scripted responses match tag {tag!r}")
        return hits[0].response


class HttpBackend(Backend):
    """JSON chat-completion client with retry-then-fail semantics.

    Retries apply only to transport failures and rate limiting, with
    exponential backoff plus jitter; auth failures and malformed bodies fail
    immediately. The credential itself is read from the environment at call
    time and never appears in errors, logs or capture files.
    """

    def __init__(
        self,
        config: BackendConfig,
        client: httpx.Client | None = None,
        sleep: Callable[[float], None] = time.sleep,
        backoff_base_s: float = 0.5,
    ):
        if config.endpoint is None:
            raise ValueError("http backend requires an endpoint")
        self.config = config
        self._client = client or httpx.Client(timeout=config.request_timeout_s)
        self._sleep = sleep
        self._backoff_base_s = backoff_base_s
        self._rng = random.Random()
        self._capture_lock = threading.Lock()

    def complete(self, messages: Sequence[ChatMessage]) -> str:
        if not messages:
            raise ValueError("messages must be nonempty")
        payload = {
            "model": self.config.model_name,
            "temperature": self.config.temperature,
            "messages": [{"role": m.role, "content": m.content} for m in messages],
        }
        headers = {"Content-Type": "application/json"}
        if self.config.credentials_env:
            secret = os.environ.get(self.config.credentials_env)
            if secret:
                headers["Authorization"] = f"Bearer {secret}"
        last_error: BackendError | None = None
        for attempt in range(self.config.max_retries + 1):
            try:
                reply = self._request_once(payload, headers)
            except (TransportError, RateLimitError) as exc:
                last_error = exc
                if attempt < self.config.max_retries:
                    self._sleep(self._backoff_delay(attempt))
                continue
            self._capture(payload, reply)
            return reply
        assert last_error is not None
        raise last_error

    def _request_once(self, payload: dict, headers: dict) -> str:
        try:
            response = self._client.post(self.config.endpoint, json=payload, headers=headers)
        except httpx.HTTPError as exc:
            raise TransportError(f"request to {self.config.endpoint} failed: {type(exc).__name__}") from exc
        if response.status_code == 429:
            raise RateLimitError(f"rate limited by {self.config.endpoint}")
        if response.status_code in (401, 403):
            ref = self.config.credentials_env or "<unset>"
            raise AuthError(
                f"endpoint rejected credentials (status {response.status_code}, env var {ref})"
            )
        if response.status_code >= 500:
            raise TransportError(f"server error {response.status_code} from {self.config.endpoint}")
        if response.status_code != 200:
            raise MalformedResponseError(f"unexpected status {response.status_code}")
        try:
            body = response.json()
            content = body["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise MalformedResponseError(f"response body not in chat-completion shape: {exc}") from exc
        if not isinstance(content, str):
            raise MalformedResponseError("message content is not text")
        return content

    def _backoff_delay(self, attempt: int) -> float:
        base = self._backoff_base_s * (2**attempt)
        return base + self._rng.uniform(0, base / 2)

    def _capture(self, payload: dict, reply: str) -> None:
        if not self.config.capture_path:
            return
        record = {"request": payload, "response": reply}
        line = json.dumps(record, sort_keys=True, ensure_ascii=False)
        with self._capture_lock:
            with open(self.config.capture_path, "a", encoding="utf-8") as handle:
                handle.write(line + "\n")


def replay_backend_from_capture(path: str | Path) -> ScriptedBackend:
    """Build a scripted backend that replays a capture file via exact message match."""
    exchanges: list[ScriptedExchange] = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            record = json.loads(line)
            want = tuple(
                (m["role"], m["content"]) for m in record["request"]["messages"]
            )

            def matcher(messages: Sequence[ChatMessage], want=want) -> bool:
                return tuple((m.role, m.content) for m in messages) == want

            exchanges.append(ScriptedExchange(matcher, record["response"]))
    return ScriptedBackend(exchanges)


def backend_from_config(config: BackendConfig) -> Backend:
    if config.kind == SCRIPTED:
        if not config.script_path:
            raise ValueError("scripted backend config requires script_path")
        return ScriptedBackend.from_file(config.script_path)
    if config.kind == HTTP:
        return HttpBackend(config)
    raise ValueError(f"unknown backend kind {config.kind!r}")


def complete(config: BackendConfig, messages: Sequence[ChatMessage]) -> str:
    """One-shot completion against a freshly built backend for ``config``."""
    return backend_from_config(config).complete(messages)
