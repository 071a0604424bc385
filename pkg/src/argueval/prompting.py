"""Prompt templates, routing tags, and validated completion requests.

Templates are plain UTF-8 files with ``{{placeholder}}`` slots, loaded from a
directory so prompt wording can be iterated without code changes. Every
rendered request carries a routing tag (see backends.routing_tag) naming the
turn it belongs to, which keys scripted fixtures and capture replay.
"""

from __future__ import annotations

import hashlib
import re
from importlib import resources
from pathlib import Path
from typing import Callable, Sequence, Type, TypeVar

from .backends import Backend, ChatMessage

_PLACEHOLDER_RE = re.compile(r"\{\{(\w+)\}\}")

BIAS_TEXT = {
    "positive": (
        "You lean toward positive feedback: give the student the benefit of "
        "the doubt and emphasize strengths, while staying honest about the rubric."
    ),
    "negative": (
        "You lean toward negative feedback: hold the essay to a strict reading "
        "of the rubric and emphasize weaknesses, while staying fair."
    ),
    "neutral": "You have no leaning; weigh strengths and weaknesses evenly.",
}


def essay_digest(essay: str) -> str:
    """Short stable fingerprint of the essay text, used in routing tags."""
    return hashlib.sha256(essay.encode("utf-8")).hexdigest()[:8]


class PromptLibrary:
    """Loads and renders the prompt template files."""

    def __init__(self, template_dir: str | Path | None = None):
        self._dir = Path(template_dir) if template_dir else None
        self._cache: dict[str, str] = {}

    def _load(self, name: str) -> str:
        if name not in self._cache:
            if self._dir is not None:
                text = (self._dir / f"{name}.txt").read_text("utf-8")
            else:
                text = resources.files("argueval").joinpath(f"prompts/{name}.txt").read_text("utf-8")
            self._cache[name] = text
        return self._cache[name]

    def render(self, name: str, **values: object) -> str:
        text = self._load(name)

        def replace(match: re.Match) -> str:
            key = match.group(1)
            if key not in values:
                raise KeyError(f"template {name!r} uses unbound placeholder {key!r}")
            return str(values[key])

        return _PLACEHOLDER_RE.sub(replace, text).strip() + "\n"


T = TypeVar("T")


def complete_validated(
    backend: Backend,
    messages: Sequence[ChatMessage],
    validator: Callable[[str], T],
    error_type: Type[Exception],
    max_parse_retries: int = 2,
    retry_tag: str = "turn=retry",
) -> tuple[str, T]:
    """Ask the backend, validate the reply, and re-prompt on parse failure.

    Each re-prompt appends the bad reply plus the validator's complaint, so
    the model can correct itself; after ``max_parse_retries`` re-prompts the
    last validation error is raised as ``error_type``. Transport and other
    backend errors are never retried here (the backend owns those).
    """
    attempts = max_parse_retries + 1
    history = list(messages)
    last_error = "no attempts made"
    for attempt in range(1, attempts + 1):
        text = backend.complete(history)
        try:
            return text, validator(text)
        except ValueError as exc:
            last_error = str(exc)
            if attempt < attempts:
                history = history + [
                    ChatMessage("assistant", text),
                    ChatMessage(
                        "user",
                        f"[[{retry_tag} attempt={attempt + 1}]]\n"
                        f"Your previous reply was invalid: {exc}. "
                        "Reply again following the required format exactly.",
                    ),
                ]
    raise error_type(f"reply failed validation after {attempts} attempts: {last_error}")


_LEVEL_RE = re.compile(r"level\s*:\s*(-?\d+)", re.IGNORECASE)


def parse_level(text: str, valid_levels: range) -> int:
    """Extract the first ``level: <n>`` declaration and check it is a real level."""
    match = _LEVEL_RE.search(text)
    if not match:
        raise ValueError("reply must contain a 'level: <n>' line")
    level = int(match.group(1))
    if level not in valid_levels:
        choices = ", ".join(str(v) for v in valid_levels)
        raise ValueError(f"proposed level {level} is not one of {choices}")
    return level


def level_range_text(valid_levels: range) -> str:
    return ", ".join(str(v) for v in valid_levels)
