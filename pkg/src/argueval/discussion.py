"""Reviewer personas and the fixed-round discussion protocol.

Two (or more) persona-biased agents each review the essay against one rubric
dimension, then debate for a configured number of rounds. Every turn sees
the complete shared transcript. A student challenge, when present, is seeded
into the transcript before round 1 and every persona is told to address it.
Discussions for different dimensions are independent; within one dimension
the protocol is strictly sequential.
"""

from __future__ import annotations

from dataclasses import dataclass

from .backends import Backend, ChatMessage, make_tag
from .prompting import (
    BIAS_TEXT,
    PromptLibrary,
    complete_validated,
    essay_digest,
    level_range_text,
    parse_level,
)
from .rubric import RubricDimension

STUDENT = "student"

INITIAL_PHASE = "initial"


class MalformedReviewError(ValueError):
    """A persona's review could not be parsed into a valid level after retries."""


@dataclass(frozen=True)
class AgentPersona:
    name: str
    bias: str  # positive | negative | neutral

    def __post_init__(self) -> None:
        if self.bias not in BIAS_TEXT:
            raise ValueError(f"unknown bias {self.bias!r}")
        if self.name == STUDENT:
            raise ValueError("persona name 'student' is reserved")


def default_personas() -> tuple[AgentPersona, ...]:
    """Two reviewers with opposing leanings, the stock configuration."""
    return (AgentPersona("Alex", "positive"), AgentPersona("Sam", "negative"))


@dataclass(frozen=True)
class DiscussionConfig:
    num_agents: int = 2
    num_rounds: int = 2

    def __post_init__(self) -> None:
        if self.num_agents < 2:
            raise ValueError("num_agents must be >= 2")
        if self.num_rounds < 1:
            raise ValueError("num_rounds must be >= 1")


@dataclass(frozen=True)
class TranscriptEntry:
    speaker: str
    round: int
    text: str


@dataclass(frozen=True)
class Transcript:
    """Append-only discussion record; rounds never decrease."""

    entries: tuple[TranscriptEntry, ...] = ()

    def with_entry(self, speaker: str, round_no: int, text: str) -> "Transcript":
        if self.entries and round_no < self.entries[-1].round:
            raise ValueError(
                f"round {round_no} would decrease below round {self.entries[-1].round}"
            )
        return Transcript(self.entries + (TranscriptEntry(speaker, round_no, text),))

    def speakers(self) -> list[str]:
        seen: list[str] = []
        for entry in self.entries:
            if entry.speaker not in seen:
                seen.append(entry.speaker)
        return seen

    def rendered(self) -> str:
        return "\n\n".join(
            f"{e.speaker} (round {e.round}): {e.text}" for e in self.entries
        )

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class Review:
    agent: str
    dimension_key: str
    proposed_level: int
    justification: str


def _persona_system(prompts: PromptLibrary, persona: AgentPersona, dimension: RubricDimension) -> ChatMessage:
    rubric_text = "\n".join(f"Level {d.level}: {d.description}" for d in dimension.levels)
    return ChatMessage(
        "system",
        prompts.render(
            "persona_system",
            persona_name=persona.name,
            bias=BIAS_TEXT[persona.bias],
            rubric_dimension=f"{dimension.display_name}\n{rubric_text}",
        ),
    )


def initial_review(
    persona: AgentPersona,
    essay: str,
    dimension: RubricDimension,
    backend: Backend,
    prompts: PromptLibrary | None = None,
    phase: str = INITIAL_PHASE,
    max_parse_retries: int = 2,
) -> Review:
    """One persona's independent first assessment of the essay."""
    if not essay.strip():
        raise ValueError("essay must be nonempty")
    prompts = prompts or PromptLibrary()
    tag = make_tag(
        turn="initial_review",
        essay=essay_digest(essay),
        dim=dimension.key,
        persona=persona.name,
        phase=phase,
    )
    messages = [
        _persona_system(prompts, persona, dimension),
        ChatMessage(
            "user",
            prompts.render(
                "initial_review",
                routing_tag=tag,
                level_range=level_range_text(dimension.valid_levels()),
                essay=essay,
            ),
        ),
    ]
    text, level = complete_validated(
        backend,
        messages,
        lambda reply: parse_level(reply, dimension.valid_levels()),
        MalformedReviewError,
        max_parse_retries=max_parse_retries,
        retry_tag=tag,
    )
    return Review(persona.name, dimension.key, level, text)


def discussion_round(
    personas: tuple[AgentPersona, ...],
    transcript: Transcript,
    backend: Backend,
    essay: str,
    dimension: RubricDimension,
    round_no: int,
    prompts: PromptLibrary | None = None,
    phase: str = INITIAL_PHASE,
) -> Transcript:
    """One full round: each persona speaks once, in declaration order."""
    prompts = prompts or PromptLibrary()
    challenged = any(e.speaker == STUDENT for e in transcript.entries)
    notice = (
        "A student has challenged the previous feedback; address the student's "
        "argument directly in your response.\n"
        if challenged
        else ""
    )
    for persona in personas:
        tag = make_tag(
            turn="discussion_turn",
            essay=essay_digest(essay),
            dim=dimension.key,
            persona=persona.name,
            round=round_no,
            phase=phase,
        )
        messages = [
            _persona_system(prompts, persona, dimension),
            ChatMessage(
                "user",
                prompts.render(
                    "discussion_turn",
                    routing_tag=tag,
                    round=round_no,
                    student_challenge=notice,
                    essay=essay,
                    transcript=transcript.rendered(),
                ),
            ),
        ]
        try:
            reply = backend.complete(messages)
        except Exception as exc:
            raise type(exc)(
                f"persona {persona.name!r} round {round_no}: {exc}"
            ) from exc
        transcript = transcript.with_entry(persona.name, round_no, reply)
    return transcript


def run_discussion(
    essay: str,
    dimension: RubricDimension,
    config: DiscussionConfig,
    personas: tuple[AgentPersona, ...],
    backend: Backend,
    seed_student_text: str | None = None,
    prompts: PromptLibrary | None = None,
    phase: str = INITIAL_PHASE,
    max_parse_retries: int = 2,
) -> Transcript:
    """The whole protocol: initial reviews, optional student seed, then rounds.

    Transcript length is ``num_agents * (1 + num_rounds)`` plus one when a
    student challenge is seeded.
    """
    if len(personas) != config.num_agents:
        raise ValueError(
            f"config expects {config.num_agents} agents, got {len(personas)} personas"
        )
    prompts = prompts or PromptLibrary()
    transcript = Transcript()
    for persona in personas:
        review = initial_review(
            persona, essay, dimension, backend, prompts, phase, max_parse_retries
        )
        transcript = transcript.with_entry(persona.name, 0, review.justification)
    if seed_student_text is not None:
        if not seed_student_text.strip():
            raise ValueError("student challenge text must be nonempty")
        transcript = transcript.with_entry(STUDENT, 0, seed_student_text)
    for round_no in range(1, config.num_rounds + 1):
        transcript = discussion_round(
            personas, transcript, backend, essay, dimension, round_no, prompts, phase
        )
    return transcript
