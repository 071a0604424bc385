"""Interactive feedback sessions: state machine, challenges, event log.

A session moves through created -> evaluating -> feedback_ready, loops
through challenge_in_progress -> evaluating -> feedback_ready for every
student challenge, and ends closed. Everything that happens is recorded as
an append-only event stream; replaying the stream reconstructs the session
exactly, which is what makes the outcome auditable end to end.

Challenges merge rather than rebuild: claims extracted earlier stay in the
framework, the student's new claims and any reviewer responses are added,
and the formal reasoning reruns over the union. A challenge to one dimension
never touches any other dimension's result.
"""

from __future__ import annotations

import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from typing import Callable

from .backends import Backend
from .discussion import (
    AgentPersona,
    DiscussionConfig,
    Transcript,
    default_personas,
    run_discussion,
)
from .grading import (
    DimensionReport,
    ExtractionPolicy,
    FeedbackReport,
    dimension_report_from_payload,
    dimension_report_to_payload,
    evaluate_dimension,
    report_from_payload,
    report_to_payload,
)
from .prompting import PromptLibrary
from .rubric import (
    RubricDimension,
    default_rubric,
    find_dimension,
    parse_rubric,
    serialize_rubric,
)

CREATED = "created"
EVALUATING = "evaluating"
FEEDBACK_READY = "feedback_ready"
CHALLENGE_IN_PROGRESS = "challenge_in_progress"
CLOSED = "closed"

ESSAY_SUBMITTED = "essay_submitted"
DISCUSSION_ENTRY = "discussion_entry"
REPORT_ISSUED = "report_issued"
CHALLENGE_SUBMITTED = "challenge_submitted"
REPORT_REVISED = "report_revised"
EVALUATION_FAILED = "evaluation_failed"
SESSION_CLOSED = "closed"


class WrongStateError(RuntimeError):
    """The operation is not legal in the session's current state."""


class UnknownDimensionError(KeyError):
    """The named dimension is not part of this session's rubric."""


class ReplayError(ValueError):
    """The event stream is missing, out of order, or corrupt."""


class SystemClock:
    def now(self) -> str:
        return datetime.now(timezone.utc).isoformat(timespec="seconds")


class TickClock:
    """Deterministic clock for replayable runs: fixed start, fixed step."""

    def __init__(self, start: str = "2030-01-01T00:00:00+00:00", step_s: int = 1):
        self._current = datetime.fromisoformat(start)
        self._step = timedelta(seconds=step_s)

    def now(self) -> str:
        stamp = self._current.isoformat(timespec="seconds")
        self._current = self._current + self._step
        return stamp


@dataclass(frozen=True)
class SessionEvent:
    sequence: int
    timestamp: str
    kind: str
    payload: dict

    def to_record(self) -> dict:
        return {
            "sequence": self.sequence,
            "timestamp": self.timestamp,
            "kind": self.kind,
            "payload": self.payload,
        }

    @classmethod
    def from_record(cls, record: dict) -> "SessionEvent":
        return cls(record["sequence"], record["timestamp"], record["kind"], record["payload"])


@dataclass(frozen=True)
class EngineConfig:
    """Everything the pipeline needs besides the backend itself."""

    personas: tuple[AgentPersona, ...] = field(default_factory=default_personas)
    discussion: DiscussionConfig = field(default_factory=DiscussionConfig)
    extraction: ExtractionPolicy = field(default_factory=ExtractionPolicy)
    template_dir: str | None = None
    parallelism: int = 1

    def prompts(self) -> PromptLibrary:
        return PromptLibrary(self.template_dir)


@dataclass(eq=True)
class Session:
    id: str
    essay: str
    rubric: tuple[RubricDimension, ...]
    state: str = CREATED
    history: list[SessionEvent] = field(default_factory=list)
    current_report: FeedbackReport | None = None
    transcripts: dict[str, Transcript] = field(default_factory=dict)
    challenge_counts: dict[str, int] = field(default_factory=dict)
    clock: object = field(default_factory=SystemClock, compare=False, repr=False)
    sink: Callable[[SessionEvent], None] | None = field(default=None, compare=False, repr=False)

    def record(self, kind: str, payload: dict) -> SessionEvent:
        event = SessionEvent(len(self.history), self.clock.now(), kind, payload)
        self.history.append(event)
        if self.sink is not None:
            self.sink(event)
        return event


def start_session(
    essay: str,
    rubric: list[RubricDimension] | tuple[RubricDimension, ...] | None = None,
    session_id: str | None = None,
    clock: object | None = None,
    sink: Callable[[SessionEvent], None] | None = None,
) -> Session:
    """Open a session for one essay. The rubric defaults to the built-in one."""
    if not essay or not essay.strip():
        raise ValueError("essay must be nonempty")
    dims = tuple(rubric) if rubric else tuple(default_rubric())
    if not dims:
        raise ValueError("rubric must have at least one dimension")
    session = Session(
        id=session_id or uuid.uuid4().hex,
        essay=essay,
        rubric=dims,
        clock=clock or SystemClock(),
        sink=sink,
    )
    session.record(
        ESSAY_SUBMITTED,
        {"session_id": session.id, "essay": essay, "rubric": serialize_rubric(dims)},
    )
    return session


def _transcript_events(
    session: Session, dimension_key: str, transcript: Transcript, phase: str
) -> None:
    for entry in transcript.entries:
        session.record(
            DISCUSSION_ENTRY,
            {
                "dimension": dimension_key,
                "speaker": entry.speaker,
                "round": entry.round,
                "text": entry.text,
                "phase": phase,
            },
        )


def _evaluate_one(
    session: Session,
    dimension: RubricDimension,
    config: EngineConfig,
    backend: Backend,
    prompts: PromptLibrary,
) -> tuple[Transcript, DimensionReport]:
    transcript = run_discussion(
        session.essay,
        dimension,
        config.discussion,
        config.personas,
        backend,
        prompts=prompts,
        max_parse_retries=config.extraction.max_parse_retries,
    )
    entry = evaluate_dimension(
        session.essay,
        dimension,
        transcript,
        backend,
        prompts,
        config.extraction,
    )
    return transcript, entry


def run_initial_evaluation(
    session: Session, config: EngineConfig, backend: Backend
) -> FeedbackReport:
    """Stage the full pipeline for every rubric dimension, then publish.

    Dimensions may be evaluated in parallel, but events are appended only
    after everything succeeded, in rubric order, so the log stays
    deterministic and no partial report is ever exposed. A failure records
    an evaluation_failed event and returns the session to created, ready to
    retry.
    """
    if session.state != CREATED:
        raise WrongStateError(f"evaluation requires state {CREATED!r}, session is {session.state!r}")
    session.state = EVALUATING
    prompts = config.prompts()
    try:
        if config.parallelism > 1:
            with ThreadPoolExecutor(max_workers=config.parallelism) as pool:
                futures = [
                    pool.submit(_evaluate_one, session, dim, config, backend, prompts)
                    for dim in session.rubric
                ]
                results = [f.result() for f in futures]
        else:
            results = [
                _evaluate_one(session, dim, config, backend, prompts)
                for dim in session.rubric
            ]
    except Exception as exc:
        session.state = CREATED
        session.record(
            EVALUATION_FAILED,
            {"phase": "initial", "error_kind": type(exc).__name__, "message": str(exc)},
        )
        raise

    report = FeedbackReport(tuple(entry for _, entry in results))
    for dimension, (transcript, _) in zip(session.rubric, results):
        session.transcripts[dimension.key] = transcript
        _transcript_events(session, dimension.key, transcript, "initial")
    session.record(REPORT_ISSUED, {"report": report_to_payload(report)})
    session.current_report = report
    session.state = FEEDBACK_READY
    return report


def submit_challenge(
    session: Session,
    dimension_key: str,
    student_text: str,
    config: EngineConfig,
    backend: Backend,
) -> FeedbackReport:
    """Re-run discussion and formal reasoning for one dimension with the
    student's argument seeded in; all other dimensions are untouched."""
    if session.state != FEEDBACK_READY:
        raise WrongStateError(
            f"challenges require state {FEEDBACK_READY!r}, session is {session.state!r}"
        )
    if not student_text or not student_text.strip():
        raise ValueError("challenge text must be nonempty")
    try:
        dimension = find_dimension(session.rubric, dimension_key)
    except KeyError as exc:
        raise UnknownDimensionError(str(exc)) from exc
    assert session.current_report is not None
    prior = session.current_report.entry(dimension_key)
    ordinal = session.challenge_counts.get(dimension_key, 0) + 1
    phase = f"challenge{ordinal}"

    session.state = CHALLENGE_IN_PROGRESS
    session.record(
        CHALLENGE_SUBMITTED, {"dimension": dimension_key, "text": student_text, "phase": phase}
    )
    session.state = EVALUATING
    prompts = config.prompts()
    try:
        transcript = run_discussion(
            session.essay,
            dimension,
            config.discussion,
            config.personas,
            backend,
            seed_student_text=student_text,
            prompts=prompts,
            phase=phase,
            max_parse_retries=config.extraction.max_parse_retries,
        )
        entry = evaluate_dimension(
            session.essay,
            dimension,
            transcript,
            backend,
            prompts,
            config.extraction,
            prior=prior,
            phase=phase,
        )
    except Exception as exc:
        session.state = FEEDBACK_READY
        session.record(
            EVALUATION_FAILED,
            {
                "phase": phase,
                "dimension": dimension_key,
                "error_kind": type(exc).__name__,
                "message": str(exc),
            },
        )
        raise

    session.challenge_counts[dimension_key] = ordinal
    session.transcripts[dimension_key] = transcript
    _transcript_events(session, dimension_key, transcript, phase)
    session.record(
        REPORT_REVISED,
        {"dimension": dimension_key, "entry": dimension_report_to_payload(entry)},
    )
    session.current_report = session.current_report.with_entry(entry)
    session.state = FEEDBACK_READY
    return session.current_report


def close_session(session: Session) -> None:
    if session.state == CLOSED:
        return
    if session.state not in (CREATED, FEEDBACK_READY):
        raise WrongStateError(f"cannot close while {session.state!r}")
    session.record(SESSION_CLOSED, {})
    session.state = CLOSED


def replay(events: list[SessionEvent]) -> Session:
    """Rebuild a session from its event stream.

    The stream must start at sequence 0 and be contiguous; the first event
    must be the essay submission. The reconstructed session compares equal
    to the live one that emitted the events.
    """
    if not events:
        raise ReplayError("empty event stream")
    for i, event in enumerate(events):
        if event.sequence != i:
            raise ReplayError(f"event stream corrupt at sequence {event.sequence} (expected {i})")
    first = events[0]
    if first.kind != ESSAY_SUBMITTED:
        raise ReplayError(f"stream must start with {ESSAY_SUBMITTED!r}, got {first.kind!r}")

    session = Session(
        id=first.payload["session_id"],
        essay=first.payload["essay"],
        rubric=tuple(parse_rubric(first.payload["rubric"])),
    )
    session.history = list(events)

    pending: dict[tuple[str, str], Transcript] = {}
    for event in events[1:]:
        if event.kind == DISCUSSION_ENTRY:
            p = event.payload
            key = (p["dimension"], p["phase"])
            transcript = pending.get(key, Transcript())
            pending[key] = transcript.with_entry(p["speaker"], p["round"], p["text"])
            session.transcripts[p["dimension"]] = pending[key]
        elif event.kind == REPORT_ISSUED:
            session.current_report = report_from_payload(event.payload["report"])
            session.state = FEEDBACK_READY
        elif event.kind == CHALLENGE_SUBMITTED:
            session.state = CHALLENGE_IN_PROGRESS
        elif event.kind == REPORT_REVISED:
            p = event.payload
            assert session.current_report is not None
            session.current_report = session.current_report.with_entry(
                dimension_report_from_payload(p["entry"])
            )
            session.challenge_counts[p["dimension"]] = (
                session.challenge_counts.get(p["dimension"], 0) + 1
            )
            session.state = FEEDBACK_READY
        elif event.kind == EVALUATION_FAILED:
            session.state = (
                CREATED if event.payload.get("phase") == "initial" else FEEDBACK_READY
            )
        elif event.kind == SESSION_CLOSED:
            session.state = CLOSED
        else:
            raise ReplayError(f"unknown event kind {event.kind!r} at sequence {event.sequence}")
    return session
