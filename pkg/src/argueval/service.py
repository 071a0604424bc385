"""HTTP API over sessions, reports, challenges, and argument graphs.

Evaluation and challenges run as asynchronous jobs (multi-round discussions
take minutes against real models), so mutating endpoints return a job id to
poll. Sessions are persisted through the append-only event log; the service
itself keeps only a job registry and can restart without losing anything.

Writes to one session are serialized: while a job holds the session, a
second evaluate/challenge is rejected with 409 (or queued, per config).
Errors use one body shape, {code, message, detail}, and never leak stack
traces or credentials.
"""

from __future__ import annotations

import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from contextlib import asynccontextmanager
from dataclasses import dataclass
from typing import Callable

from fastapi import FastAPI, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .argumentation import enumerate_complete, grounded, select_final
from .backends import Backend, backend_from_config
from .config import AppConfig
from .grading import FeedbackReport, report_to_payload
from .rubric import RubricSchemaError, parse_rubric
from .session import (
    CREATED,
    FEEDBACK_READY,
    EngineConfig,
    Session,
    TickClock,
    UnknownDimensionError,
    WrongStateError,
    run_initial_evaluation,
    start_session,
    submit_challenge,
)
from .storage import EventLogStore

PENDING = "pending"
RUNNING = "running"
DONE = "done"
FAILED = "failed"


class ApiError(Exception):
    def __init__(self, status: int, code: str, message: str, detail: str = ""):
        super().__init__(message)
        self.status = status
        self.code = code
        self.message = message
        self.detail = detail


@dataclass
class JobHandle:
    job_id: str
    status: str = PENDING
    result_ref: str | None = None
    error: str | None = None

    def to_payload(self) -> dict:
        return {
            "job_id": self.job_id,
            "status": self.status,
            "result_ref": self.result_ref,
            "error": self.error,
        }


class JobRegistry:
    """Bounded pool of background jobs; terminal states are immutable."""

    def __init__(self, workers: int):
        self._pool = ThreadPoolExecutor(max_workers=workers)
        self._jobs: dict[str, JobHandle] = {}
        self._lock = threading.Lock()

    def submit(self, fn: Callable[[], None], result_ref: str | None = None) -> JobHandle:
        handle = JobHandle(job_id=uuid.uuid4().hex, result_ref=result_ref)
        with self._lock:
            self._jobs[handle.job_id] = handle

        def run() -> None:
            with self._lock:
                if handle.status != PENDING:
                    return
                handle.status = RUNNING
            try:
                fn()
            except Exception as exc:
                with self._lock:
                    handle.status = FAILED
                    handle.error = f"{type(exc).__name__}: {exc}"
                return
            with self._lock:
                handle.status = DONE

        self._pool.submit(run)
        return handle

    def get(self, job_id: str) -> JobHandle:
        with self._lock:
            if job_id not in self._jobs:
                raise ApiError(404, "unknown_job", f"no job {job_id!r}")
            return self._jobs[job_id]

    def shutdown(self) -> None:
        self._pool.shutdown(wait=False, cancel_futures=True)
        with self._lock:
            for handle in self._jobs.values():
                if handle.status in (PENDING, RUNNING):
                    handle.status = FAILED
                    handle.error = "service shut down before the job finished"


class SessionRegistry:
    """In-memory cache over the event log store, one writer lock per session."""

    def __init__(self, store: EventLogStore, deterministic: bool = False):
        self._store = store
        self._sessions: dict[str, Session] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._deterministic = deterministic

    def create(self, essay: str, rubric) -> Session:
        session_id = uuid.uuid4().hex
        clock = TickClock() if self._deterministic else None
        session = start_session(
            essay,
            rubric,
            session_id=session_id,
            clock=clock,
            sink=self._store.sink_for(session_id),
        )
        with self._registry_lock:
            self._sessions[session_id] = session
            self._locks[session_id] = threading.Lock()
        return session

    def get(self, session_id: str) -> Session:
        with self._registry_lock:
            if session_id in self._sessions:
                return self._sessions[session_id]
        if not self._store.exists(session_id):
            raise ApiError(404, "unknown_session", f"no session {session_id!r}")
        session = self._store.load_session(session_id)
        session.sink = self._store.sink_for(session_id)
        with self._registry_lock:
            self._sessions.setdefault(session_id, session)
            self._locks.setdefault(session_id, threading.Lock())
            return self._sessions[session_id]

    def writer_lock(self, session_id: str) -> threading.Lock:
        self.get(session_id)
        with self._registry_lock:
            return self._locks[session_id]


class _CreateSessionBody(BaseModel):
    essay: str
    rubric: str | None = None


class _ChallengeBody(BaseModel):
    dimension: str
    text: str


def _graph_payload(session: Session, dimension_key: str) -> dict:
    report = session.current_report
    if report is None:
        raise ApiError(409, "not_evaluated", "session has no report yet")
    try:
        entry = report.entry(dimension_key)
    except KeyError:
        raise ApiError(404, "unknown_dimension", f"no graph for dimension {dimension_key!r}")
    # Acceptance must be re-derivable from the stored framework; refuse to
    # serve flags the solver would not reproduce.
    recomputed = select_final(enumerate_complete(entry.framework)).members
    if recomputed != entry.extension.members:
        raise ApiError(
            500,
            "inconsistent_snapshot",
            "stored acceptance does not match the solver's result for the snapshot",
        )
    core = grounded(entry.framework).members
    nodes = [
        {
            "id": a.id,
            "label": a.text,
            "author": a.author,
            "proposed_level": a.proposed_level,
            "accepted": a.id in entry.extension.members,
            "in_grounded": a.id in core,
        }
        for a in entry.arguments
    ]
    edges = [
        {"from": a.attacker, "to": a.target, "rationale": a.rationale} for a in entry.attacks
    ]
    return {
        "dimension": dimension_key,
        "grade": entry.grade.level,
        "contested": entry.contested,
        "nodes": nodes,
        "edges": edges,
    }


def create_app(
    config: AppConfig,
    backend: Backend | None = None,
    store: EventLogStore | None = None,
) -> FastAPI:
    backend = backend or backend_from_config(config.backend)
    store = store or EventLogStore(config.service.data_dir)
    sessions = SessionRegistry(store, deterministic=config.deterministic)
    jobs = JobRegistry(config.service.job_pool)
    engine: EngineConfig = config.engine
    queue_mode = config.service.queue_challenges

    @asynccontextmanager
    async def lifespan(app: FastAPI):
        yield
        jobs.shutdown()

    app = FastAPI(title="argueval", docs_url=None, redoc_url=None, lifespan=lifespan)

    app.state.jobs = jobs
    app.state.sessions = sessions

    @app.exception_handler(ApiError)
    async def on_api_error(request: Request, exc: ApiError):
        return JSONResponse(
            status_code=exc.status,
            content={"code": exc.code, "message": exc.message, "detail": exc.detail},
        )

    @app.exception_handler(RequestValidationError)
    async def on_validation_error(request: Request, exc: RequestValidationError):
        return JSONResponse(
            status_code=400,
            content={
                "code": "validation_error",
                "message": "request body failed validation",
                "detail": "; ".join(
                    f"{'.'.join(str(p) for p in e['loc'])}: {e['msg']}" for e in exc.errors()
                ),
            },
        )

    @app.exception_handler(Exception)
    async def on_unexpected(request: Request, exc: Exception):
        return JSONResponse(
            status_code=500,
            content={"code": "internal_error", "message": str(exc), "detail": ""},
        )

    def _run_locked(
        session_id: str, precondition: Callable[[], None], fn: Callable[[], None]
    ) -> JobHandle:
        lock = sessions.writer_lock(session_id)
        if queue_mode:
            def job() -> None:
                with lock:
                    precondition()
                    fn()
            return jobs.submit(job, result_ref=f"/sessions/{session_id}/report")
        if not lock.acquire(blocking=False):
            raise ApiError(409, "busy", "another evaluation or challenge is in flight")
        try:
            precondition()
        except BaseException:
            lock.release()
            raise

        def job() -> None:
            try:
                fn()
            finally:
                lock.release()

        return jobs.submit(job, result_ref=f"/sessions/{session_id}/report")

    @app.get("/health")
    def health():
        return {"status": "ok"}

    @app.post("/sessions", status_code=201)
    def create_session(body: _CreateSessionBody):
        rubric = None
        if body.rubric:
            try:
                rubric = parse_rubric(body.rubric)
            except RubricSchemaError as exc:
                raise ApiError(400, "invalid_rubric", str(exc))
        try:
            session = sessions.create(body.essay, rubric)
        except ValueError as exc:
            raise ApiError(400, "invalid_essay", str(exc))
        return {"session_id": session.id}

    @app.post("/sessions/{session_id}/evaluate", status_code=202)
    def evaluate(session_id: str):
        session = sessions.get(session_id)

        def check_state() -> None:
            if session.state != CREATED:
                raise ApiError(
                    409,
                    "wrong_state",
                    f"evaluate requires state {CREATED!r}, got {session.state!r}",
                )

        handle = _run_locked(
            session_id, check_state, lambda: run_initial_evaluation(session, engine, backend)
        )
        return {"job_id": handle.job_id}

    @app.get("/sessions/{session_id}/report")
    def report(session_id: str):
        session = sessions.get(session_id)
        if session.current_report is None:
            raise ApiError(409, "not_evaluated", "session has no report yet")
        payload = report_to_payload(session.current_report)
        payload["session_id"] = session_id
        payload["state"] = session.state
        return payload

    @app.post("/sessions/{session_id}/challenge", status_code=202)
    def challenge(session_id: str, body: _ChallengeBody):
        session = sessions.get(session_id)
        if body.dimension not in [d.key for d in session.rubric]:
            raise ApiError(404, "unknown_dimension", f"no dimension {body.dimension!r}")

        def check_state() -> None:
            if session.state != FEEDBACK_READY:
                raise ApiError(
                    409,
                    "wrong_state",
                    f"challenges require state {FEEDBACK_READY!r}, got {session.state!r}",
                )

        def run() -> None:
            try:
                submit_challenge(session, body.dimension, body.text, engine, backend)
            except (WrongStateError, UnknownDimensionError) as exc:
                raise RuntimeError(str(exc))

        handle = _run_locked(session_id, check_state, run)
        return {"job_id": handle.job_id}

    @app.get("/sessions/{session_id}/graph/{dimension_key}")
    def graph(session_id: str, dimension_key: str):
        session = sessions.get(session_id)
        return _graph_payload(session, dimension_key)

    @app.get("/jobs/{job_id}")
    def job_status(job_id: str):
        return jobs.get(job_id).to_payload()

    return app
