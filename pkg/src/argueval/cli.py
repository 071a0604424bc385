"""Command-line entry points.

Subcommands: ``solve`` (run semantics on a raw AF file), ``grade`` (one essay
end to end, no challenge), ``eval`` (the batch harness over a labeled
corpus), ``serve`` (the HTTP API). Machine-readable output goes to stdout;
progress and prose go to stderr.

Exit codes are stable: 0 success, 2 parse/validation/config errors, 3 AF
size cap exceeded, 4 backend failure while grading, 5 port already in use.
"""

from __future__ import annotations

import argparse
import json
import socket
import sys
import uuid
from pathlib import Path

from .argumentation import (
    AFParseError,
    FrameworkTooLargeError,
    enumerate_complete,
    grounded,
    parse_af_text,
    select_final,
)
from .backends import BackendError, backend_from_config
from .config import AppConfig, ConfigError, load_app_config
from .grading import MalformedExtractionError, report_to_payload
from .harness import (
    DatasetError,
    EngineSystem,
    compute_metrics,
    emit_report,
    load_dataset,
    run_trials,
)
from .prompting import essay_digest
from .rubric import RubricSchemaError, default_rubric, parse_rubric
from .session import TickClock, run_initial_evaluation, start_session
from .storage import EventLogStore

OK = 0
USAGE_ERROR = 2
SIZE_CAP = 3
BACKEND_FAILURE = 4
PORT_IN_USE = 5


def _err(message: str) -> None:
    print(message, file=sys.stderr)


def cmd_solve(args: argparse.Namespace) -> int:
    try:
        text = Path(args.af_file).read_text("utf-8")
    except OSError as exc:
        _err(f"cannot read {args.af_file}: {exc}")
        return USAGE_ERROR
    try:
        framework = parse_af_text(text)
    except AFParseError as exc:
        _err(f"{args.af_file}: {exc}")
        return USAGE_ERROR

    def line(members) -> str:
        return " ".join(str(m) for m in sorted(members))

    if args.semantics == "grounded":
        print(line(grounded(framework).members))
        return OK
    try:
        extensions = enumerate_complete(framework)
    except FrameworkTooLargeError as exc:
        _err(str(exc))
        return SIZE_CAP
    if args.select_final:
        print(line(select_final(extensions).members))
    else:
        for extension in extensions:
            print(line(extension.members))
    return OK


def _load_config(path: str) -> AppConfig | None:
    try:
        return load_app_config(path)
    except ConfigError as exc:
        _err(f"config error: {exc}")
        return None


def cmd_grade(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    if config is None:
        return USAGE_ERROR
    try:
        # trailing whitespace is an artifact of the file, not the essay
        essay = Path(args.essay_file).read_text("utf-8").strip()
    except OSError as exc:
        _err(f"cannot read essay: {exc}")
        return USAGE_ERROR
    rubric = None
    if args.rubric:
        try:
            rubric = parse_rubric(Path(args.rubric).read_text("utf-8"))
        except OSError as exc:
            _err(f"cannot read rubric: {exc}")
            return USAGE_ERROR
        except RubricSchemaError as exc:
            _err(f"rubric error: {exc}")
            return USAGE_ERROR
    else:
        rubric = default_rubric()

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    store = EventLogStore(out_dir)
    if config.deterministic:
        session_id = f"grade-{essay_digest(essay)}"
        clock = TickClock()
    else:
        session_id = uuid.uuid4().hex
        clock = None
    try:
        backend = backend_from_config(config.backend)
    except (ValueError, OSError) as exc:
        _err(f"backend config error: {exc}")
        return USAGE_ERROR

    try:
        session = start_session(
            essay, rubric, session_id=session_id, clock=clock, sink=store.sink_for(session_id)
        )
    except ValueError as exc:
        _err(f"invalid essay: {exc}")
        return USAGE_ERROR
    try:
        report = run_initial_evaluation(session, config.engine, backend)
    except (BackendError, MalformedExtractionError, ValueError) as exc:
        _err(f"evaluation failed ({type(exc).__name__}): {exc}")
        _err(f"partial event log retained at {store.root / (session_id + '.jsonl')}")
        return BACKEND_FAILURE

    payload = report_to_payload(report)
    payload["session_id"] = session_id
    report_path = out_dir / "report.json"
    report_path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", "utf-8")
    _err(f"graded {len(report.entries)} dimension(s); event log {session_id}.jsonl")
    print(report_path)
    return OK


def cmd_eval(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    if config is None:
        return USAGE_ERROR
    challenger_config = _load_config(args.challenger_config) if args.challenger_config else config
    if challenger_config is None:
        return USAGE_ERROR

    rubric = default_rubric()
    try:
        essays = load_dataset(args.dataset, rubric)
    except DatasetError as exc:
        _err(f"dataset error: {exc}")
        return USAGE_ERROR
    if not essays:
        _err("dataset error: dataset is empty")
        return USAGE_ERROR

    dimensions = rubric
    if args.dimensions:
        wanted = [key.strip() for key in args.dimensions.split(",") if key.strip()]
        by_key = {d.key: d for d in rubric}
        unknown = [key for key in wanted if key not in by_key]
        if unknown:
            _err(f"unknown dimension(s): {', '.join(unknown)}")
            return USAGE_ERROR
        dimensions = [by_key[key] for key in wanted]

    try:
        backend = backend_from_config(config.backend)
        challenger_backend = backend_from_config(challenger_config.backend)
    except (ValueError, OSError) as exc:
        _err(f"backend config error: {exc}")
        return USAGE_ERROR

    system = EngineSystem(config.engine, backend, deterministic=config.deterministic)
    records, failures = run_trials(
        system, essays, dimensions, challenger_backend, parallelism=args.parallelism
    )
    for failure in failures:
        _err(f"trial failed: {failure.essay_id}/{failure.dimension_key}: {failure.error}")
    if not records:
        _err("no trials succeeded")
        return BACKEND_FAILURE
    summary = compute_metrics(records)
    order = [d.key for d in dimensions]
    table = emit_report(summary, "table_text", dimension_order=order)
    structured = emit_report(summary, "structured", dimension_order=order)

    out_path = Path(args.out)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    out_path.write_text(table, "utf-8")
    out_path.with_suffix(out_path.suffix + ".json").write_text(structured, "utf-8")
    _err(f"{len(records)} records, {len(failures)} failures; table written to {out_path}")
    print(structured, end="")
    return OK


def cmd_serve(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    if config is None:
        return USAGE_ERROR
    host, port = config.service.host, config.service.port
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        probe.bind((host, port))
    except OSError as exc:
        _err(f"cannot bind {host}:{port}: {exc}")
        return PORT_IN_USE
    finally:
        probe.close()

    import signal as signals

    import uvicorn

    from .service import create_app

    app = create_app(config)
    _err(f"serving on http://{host}:{port}")
    # uvicorn re-raises the signal that stopped it after its graceful
    # shutdown; absorb that one so a signal-requested stop exits 0.
    absorbed = {}
    for sig in (signals.SIGTERM, signals.SIGINT):
        absorbed[sig] = signals.signal(sig, lambda signum, frame: None)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    finally:
        for sig, handler in absorbed.items():
            signals.signal(sig, handler)
    return OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="argueval",
        description="Contestable essay feedback: grade, challenge, and audit via formal argumentation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run semantics on an AF text file")
    solve.add_argument("af_file")
    solve.add_argument("--semantics", choices=["complete", "grounded"], default="complete")
    solve.add_argument("--select-final", action="store_true", dest="select_final")
    solve.set_defaults(fn=cmd_solve)

    grade = sub.add_parser("grade", help="grade one essay end to end")
    grade.add_argument("essay_file")
    grade.add_argument("--rubric", help="rubric file (defaults to the built-in rubric)")
    grade.add_argument("--config", required=True, help="app config file")
    grade.add_argument("--out", required=True, help="output directory")
    grade.set_defaults(fn=cmd_grade)

    evaluate = sub.add_parser("eval", help="run the evaluation harness over a corpus")
    evaluate.add_argument("--dataset", required=True)
    evaluate.add_argument("--config", required=True, help="system under test config")
    evaluate.add_argument("--challenger-config", help="simulated-student config (defaults to --config)")
    evaluate.add_argument("--dimensions", help="comma-separated dimension filter")
    evaluate.add_argument("--parallelism", type=int, default=1)
    evaluate.add_argument("--out", required=True, help="metrics table output path")
    evaluate.set_defaults(fn=cmd_eval)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--config", required=True)
    serve.set_defaults(fn=cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
