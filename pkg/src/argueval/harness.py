"""Batch evaluation: dataset loading, a simulated challenger, trial running,
and the four interactive-feedback metrics.

For every (essay, dimension) pair a trial grades the essay, has a simulated
student refute the feedback (always, regardless of correctness; the
challenger never sees the ground truth), applies exactly one challenge, and
records the grade before and after. Metrics per dimension:

  initial_acc      P(initial grade == truth)
  interaction_acc  P(post-challenge grade == truth)
  maintain_truth   among initially correct grades, share still correct after
  admit_mistake    among initially incorrect grades, share corrected after

The conditional metrics are undefined when their denominator is empty; they
are flagged as such, never silently coerced to a number. Standard errors are
binomial, sqrt(p*(1-p)/n); alongside the conditional-denominator SE we also
report the population-denominator SE (n = number of essays), which is how
headline result tables are conventionally annotated, and use that one for
display by default.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .backends import Backend, ChatMessage, make_tag
from .grading import DimensionReport, FeedbackReport
from .prompting import PromptLibrary, essay_digest
from .rubric import RubricDimension, default_rubric
from .session import (
    EngineConfig,
    Session,
    TickClock,
    run_initial_evaluation,
    start_session,
    submit_challenge,
)


class DatasetError(ValueError):
    """The dataset file violates its schema."""


@dataclass(frozen=True)
class LabeledEssay:
    id: str
    text: str
    labels: dict[str, int]  # dimension key -> ground-truth level


@dataclass(frozen=True)
class EvaluationRecord:
    essay_id: str
    dimension_key: str
    initial_level: int
    post_interaction_level: int
    truth_level: int

    @property
    def initial_correct(self) -> bool:
        return self.initial_level == self.truth_level

    @property
    def post_correct(self) -> bool:
        return self.post_interaction_level == self.truth_level


@dataclass(frozen=True)
class TrialFailure:
    essay_id: str
    dimension_key: str
    error: str


@dataclass(frozen=True)
class MetricValue:
    """A proportion as exact counts. ``population`` is the record count used
    for the display standard error."""

    successes: int
    denominator: int
    population: int

    @property
    def defined(self) -> bool:
        return self.denominator > 0

    @property
    def value(self) -> float | None:
        return self.successes / self.denominator if self.defined else None

    def exact(self) -> Fraction | None:
        return Fraction(self.successes, self.denominator) if self.defined else None

    @property
    def se_population(self) -> float | None:
        return standard_error(self.value, self.population) if self.defined else None

    @property
    def se_conditional(self) -> float | None:
        return standard_error(self.value, self.denominator) if self.defined else None


@dataclass(frozen=True)
class DimensionMetrics:
    dimension_key: str
    n_records: int
    initial_acc: MetricValue
    interaction_acc: MetricValue
    maintain_truth: MetricValue
    admit_mistake: MetricValue


@dataclass(frozen=True)
class MetricsSummary:
    dimensions: tuple[DimensionMetrics, ...]

    def for_dimension(self, key: str) -> DimensionMetrics:
        for dim in self.dimensions:
            if dim.dimension_key == key:
                return dim
        raise KeyError(f"no metrics for dimension {key!r}")


def load_dataset(
    path: str | Path,
    rubric: list[RubricDimension] | tuple[RubricDimension, ...] | None = None,
) -> list[LabeledEssay]:
    """Read a labeled corpus: one JSON record {id, text, labels} per line.

    Labels must cover every rubric dimension with a valid level; duplicate
    ids are rejected.
    """
    dims = list(rubric) if rubric else default_rubric()
    path = Path(path)
    if not path.exists():
        raise DatasetError(f"dataset file not found: {path}")
    essays: list[LabeledEssay] = []
    seen: set[str] = set()
    for index, line in enumerate(path.read_text("utf-8").splitlines()):
        if not line.strip():
            continue
        where = f"record {index}"
        try:
            record = json.loads(line)
        except json.JSONDecodeError as exc:
            raise DatasetError(f"{where}: invalid JSON ({exc})")
        if not isinstance(record, dict):
            raise DatasetError(f"{where}: expected an object")
        for fieldname in ("id", "text", "labels"):
            if fieldname not in record:
                raise DatasetError(f"{where}: missing field {fieldname!r}")
        essay_id = record["id"]
        if not isinstance(essay_id, str) or not essay_id:
            raise DatasetError(f"{where}: id must be a nonempty string")
        if essay_id in seen:
            raise DatasetError(f"{where}: duplicate id {essay_id!r}")
        seen.add(essay_id)
        if not isinstance(record["text"], str) or not record["text"].strip():
            raise DatasetError(f"{where}: text must be nonempty")
        labels = record["labels"]
        if not isinstance(labels, dict):
            raise DatasetError(f"{where}: labels must be an object")
        for dim in dims:
            if dim.key not in labels:
                raise DatasetError(f"{where}: missing label for dimension {dim.key!r}")
            level = labels[dim.key]
            if not isinstance(level, int) or isinstance(level, bool) or level not in dim.valid_levels():
                raise DatasetError(
                    f"{where}: label {level!r} is not a valid level for {dim.key!r}"
                )
        essays.append(LabeledEssay(essay_id, record["text"], dict(labels)))
    return essays


def simulate_challenge(
    report_entry: DimensionReport,
    challenger_backend: Backend,
    essay: str = "",
    prompts: PromptLibrary | None = None,
) -> str:
    """Ask the simulated student for a rebuttal of the given feedback.

    The challenger is instructed to refute whatever it receives; it never
    sees the ground truth, so correct and incorrect grades are contested
    alike.
    """
    if not report_entry.feedback_text.strip():
        raise ValueError("report entry has no feedback text to challenge")
    prompts = prompts or PromptLibrary()
    tag = make_tag(
        turn="challenge",
        essay=essay_digest(essay),
        dim=report_entry.dimension_key,
        grade=report_entry.grade.level,
    )
    message = ChatMessage(
        "user",
        prompts.render(
            "challenger",
            routing_tag=tag,
            grade=report_entry.grade.level,
            feedback=report_entry.feedback_text,
        ),
    )
    return challenger_backend.complete([message])


@dataclass
class EngineSystem:
    """The engine bundled behind the start/evaluate/challenge trial contract."""

    config: EngineConfig
    backend: Backend
    deterministic: bool = True
    sink_factory: object | None = None  # EventLogStore-compatible, optional

    def start(self, essay_text: str, rubric, session_id: str) -> Session:
        clock = TickClock() if self.deterministic else None
        sink = self.sink_factory.sink_for(session_id) if self.sink_factory else None
        return start_session(essay_text, rubric, session_id=session_id, clock=clock, sink=sink)

    def evaluate(self, session: Session) -> FeedbackReport:
        return run_initial_evaluation(session, self.config, self.backend)

    def challenge(self, session: Session, dimension_key: str, text: str) -> FeedbackReport:
        return submit_challenge(session, dimension_key, text, self.config, self.backend)


def run_trial(
    system: EngineSystem,
    essay: LabeledEssay,
    dimension: RubricDimension,
    challenger_backend: Backend,
    challenger_prompts: PromptLibrary | None = None,
) -> EvaluationRecord:
    """One full trial for one (essay, dimension) pair: grade, one simulated
    challenge, revised grade."""
    session = system.start(
        essay.text, [dimension], session_id=f"trial-{essay.id}-{dimension.key}"
    )
    report = system.evaluate(session)
    entry = report.entry(dimension.key)
    rebuttal = simulate_challenge(
        entry, challenger_backend, essay=essay.text, prompts=challenger_prompts
    )
    revised = system.challenge(session, dimension.key, rebuttal)
    return EvaluationRecord(
        essay_id=essay.id,
        dimension_key=dimension.key,
        initial_level=entry.grade.level,
        post_interaction_level=revised.entry(dimension.key).grade.level,
        truth_level=essay.labels[dimension.key],
    )


def run_trials(
    system: EngineSystem,
    essays: list[LabeledEssay],
    dimensions: list[RubricDimension],
    challenger_backend: Backend,
    parallelism: int = 1,
    challenger_prompts: PromptLibrary | None = None,
) -> tuple[list[EvaluationRecord], list[TrialFailure]]:
    """All trials for the corpus. Failed trials are excluded from the record
    set and reported separately, never silently dropped."""
    jobs = [(essay, dim) for dim in dimensions for essay in essays]

    def one(job: tuple[LabeledEssay, RubricDimension]):
        essay, dim = job
        try:
            return run_trial(system, essay, dim, challenger_backend, challenger_prompts)
        except Exception as exc:
            return TrialFailure(essay.id, dim.key, f"{type(exc).__name__}: {exc}")

    if parallelism > 1:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(one, jobs))
    else:
        results = [one(job) for job in jobs]
    records = [r for r in results if isinstance(r, EvaluationRecord)]
    failures = [r for r in results if isinstance(r, TrialFailure)]
    return records, failures


def compute_metrics(records: list[EvaluationRecord]) -> MetricsSummary:
    """Aggregate records into the four per-dimension metrics (exact counts).

    Identity that always holds when both conditional denominators are
    nonzero: interaction_acc * N == maintain_truth * C + admit_mistake * (N - C),
    with N the record count and C the initially-correct count.
    """
    if not records:
        raise ValueError("no records to aggregate")
    by_dim: dict[str, list[EvaluationRecord]] = {}
    for record in records:
        by_dim.setdefault(record.dimension_key, []).append(record)

    dims = []
    for key in sorted(by_dim):
        group = by_dim[key]
        n = len(group)
        init_ok = sum(1 for r in group if r.initial_correct)
        post_ok = sum(1 for r in group if r.post_correct)
        both_ok = sum(1 for r in group if r.initial_correct and r.post_correct)
        fixed = sum(1 for r in group if not r.initial_correct and r.post_correct)
        dims.append(
            DimensionMetrics(
                dimension_key=key,
                n_records=n,
                initial_acc=MetricValue(init_ok, n, n),
                interaction_acc=MetricValue(post_ok, n, n),
                maintain_truth=MetricValue(both_ok, init_ok, n),
                admit_mistake=MetricValue(fixed, n - init_ok, n),
            )
        )
    return MetricsSummary(tuple(dims))


def standard_error(p: float, n: int) -> float:
    """Binomial standard error sqrt(p*(1-p)/n)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"proportion must be in [0, 1], got {p}")
    if n < 1:
        raise ValueError(f"count must be >= 1, got {n}")
    return math.sqrt(p * (1.0 - p) / n)


_METRIC_COLUMNS = [
    ("initial_acc", "Initial Acc (%)"),
    ("interaction_acc", "Interaction Acc (%)"),
    ("maintain_truth", "Maintain Truth (%)"),
    ("admit_mistake", "Admit Mistake (%)"),
]


def _format_cell(metric: MetricValue) -> str:
    if not metric.defined:
        return "undefined (n=0)"
    return f"{metric.value * 100:.2f} ± {metric.se_population * 100:.2f}"


def emit_report(
    summary: MetricsSummary,
    format: str = "table_text",
    dimension_order: list[str] | None = None,
) -> str:
    """Render the summary as a metrics grid or as a structured document."""
    order = dimension_order or [d.dimension_key for d in summary.dimensions]
    dims = [summary.for_dimension(key) for key in order]
    if format == "structured":
        doc = {
            "dimensions": [
                {
                    "dimension": d.dimension_key,
                    "n_records": d.n_records,
                    "metrics": {
                        name: {
                            "successes": getattr(d, name).successes,
                            "denominator": getattr(d, name).denominator,
                            "population": getattr(d, name).population,
                        }
                        for name, _ in _METRIC_COLUMNS
                    },
                }
                for d in dims
            ]
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if format != "table_text":
        raise ValueError(f"unknown report format {format!r}")

    headers = ["Dimension"] + [label for _, label in _METRIC_COLUMNS]
    rows = [
        [d.dimension_key]
        + [_format_cell(getattr(d, name)) for name, _ in _METRIC_COLUMNS]
        for d in dims
    ]
    widths = [
        max(len(headers[i]), *(len(row[i]) for row in rows)) if rows else len(headers[i])
        for i in range(len(headers))
    ]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(headers)),
        "  ".join("-" * widths[i] for i in range(len(headers))),
    ]
    lines += ["  ".join(row[i].ljust(widths[i]) for i in range(len(row))) for row in rows]
    return "\n".join(lines) + "\n"


def summary_from_structured(document: str) -> MetricsSummary:
    """Parse emit_report's structured output back into a summary."""
    doc = json.loads(document)
    dims = []
    for raw in doc["dimensions"]:
        metrics = {
            name: MetricValue(
                raw["metrics"][name]["successes"],
                raw["metrics"][name]["denominator"],
                raw["metrics"][name]["population"],
            )
            for name, _ in _METRIC_COLUMNS
        }
        dims.append(
            DimensionMetrics(
                dimension_key=raw["dimension"],
                n_records=raw["n_records"],
                **metrics,
            )
        )
    return MetricsSummary(tuple(sorted(dims, key=lambda d: d.dimension_key)))
