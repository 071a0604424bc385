"""Aggregation and formal reasoning: from a discussion transcript to a grade.

The lead-grader stage turns a finished discussion into explicit claims and
directed attacks, builds the attack graph, enumerates its complete
extensions, and selects the largest as the accepted set. The grade and
feedback are then synthesized from the accepted claims only; the formal
result, not free-form generation, determines the outcome. If the synthesis
step proposes a level no accepted claim supports, the engine overrides it
with the accepted-set majority (ties break to the lower, conservative level)
and records the override.

Degenerate case: when only the empty extension exists, no position survives
formal review. The grade then falls back to the most common level among the
reviewers' opening assessments (ties to the lower level) and the entry is
flagged as contested.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass

from .argumentation import (
    ArgumentationFramework,
    Extension,
    enumerate_complete,
    framework_from_snapshot,
    render_af_text,
    select_final,
)
from .backends import Backend, ChatMessage, make_tag
from .discussion import STUDENT, Transcript
from .prompting import (
    PromptLibrary,
    complete_validated,
    essay_digest,
    level_range_text,
    parse_level,
)
from .rubric import Grade, RubricDimension


class MalformedExtractionError(ValueError):
    """The model's structured output stayed invalid through all retries."""


class UnknownArgumentIdError(ValueError):
    """An extracted attack references an id that was never assigned (strict mode)."""


@dataclass(frozen=True)
class ExtractionPolicy:
    max_parse_retries: int = 2
    unknown_attack_ids: str = "drop"  # drop (with warning) | error

    def __post_init__(self) -> None:
        if self.unknown_attack_ids not in ("drop", "error"):
            raise ValueError("unknown_attack_ids must be 'drop' or 'error'")


@dataclass(frozen=True)
class Argument:
    id: str
    author: str  # persona name or "student"
    dimension_key: str
    proposed_level: int | None
    text: str

    def __post_init__(self) -> None:
        if not self.text.strip():
            raise ValueError("argument text must be nonempty")
        if self.author != STUDENT and self.proposed_level is None:
            raise ValueError(f"reviewer argument {self.id} must carry a proposed level")


@dataclass(frozen=True)
class AttackRelation:
    attacker: str
    target: str
    rationale: str
    self_contradiction: bool = False

    def __post_init__(self) -> None:
        if self.attacker == self.target and not self.self_contradiction:
            raise ValueError(
                f"attack {self.attacker}->{self.target} is a self-attack without the "
                "self_contradiction flag"
            )


@dataclass(frozen=True)
class DimensionReport:
    """Everything the engine concluded about one rubric dimension."""

    dimension_key: str
    grade: Grade
    feedback_text: str
    accepted_argument_ids: tuple[str, ...]
    framework: ArgumentationFramework
    extension: Extension
    arguments: tuple[Argument, ...]
    attacks: tuple[AttackRelation, ...]
    contested: bool = False
    level_overridden: bool = False
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class FeedbackReport:
    entries: tuple[DimensionReport, ...]

    def entry(self, dimension_key: str) -> DimensionReport:
        for entry in self.entries:
            if entry.dimension_key == dimension_key:
                return entry
        raise KeyError(f"no report entry for dimension {dimension_key!r}")

    def with_entry(self, entry: DimensionReport) -> "FeedbackReport":
        return FeedbackReport(
            tuple(entry if e.dimension_key == entry.dimension_key else e for e in self.entries)
        )

    def dimension_keys(self) -> list[str]:
        return [e.dimension_key for e in self.entries]


_LETTERS = "ABCDEFGHIJKLMNOPQRSTUVWXYZ"


def _next_ids(count: int, existing: tuple[str, ...]) -> list[str]:
    # Ids continue past the existing set and are never reused.
    taken = set(existing)
    out: list[str] = []
    i = 0
    while len(out) < count:
        candidate = _LETTERS[i] if i < len(_LETTERS) else f"{_LETTERS[i % 26]}{i // 26}"
        if candidate not in taken:
            out.append(candidate)
            taken.add(candidate)
        i += 1
    return out


_FENCE_RE = re.compile(r"^```[a-z]*\n(.*)\n```$", re.DOTALL)


def _parse_json_reply(text: str) -> dict:
    stripped = text.strip()
    fenced = _FENCE_RE.match(stripped)
    if fenced:
        stripped = fenced.group(1).strip()
    try:
        data = json.loads(stripped)
    except json.JSONDecodeError as exc:
        raise ValueError(f"reply is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise ValueError("reply must be a JSON object")
    return data


def _aggregator_system(prompts: PromptLibrary) -> ChatMessage:
    return ChatMessage("system", prompts.render("aggregator_system"))


def extract_arguments(
    transcript: Transcript,
    dimension: RubricDimension,
    backend: Backend,
    prompts: PromptLibrary | None = None,
    policy: ExtractionPolicy = ExtractionPolicy(),
    existing_ids: tuple[str, ...] = (),
    essay: str = "",
    phase: str = "initial",
) -> list[Argument]:
    """Distill the transcript into claims, at least one per speaker.

    Ids are assigned here, in the model's listing order, continuing past any
    ids already used for this dimension so merged frameworks never collide.
    """
    if not transcript.entries:
        raise ValueError("transcript must be nonempty")
    prompts = prompts or PromptLibrary()
    speakers = transcript.speakers()
    tag = make_tag(
        turn="extract_arguments", essay=essay_digest(essay), dim=dimension.key, phase=phase
    )
    messages = [
        _aggregator_system(prompts),
        ChatMessage(
            "user",
            prompts.render(
                "extract_arguments",
                routing_tag=tag,
                dimension_key=dimension.key,
                speakers=", ".join(speakers),
                transcript=transcript.rendered(),
            ),
        ),
    ]

    def validate(reply: str) -> list[dict]:
        data = _parse_json_reply(reply)
        raw = data.get("arguments")
        if not isinstance(raw, list) or not raw:
            raise ValueError("expected a nonempty 'arguments' list")
        covered = set()
        for i, item in enumerate(raw):
            if not isinstance(item, dict):
                raise ValueError(f"arguments[{i}] must be an object")
            author = item.get("author")
            if author not in speakers:
                raise ValueError(f"arguments[{i}].author {author!r} is not a speaker")
            claim = item.get("claim")
            if not isinstance(claim, str) or not claim.strip():
                raise ValueError(f"arguments[{i}].claim must be nonempty text")
            level = item.get("proposed_level")
            if level is None:
                if author != STUDENT:
                    raise ValueError(f"arguments[{i}]: reviewer {author!r} needs a level")
            else:
                if not isinstance(level, int) or isinstance(level, bool):
                    raise ValueError(f"arguments[{i}].proposed_level must be an integer")
                if level not in dimension.valid_levels():
                    raise ValueError(
                        f"arguments[{i}].proposed_level {level} is not one of "
                        f"{level_range_text(dimension.valid_levels())}"
                    )
            covered.add(author)
        missing = [s for s in speakers if s not in covered]
        if missing:
            raise ValueError(f"no claim extracted for speaker(s): {', '.join(missing)}")
        return raw

    _, raw_arguments = complete_validated(
        backend,
        messages,
        validate,
        MalformedExtractionError,
        max_parse_retries=policy.max_parse_retries,
        retry_tag=tag,
    )
    ids = _next_ids(len(raw_arguments), existing_ids)
    return [
        Argument(
            id=ids[i],
            author=item["author"],
            dimension_key=dimension.key,
            proposed_level=item.get("proposed_level"),
            text=item["claim"],
        )
        for i, item in enumerate(raw_arguments)
    ]


def extract_attacks(
    arguments: list[Argument],
    backend: Backend,
    prompts: PromptLibrary | None = None,
    policy: ExtractionPolicy = ExtractionPolicy(),
    essay: str = "",
    dimension_key: str = "",
    phase: str = "initial",
) -> tuple[list[AttackRelation], list[str]]:
    """Directed attacks between the given claims, plus repair warnings.

    With fewer than two claims there is nothing to relate and no model call
    is made. Attacks naming unknown ids are dropped with a warning by
    default; strict policy escalates them to an error instead.
    """
    if len(arguments) < 2:
        return [], []
    prompts = prompts or PromptLibrary()
    known = {a.id for a in arguments}
    listing = "\n".join(
        f"- {a.id} ({a.author}"
        + (f", proposes level {a.proposed_level}" if a.proposed_level is not None else "")
        + f"): {a.text}"
        for a in arguments
    )
    tag = make_tag(
        turn="extract_attacks",
        essay=essay_digest(essay),
        dim=dimension_key,
        phase=phase,
        n_args=len(arguments),
    )
    messages = [
        _aggregator_system(prompts),
        ChatMessage(
            "user",
            prompts.render("extract_attacks", routing_tag=tag, arguments=listing),
        ),
    ]

    def validate(reply: str) -> list[dict]:
        data = _parse_json_reply(reply)
        raw = data.get("attacks")
        if not isinstance(raw, list):
            raise ValueError("expected an 'attacks' list (may be empty)")
        for i, item in enumerate(raw):
            if not isinstance(item, dict):
                raise ValueError(f"attacks[{i}] must be an object")
            for key in ("attacker", "target"):
                if not isinstance(item.get(key), str):
                    raise ValueError(f"attacks[{i}].{key} must be an id string")
            if not isinstance(item.get("rationale"), str) or not item["rationale"].strip():
                raise ValueError(f"attacks[{i}].rationale must be nonempty text")
        return raw

    _, raw_attacks = complete_validated(
        backend,
        messages,
        validate,
        MalformedExtractionError,
        max_parse_retries=policy.max_parse_retries,
        retry_tag=tag,
    )
    attacks: list[AttackRelation] = []
    warnings: list[str] = []
    seen_pairs: set[tuple[str, str]] = set()
    for item in raw_attacks:
        attacker, target = item["attacker"], item["target"]
        unknown = [x for x in (attacker, target) if x not in known]
        if unknown:
            if policy.unknown_attack_ids == "error":
                raise UnknownArgumentIdError(
                    f"attack references unknown id(s): {', '.join(unknown)}"
                )
            warnings.append(
                f"dropped attack {attacker}->{target}: unknown id(s) {', '.join(unknown)}"
            )
            continue
        if attacker == target and not item.get("self_contradiction"):
            warnings.append(f"dropped unflagged self-attack on {attacker}")
            continue
        if (attacker, target) in seen_pairs:
            continue
        seen_pairs.add((attacker, target))
        attacks.append(
            AttackRelation(
                attacker, target, item["rationale"], bool(item.get("self_contradiction"))
            )
        )
    return attacks, warnings


def _majority_level(levels: list[int]) -> int:
    counts = Counter(levels)
    best = max(counts.values())
    return min(level for level, count in counts.items() if count == best)


def _initial_reviewer_levels(transcript: Transcript, dimension: RubricDimension) -> list[int]:
    levels = []
    for entry in transcript.entries:
        if entry.round == 0 and entry.speaker != STUDENT:
            try:
                levels.append(parse_level(entry.text, dimension.valid_levels()))
            except ValueError:
                continue
    return levels


def _contested_feedback(dimension: RubricDimension, arguments: tuple[Argument, ...]) -> str:
    lines = [
        f"The review of '{dimension.display_name}' is contested: the reviewers' "
        "claims conflict and none survives formal scrutiny. The grade falls back "
        "to the most common opening assessment. Conflicting claims:"
    ]
    lines += [f"- {a.id} ({a.author}): {a.text}" for a in arguments]
    return "\n".join(lines)


def evaluate_dimension(
    essay: str,
    dimension: RubricDimension,
    transcript: Transcript,
    backend: Backend,
    prompts: PromptLibrary | None = None,
    policy: ExtractionPolicy = ExtractionPolicy(),
    prior: DimensionReport | None = None,
    phase: str = "initial",
) -> DimensionReport:
    """Run the full formal-reasoning stage for one dimension.

    With ``prior`` set (a challenge re-evaluation), previously extracted
    claims and attacks are retained and the new ones are merged in; claims
    are never deleted, so a retracted position shows up as an attacked node
    rather than disappearing.
    """
    prompts = prompts or PromptLibrary()
    prior_arguments = prior.arguments if prior else ()
    prior_attacks = prior.attacks if prior else ()
    new_arguments = extract_arguments(
        transcript,
        dimension,
        backend,
        prompts,
        policy,
        existing_ids=tuple(a.id for a in prior_arguments),
        essay=essay,
        phase=phase,
    )
    arguments = tuple(prior_arguments) + tuple(new_arguments)
    extracted, warnings = extract_attacks(
        list(arguments), backend, prompts, policy, essay=essay,
        dimension_key=dimension.key, phase=phase,
    )
    attacks: list[AttackRelation] = list(prior_attacks)
    seen = {(a.attacker, a.target) for a in prior_attacks}
    for attack in extracted:
        if (attack.attacker, attack.target) not in seen:
            seen.add((attack.attacker, attack.target))
            attacks.append(attack)

    framework = ArgumentationFramework.of(
        [a.id for a in arguments], [(a.attacker, a.target) for a in attacks]
    )
    extensions = enumerate_complete(framework)
    final = select_final(extensions)
    accepted = tuple(a for a in arguments if a.id in final.members)
    accepted_levels = [a.proposed_level for a in accepted if a.proposed_level is not None]

    contested = False
    overridden = False
    entry_warnings = list(warnings)
    if not accepted_levels:
        contested = True
        fallback_levels = _initial_reviewer_levels(transcript, dimension)
        if not fallback_levels:
            raise MalformedExtractionError(
                "no accepted claim carries a level and no opening reviews parse"
            )
        level = _majority_level(fallback_levels)
        feedback = _contested_feedback(dimension, arguments)
    else:
        rubric_text = "\n".join(f"Level {d.level}: {d.description}" for d in dimension.levels)
        listing = "\n".join(
            f"- {a.id} ({a.author}"
            + (f", level {a.proposed_level}" if a.proposed_level is not None else "")
            + f"): {a.text}"
            for a in accepted
        )
        tag = make_tag(
            turn="synthesize",
            essay=essay_digest(essay),
            dim=dimension.key,
            phase=phase,
            accepted=",".join(sorted(final.members)),
        )
        messages = [
            _aggregator_system(prompts),
            ChatMessage(
                "user",
                prompts.render(
                    "synthesize_feedback",
                    routing_tag=tag,
                    dimension_key=dimension.key,
                    level_range=level_range_text(dimension.valid_levels()),
                    rubric_dimension=f"{dimension.display_name}\n{rubric_text}",
                    accepted_arguments=listing,
                ),
            ),
        ]
        raw, level = complete_validated(
            backend,
            messages,
            lambda reply: parse_level(reply, dimension.valid_levels()),
            MalformedExtractionError,
            max_parse_retries=policy.max_parse_retries,
            retry_tag=tag,
        )
        feedback = _strip_level_line(raw)
        if level not in accepted_levels:
            majority = _majority_level(accepted_levels)
            entry_warnings.append(
                f"synthesis proposed level {level}, not among accepted claims; "
                f"overridden to accepted-set majority {majority}"
            )
            level = majority
            overridden = True

    return DimensionReport(
        dimension_key=dimension.key,
        grade=Grade(dimension.key, level),
        feedback_text=feedback,
        accepted_argument_ids=tuple(sorted(final.members)),
        framework=framework,
        extension=final,
        arguments=arguments,
        attacks=tuple(attacks),
        contested=contested,
        level_overridden=overridden,
        warnings=tuple(entry_warnings),
    )


def _strip_level_line(text: str) -> str:
    lines = text.strip().splitlines()
    if lines and lines[0].lower().lstrip().startswith("level"):
        lines = lines[1:]
    return "\n".join(lines).strip()


# --- serialization -----------------------------------------------------------

def dimension_report_to_payload(entry: DimensionReport) -> dict:
    af_text, labels = render_af_text(entry.framework)
    return {
        "dimension": entry.dimension_key,
        "grade": {"dimension_key": entry.grade.dimension_key, "level": entry.grade.level},
        "feedback_text": entry.feedback_text,
        "accepted_argument_ids": list(entry.accepted_argument_ids),
        "framework": {"af_text": af_text, "labels": labels},
        "extension": {
            "members": sorted(entry.extension.members),
            "semantics_tag": entry.extension.semantics_tag,
        },
        "arguments": [
            {
                "id": a.id,
                "author": a.author,
                "proposed_level": a.proposed_level,
                "text": a.text,
            }
            for a in entry.arguments
        ],
        "attacks": [
            {
                "attacker": a.attacker,
                "target": a.target,
                "rationale": a.rationale,
                "self_contradiction": a.self_contradiction,
            }
            for a in entry.attacks
        ],
        "contested": entry.contested,
        "level_overridden": entry.level_overridden,
        "warnings": list(entry.warnings),
    }


def dimension_report_from_payload(payload: dict) -> DimensionReport:
    framework = framework_from_snapshot(
        payload["framework"]["af_text"], payload["framework"]["labels"]
    )
    return DimensionReport(
        dimension_key=payload["dimension"],
        grade=Grade(payload["grade"]["dimension_key"], payload["grade"]["level"]),
        feedback_text=payload["feedback_text"],
        accepted_argument_ids=tuple(payload["accepted_argument_ids"]),
        framework=framework,
        extension=Extension(
            frozenset(payload["extension"]["members"]), payload["extension"]["semantics_tag"]
        ),
        arguments=tuple(
            Argument(
                id=a["id"],
                author=a["author"],
                dimension_key=payload["dimension"],
                proposed_level=a["proposed_level"],
                text=a["text"],
            )
            for a in payload["arguments"]
        ),
        attacks=tuple(
            AttackRelation(
                a["attacker"], a["target"], a["rationale"], a.get("self_contradiction", False)
            )
            for a in payload["attacks"]
        ),
        contested=payload["contested"],
        level_overridden=payload["level_overridden"],
        warnings=tuple(payload["warnings"]),
    )


def report_to_payload(report: FeedbackReport) -> dict:
    return {"entries": [dimension_report_to_payload(e) for e in report.entries]}


def report_from_payload(payload: dict) -> FeedbackReport:
    return FeedbackReport(
        tuple(dimension_report_from_payload(e) for e in payload["entries"])
    )
