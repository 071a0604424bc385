from __future__ import annotations

import json

import pytest

from argueval.argumentation import grounded, is_complete
from argueval.backends import ScriptedBackend, make_tag
from argueval.discussion import Transcript
from argueval.grading import (
    Argument,
    AttackRelation,
    ExtractionPolicy,
    FeedbackReport,
    MalformedExtractionError,
    UnknownArgumentIdError,
    dimension_report_from_payload,
    dimension_report_to_payload,
    evaluate_dimension,
    extract_arguments,
    extract_attacks,
)
from argueval.prompting import essay_digest
from argueval.rubric import default_rubric, find_dimension

ESSAY = "Cities should pedestrianize their centers; commerce and air quality both gain."
ISSUE = find_dimension(default_rubric(), "issue")
DIGEST = essay_digest(ESSAY)


def transcript_opposing() -> Transcript:
    return (
        Transcript()
        .with_entry("Mike", 0, "level: 1\nThe issue is identified though some terms are loose.")
        .with_entry("Sarah", 0, "level: 0\nThe issue is merely mentioned, not identified.")
        .with_entry("Mike", 1, "The opening paragraph names the problem; I maintain level 1.")
        .with_entry("Sarah", 1, "Mike is right about the opening paragraph; level 1 is fair.")
        .with_entry("Mike", 2, "We agree on level 1.")
        .with_entry("Sarah", 2, "Agreed, level 1.")
    )


def args_tag(phase="initial"):
    return make_tag(turn="extract_arguments", essay=DIGEST, dim="issue", phase=phase)


def attacks_tag(n, phase="initial"):
    return make_tag(
        turn="extract_attacks", essay=DIGEST, dim="issue", phase=phase, n_args=n
    )


def synth_tag(accepted, phase="initial"):
    return make_tag(
        turn="synthesize", essay=DIGEST, dim="issue", phase=phase, accepted=accepted
    )


FIGURE_ARGS = json.dumps(
    {
        "arguments": [
            {"author": "Mike", "proposed_level": 1, "claim": "The issue is identified; level 1."},
            {"author": "Sarah", "proposed_level": 0, "claim": "The issue is only mentioned; level 0."},
            {"author": "Sarah", "proposed_level": 1, "claim": "On reflection the opening names the problem; level 1."},
        ]
    }
)

FIGURE_ATTACKS = json.dumps(
    {
        "attacks": [
            {"attacker": "A", "target": "B", "rationale": "Identification contradicts mere mention."},
            {"attacker": "B", "target": "A", "rationale": "Mere mention contradicts identification."},
            {"attacker": "C", "target": "B", "rationale": "Sarah's revised stance retracts her opening claim."},
        ]
    }
)

FIGURE_SYNTH = "level: 1\nThe issue is identified (claims A and C); sharpen key terms to reach level 2."


def figure_backend(extra=()):
    return ScriptedBackend(
        [
            {"match": args_tag(), "response": FIGURE_ARGS},
            {"match": attacks_tag(3), "response": FIGURE_ATTACKS},
            {"match": synth_tag("A,C"), "response": FIGURE_SYNTH},
            *extra,
        ]
    )


class TestExtractArguments:
    def test_figure_transcript_yields_three_claims(self):
        arguments = extract_arguments(
            transcript_opposing(), ISSUE, figure_backend(), essay=ESSAY
        )
        assert [a.id for a in arguments] == ["A", "B", "C"]
        assert arguments[1].author == "Sarah"
        assert arguments[1].proposed_level == 0

    def test_student_entries_yield_student_claims(self):
        transcript = transcript_opposing().with_entry("student", 2, "I want level 2.")
        reply = json.dumps(
            {
                "arguments": [
                    {"author": "Mike", "proposed_level": 1, "claim": "c1"},
                    {"author": "Sarah", "proposed_level": 1, "claim": "c2"},
                    {"author": "student", "proposed_level": None, "claim": "wants level 2"},
                ]
            }
        )
        backend = ScriptedBackend([{"match": args_tag(), "response": reply}])
        arguments = extract_arguments(transcript, ISSUE, backend, essay=ESSAY)
        assert any(a.author == "student" and a.proposed_level is None for a in arguments)

    def test_empty_transcript_rejected(self):
        with pytest.raises(ValueError):
            extract_arguments(Transcript(), ISSUE, ScriptedBackend([]), essay=ESSAY)

    def test_missing_speaker_coverage_retries_then_fails(self):
        reply = json.dumps(
            {"arguments": [{"author": "Mike", "proposed_level": 1, "claim": "c"}]}
        )
        base = args_tag()
        backend = ScriptedBackend(
            [
                {"match": base, "response": reply},
                {"match": f"{base} attempt=2", "response": reply},
                {"match": f"{base} attempt=3", "response": reply},
            ]
        )
        with pytest.raises(MalformedExtractionError) as excinfo:
            extract_arguments(transcript_opposing(), ISSUE, backend, essay=ESSAY)
        assert "Sarah" in str(excinfo.value)

    def test_retry_recovers_from_broken_json(self):
        base = args_tag()
        backend = ScriptedBackend(
            [
                {"match": base, "response": "not json at all"},
                {"match": f"{base} attempt=2", "response": FIGURE_ARGS},
            ]
        )
        arguments = extract_arguments(transcript_opposing(), ISSUE, backend, essay=ESSAY)
        assert len(arguments) == 3

    def test_ids_continue_past_existing(self):
        backend = figure_backend()
        arguments = extract_arguments(
            transcript_opposing(), ISSUE, backend, existing_ids=("A", "B", "C"), essay=ESSAY
        )
        assert [a.id for a in arguments] == ["D", "E", "F"]


class TestExtractAttacks:
    def make_args(self, n):
        return [
            Argument(chr(65 + i), "Mike", "issue", 1, f"claim {i}") for i in range(n)
        ]

    def test_single_argument_skips_model(self):
        attacks, warnings = extract_attacks(self.make_args(1), ScriptedBackend([]))
        assert attacks == [] and warnings == []

    def test_unknown_id_dropped_with_warning(self):
        reply = json.dumps(
            {
                "attacks": [
                    {"attacker": "A", "target": "Z", "rationale": "r"},
                    {"attacker": "B", "target": "A", "rationale": "r2"},
                ]
            }
        )
        backend = ScriptedBackend(
            [{"match": make_tag(turn="extract_attacks", essay=essay_digest(""), dim="issue", phase="initial", n_args=2), "response": reply}]
        )
        attacks, warnings = extract_attacks(
            self.make_args(2), backend, dimension_key="issue"
        )
        assert [(a.attacker, a.target) for a in attacks] == [("B", "A")]
        assert len(warnings) == 1 and "Z" in warnings[0]

    def test_unknown_id_strict_mode_raises(self):
        reply = json.dumps({"attacks": [{"attacker": "A", "target": "Z", "rationale": "r"}]})
        backend = ScriptedBackend(
            [{"match": make_tag(turn="extract_attacks", essay=essay_digest(""), dim="issue", phase="initial", n_args=2), "response": reply}]
        )
        with pytest.raises(UnknownArgumentIdError):
            extract_attacks(
                self.make_args(2),
                backend,
                policy=ExtractionPolicy(unknown_attack_ids="error"),
                dimension_key="issue",
            )

    def test_duplicate_pairs_collapse(self):
        reply = json.dumps(
            {
                "attacks": [
                    {"attacker": "A", "target": "B", "rationale": "first"},
                    {"attacker": "A", "target": "B", "rationale": "second"},
                ]
            }
        )
        backend = ScriptedBackend(
            [{"match": make_tag(turn="extract_attacks", essay=essay_digest(""), dim="issue", phase="initial", n_args=2), "response": reply}]
        )
        attacks, _ = extract_attacks(self.make_args(2), backend, dimension_key="issue")
        assert len(attacks) == 1
        assert attacks[0].rationale == "first"


class TestEvaluateDimension:
    def test_figure_scenario_accepts_a_and_c(self):
        entry = evaluate_dimension(ESSAY, ISSUE, transcript_opposing(), figure_backend())
        assert entry.accepted_argument_ids == ("A", "C")
        assert entry.grade.level == 1
        assert "A" in entry.feedback_text and "C" in entry.feedback_text
        assert not entry.contested and not entry.level_overridden
        # the persisted framework really does select {A, C}
        assert entry.extension.members == frozenset({"A", "C"})
        assert is_complete(entry.framework, entry.extension.members)

    def test_unanimous_no_attacks_accepts_everything(self):
        transcript = (
            Transcript()
            .with_entry("Mike", 0, "level: 2\nThorough.")
            .with_entry("Sarah", 0, "level: 2\nAgreed, thorough.")
        )
        args_reply = json.dumps(
            {
                "arguments": [
                    {"author": "Mike", "proposed_level": 2, "claim": "Thorough issue framing."},
                    {"author": "Sarah", "proposed_level": 2, "claim": "Comprehensive background."},
                ]
            }
        )
        backend = ScriptedBackend(
            [
                {"match": args_tag(), "response": args_reply},
                {"match": attacks_tag(2), "response": json.dumps({"attacks": []})},
                {"match": synth_tag("A,B"), "response": "level: 2\nBoth reviewers found depth."},
            ]
        )
        entry = evaluate_dimension(ESSAY, ISSUE, transcript, backend)
        assert entry.accepted_argument_ids == ("A", "B")
        assert entry.grade.level == 2

    def test_three_cycle_falls_back_to_contested(self):
        transcript = (
            Transcript()
            .with_entry("Mike", 0, "level: 2\nStrong.")
            .with_entry("Sarah", 0, "level: 1\nMiddling.")
            .with_entry("Tom", 0, "level: 1\nAlso middling.")
        )
        args_reply = json.dumps(
            {
                "arguments": [
                    {"author": "Mike", "proposed_level": 2, "claim": "a"},
                    {"author": "Sarah", "proposed_level": 1, "claim": "b"},
                    {"author": "Tom", "proposed_level": 1, "claim": "c"},
                ]
            }
        )
        attacks_reply = json.dumps(
            {
                "attacks": [
                    {"attacker": "A", "target": "B", "rationale": "r"},
                    {"attacker": "B", "target": "C", "rationale": "r"},
                    {"attacker": "C", "target": "A", "rationale": "r"},
                ]
            }
        )
        backend = ScriptedBackend(
            [
                {"match": args_tag(), "response": args_reply},
                {"match": attacks_tag(3), "response": attacks_reply},
            ]
        )
        entry = evaluate_dimension(ESSAY, ISSUE, transcript, backend)
        assert entry.contested is True
        assert entry.accepted_argument_ids == ()
        # mode of initial levels {2, 1, 1} is 1
        assert entry.grade.level == 1
        assert "contested" in entry.feedback_text

    def test_contested_tie_breaks_to_lower_level(self):
        transcript = (
            Transcript()
            .with_entry("Mike", 0, "level: 2\nStrong.")
            .with_entry("Sarah", 0, "level: 0\nWeak.")
        )
        args_reply = json.dumps(
            {
                "arguments": [
                    {"author": "Mike", "proposed_level": 2, "claim": "a"},
                    {"author": "Sarah", "proposed_level": 0, "claim": "b"},
                ]
            }
        )
        attacks_reply = json.dumps(
            {
                "attacks": [
                    {"attacker": "A", "target": "A", "rationale": "r", "self_contradiction": True},
                    {"attacker": "B", "target": "B", "rationale": "r", "self_contradiction": True},
                ]
            }
        )
        backend = ScriptedBackend(
            [
                {"match": args_tag(), "response": args_reply},
                {"match": attacks_tag(2), "response": attacks_reply},
            ]
        )
        entry = evaluate_dimension(ESSAY, ISSUE, transcript, backend)
        assert entry.contested and entry.grade.level == 0

    def test_synthesis_level_outside_accepted_set_is_overridden(self):
        backend = figure_backend()
        exchanges = [
            {"match": args_tag(), "response": FIGURE_ARGS},
            {"match": attacks_tag(3), "response": FIGURE_ATTACKS},
            {"match": synth_tag("A,C"), "response": "level: 2\nGenerous reading."},
        ]
        entry = evaluate_dimension(ESSAY, ISSUE, transcript_opposing(), ScriptedBackend(exchanges))
        assert entry.level_overridden is True
        assert entry.grade.level == 1  # accepted claims propose only level 1
        assert any("overridden" in w for w in entry.warnings)

    def test_rerun_is_identical(self):
        first = evaluate_dimension(ESSAY, ISSUE, transcript_opposing(), figure_backend())
        second = evaluate_dimension(ESSAY, ISSUE, transcript_opposing(), figure_backend())
        assert first == second

    def test_merge_retains_prior_claims_and_attacks(self):
        prior = evaluate_dimension(ESSAY, ISSUE, transcript_opposing(), figure_backend())
        challenge_transcript = (
            Transcript()
            .with_entry("Mike", 0, "level: 1\nStill level 1.")
            .with_entry("Sarah", 0, "level: 1\nStill level 1.")
            .with_entry("student", 0, "I deserve level 2; my framing is comprehensive.")
            .with_entry("Mike", 1, "The framing lacks background; the challenge fails.")
            .with_entry("Sarah", 1, "Agreed, the challenge fails.")
        )
        new_args = json.dumps(
            {
                "arguments": [
                    {"author": "student", "proposed_level": 2, "claim": "Comprehensive framing deserves 2."},
                    {"author": "Mike", "proposed_level": 1, "claim": "Background is missing; level 1 stands."},
                    {"author": "Sarah", "proposed_level": 1, "claim": "The challenge overstates the framing."},
                ]
            }
        )
        new_attacks = json.dumps(
            {
                "attacks": [
                    {"attacker": "D", "target": "A", "rationale": "Student rejects level 1."},
                    {"attacker": "D", "target": "C", "rationale": "Student rejects level 1."},
                    {"attacker": "E", "target": "D", "rationale": "Missing background defeats the claim."},
                    {"attacker": "F", "target": "D", "rationale": "Overstatement defeats the claim."},
                ]
            }
        )
        backend = ScriptedBackend(
            [
                {"match": args_tag("challenge1"), "response": new_args},
                {"match": attacks_tag(6, "challenge1"), "response": new_attacks},
                {
                    "match": synth_tag("A,C,E,F", "challenge1"),
                    "response": "level: 1\nThe challenge was considered and rebutted; level 1 stands.",
                },
            ]
        )
        entry = evaluate_dimension(
            ESSAY, ISSUE, challenge_transcript, backend, prior=prior, phase="challenge1"
        )
        assert set(a.id for a in entry.arguments) == {"A", "B", "C", "D", "E", "F"}
        assert entry.accepted_argument_ids == ("A", "C", "E", "F")
        assert entry.grade.level == 1
        # prior attacks are still present
        assert ("A", "B") in {(a.attacker, a.target) for a in entry.attacks}
        # the defeated student claim is visible but rejected
        assert "D" not in entry.accepted_argument_ids


class TestSerialization:
    def test_round_trip(self):
        entry = evaluate_dimension(ESSAY, ISSUE, transcript_opposing(), figure_backend())
        payload = dimension_report_to_payload(entry)
        again = dimension_report_from_payload(json.loads(json.dumps(payload)))
        assert again == entry

    def test_payload_accepted_matches_extension(self):
        entry = evaluate_dimension(ESSAY, ISSUE, transcript_opposing(), figure_backend())
        payload = dimension_report_to_payload(entry)
        assert payload["accepted_argument_ids"] == sorted(payload["extension"]["members"])

    def test_grounded_annotation_possible_from_snapshot(self):
        entry = evaluate_dimension(ESSAY, ISSUE, transcript_opposing(), figure_backend())
        core = grounded(entry.framework).members
        assert core == frozenset({"A", "C"})


class TestTypes:
    def test_reviewer_argument_needs_level(self):
        with pytest.raises(ValueError):
            Argument("A", "Mike", "issue", None, "text")

    def test_student_argument_level_optional(self):
        Argument("A", "student", "issue", None, "text")

    def test_self_attack_requires_flag(self):
        with pytest.raises(ValueError):
            AttackRelation("A", "A", "r")
        AttackRelation("A", "A", "r", self_contradiction=True)

    def test_report_entry_lookup(self):
        entry = evaluate_dimension(ESSAY, ISSUE, transcript_opposing(), figure_backend())
        report = FeedbackReport((entry,))
        assert report.entry("issue") is entry
        with pytest.raises(KeyError):
            report.entry("style")
