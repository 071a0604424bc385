"""Bundled scripted scenarios.

Every scenario here is a self-contained fixture: an essay, a rubric, and the
complete table of scripted backend exchanges for the whole pipeline run
(reviews, discussion rounds, claim/attack extraction, synthesis, and student
challenges). They make end-to-end runs fully deterministic, so they back the
test suite, the documented CLI walkthrough, and the sample evaluation corpus.

Run ``python -m argueval.demo --out DIR`` to write ready-to-use script and
config files for the CLI.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .backends import make_tag
from .discussion import AgentPersona
from .prompting import essay_digest
from .rubric import RubricDimension, default_rubric, find_dimension

PERSONAS = (AgentPersona("Mike", "positive"), AgentPersona("Sarah", "negative"))


@dataclass
class ScriptedScenario:
    name: str
    essay: str
    rubric: list[RubricDimension]
    exchanges: list[dict] = field(default_factory=list)
    challenges: dict[str, str] = field(default_factory=dict)
    expected: dict = field(default_factory=dict)

    def extend(self, exchanges: list[dict]) -> None:
        self.exchanges.extend(exchanges)


def _review_tag(essay: str, dim: str, persona: str, phase: str) -> str:
    return make_tag(
        turn="initial_review", essay=essay_digest(essay), dim=dim, persona=persona, phase=phase
    )


def _turn_tag(essay: str, dim: str, persona: str, round_no: int, phase: str) -> str:
    return make_tag(
        turn="discussion_turn",
        essay=essay_digest(essay),
        dim=dim,
        persona=persona,
        round=round_no,
        phase=phase,
    )


def _args_tag(essay: str, dim: str, phase: str) -> str:
    return make_tag(turn="extract_arguments", essay=essay_digest(essay), dim=dim, phase=phase)


def _attacks_tag(essay: str, dim: str, phase: str, n_args: int) -> str:
    return make_tag(
        turn="extract_attacks", essay=essay_digest(essay), dim=dim, phase=phase, n_args=n_args
    )


def _synth_tag(essay: str, dim: str, phase: str, accepted: list[str]) -> str:
    return make_tag(
        turn="synthesize",
        essay=essay_digest(essay),
        dim=dim,
        phase=phase,
        accepted=",".join(sorted(accepted)),
    )


def _challenge_tag(essay: str, dim: str, grade: int) -> str:
    return make_tag(turn="challenge", essay=essay_digest(essay), dim=dim, grade=grade)


def _discussion_block(
    essay: str,
    dim: str,
    phase: str,
    reviews: list[tuple[str, str]],
    rounds: list[list[tuple[str, str]]],
) -> list[dict]:
    out = [
        {"match": _review_tag(essay, dim, persona, phase), "response": text}
        for persona, text in reviews
    ]
    for round_no, turns in enumerate(rounds, start=1):
        out += [
            {"match": _turn_tag(essay, dim, persona, round_no, phase), "response": text}
            for persona, text in turns
        ]
    return out


def _teacher_block(
    essay: str,
    dim: str,
    phase: str,
    arguments: list[dict],
    attacks: list[dict],
    n_args: int,
    accepted: list[str] | None,
    synthesis: str | None,
) -> list[dict]:
    out = [
        {
            "match": _args_tag(essay, dim, phase),
            "response": json.dumps({"arguments": arguments}),
        }
    ]
    if n_args >= 2:
        out.append(
            {
                "match": _attacks_tag(essay, dim, phase, n_args),
                "response": json.dumps({"attacks": attacks}),
            }
        )
    if accepted is not None and synthesis is not None:
        out.append({"match": _synth_tag(essay, dim, phase, accepted), "response": synthesis})
    return out


def _claim(author: str, level: int | None, text: str) -> dict:
    return {"author": author, "proposed_level": level, "claim": text}


def _attack(attacker: str, target: str, rationale: str) -> dict:
    return {"attacker": attacker, "target": target, "rationale": rationale}


def _unanimous_dimension(
    scenario: ScriptedScenario, dim: str, level: int, phase: str = "initial"
) -> None:
    """Both reviewers agree immediately; everything is accepted."""
    essay = scenario.essay
    scenario.extend(
        _discussion_block(
            essay,
            dim,
            phase,
            reviews=[
                ("Mike", f"level: {level}\nThe {dim} work sits squarely at level {level}."),
                ("Sarah", f"level: {level}\nI read it the same way: level {level}."),
            ],
            rounds=[
                [
                    ("Mike", f"No disagreement to resolve; level {level} stands."),
                    ("Sarah", f"Agreed, level {level}."),
                ],
                [
                    ("Mike", f"Closing: level {level}."),
                    ("Sarah", f"Closing: level {level}."),
                ],
            ],
        )
    )
    scenario.extend(
        _teacher_block(
            essay,
            dim,
            phase,
            arguments=[
                _claim("Mike", level, f"The essay's {dim} merits level {level}."),
                _claim("Sarah", level, f"Independent reading also lands on level {level}."),
            ],
            attacks=[],
            n_args=2,
            accepted=["A", "B"],
            synthesis=(
                f"level: {level}\nBoth reviewers independently placed the {dim} at "
                f"level {level} (claims A and B), with no conflicting claims."
            ),
        )
    )


# --- golden scenario: opposing reviews, one concedes, accepted {A, C} --------

GOLDEN_ESSAY = (
    "Should cities replace street parking with protected bike lanes? I argue they "
    "should. Parking invites congestion, while protected lanes make cycling safe "
    "enough for commuters. Critics say shops lose customers, yet curbside data "
    "from several cities shows foot traffic rising after lanes arrive. Streets "
    "are for moving people, and the evidence favors the lane."
)

GOLDEN_CHALLENGE_TEXT = (
    "I believe the rubric was applied too strictly. My opening paragraph states "
    "the issue completely, so my grading should be level 2."
)


def golden_scenario() -> ScriptedScenario:
    """One dimension (issue), opposing reviewers, a concession after round 1,
    accepted set {A, C}, grade 1. The bundled challenge is defeated and the
    grade survives."""
    rubric = [find_dimension(default_rubric(), "issue")]
    scenario = ScriptedScenario("golden", GOLDEN_ESSAY, rubric)
    essay = scenario.essay

    scenario.extend(
        _discussion_block(
            essay,
            "issue",
            "initial",
            reviews=[
                (
                    "Mike",
                    "level: 1\nThe issue (parking versus protected lanes) is identified, "
                    "though terms like 'congestion' stay loose.",
                ),
                (
                    "Sarah",
                    "level: 0\nThe issue is merely mentioned in passing; I see no real "
                    "identification of the problem.",
                ),
            ],
            rounds=[
                [
                    (
                        "Mike",
                        "Sarah overlooks the opening question, which names the issue "
                        "explicitly. I maintain level 1.",
                    ),
                    (
                        "Sarah",
                        "Mike is right about the opening question; it does identify the "
                        "issue. I am convinced: level 1 is fair.",
                    ),
                ],
                [
                    ("Mike", "We now agree: identified but not deeply clarified. Level 1."),
                    ("Sarah", "Agreed, level 1."),
                ],
            ],
        )
    )
    scenario.extend(
        _teacher_block(
            essay,
            "issue",
            "initial",
            arguments=[
                _claim("Mike", 1, "The issue is identified by the opening question; level 1."),
                _claim("Sarah", 0, "The issue is only mentioned, not identified; level 0."),
                _claim(
                    "Sarah", 1, "After discussion: the opening question does identify the issue; level 1."
                ),
            ],
            attacks=[
                _attack("A", "B", "Identification directly contradicts mere mention."),
                _attack("B", "A", "Mere mention directly contradicts identification."),
                _attack("C", "B", "Sarah's revised stance retracts her opening claim."),
            ],
            n_args=3,
            accepted=["A", "C"],
            synthesis=(
                "level: 1\nThe issue is identified (accepted claims A and C agree on "
                "this), but key terms remain undefined, so the essay sits at level 1. "
                "Defining 'congestion' and scoping the claim would push it toward level 2."
            ),
        )
    )

    # Challenge: the student demands level 2; both reviewers rebut, the
    # student's claim D ends up attacked and undefended, grade unchanged.
    scenario.challenges["issue"] = GOLDEN_CHALLENGE_TEXT
    scenario.extend(
        _discussion_block(
            essay,
            "issue",
            "challenge1",
            reviews=[
                ("Mike", "level: 1\nRevisiting the essay, level 1 still fits."),
                ("Sarah", "level: 1\nMy revised stance stands: level 1."),
            ],
            rounds=[
                [
                    (
                        "Mike",
                        "The student's opening does state the issue, but level 2 requires "
                        "depth and background, which are absent. The challenge fails.",
                    ),
                    (
                        "Sarah",
                        "Agreed; completeness of one paragraph is not comprehensiveness. "
                        "Level 1 stands.",
                    ),
                ],
                [
                    ("Mike", "Nothing new raised; level 1."),
                    ("Sarah", "Level 1 confirmed."),
                ],
            ],
        )
    )
    scenario.extend(
        _teacher_block(
            essay,
            "issue",
            "challenge1",
            arguments=[
                _claim("student", 2, "The opening paragraph states the issue completely; level 2."),
                _claim("Mike", 1, "Level 2 needs depth and background, which the essay lacks."),
                _claim("Sarah", 1, "One complete paragraph is not comprehensive treatment."),
            ],
            attacks=[
                _attack("D", "A", "The student rejects the level 1 reading."),
                _attack("D", "C", "The student rejects the level 1 reading."),
                _attack("E", "D", "Missing depth and background defeats the level 2 claim."),
                _attack("F", "D", "Completeness is not comprehensiveness."),
            ],
            n_args=6,
            accepted=["A", "C", "E", "F"],
            synthesis=(
                "level: 1\nThe challenge was weighed: the student's claim (D) was "
                "rebutted by both reviewers (E, F), so the accepted position is "
                "unchanged and the grade remains level 1."
            ),
        )
    )
    scenario.expected = {
        "initial": {"issue": {"accepted": ["A", "C"], "level": 1}},
        "challenge": {"issue": {"accepted": ["A", "C", "E", "F"], "level": 1, "student_id": "D"}},
    }
    return scenario


# --- flip scenario: tie-break selects one claim, challenge overturns it ------

FLIP_ESSAY = (
    "Homework should be capped at one hour per night. Finnish schools assign "
    "little homework and still top comparisons, while a Stanford survey links "
    "heavy loads to stress without learning gains. Comparing those two sources "
    "with my own school's policy, the cap looks overdue."
)

FLIP_CHALLENGE_TEXT = (
    "The feedback ignores my sources: I cited the Finnish comparison and the "
    "Stanford survey and weighed them against each other. That is interpretation "
    "across multiple sources, so my grading should be level 2."
)


def flip_scenario() -> ScriptedScenario:
    """One dimension (evidence), no concession, equal-size extensions resolved
    by the tie-break. The bundled challenge leaves the student's claim
    undefended-against and flips the grade from 0 to 2."""
    rubric = [find_dimension(default_rubric(), "evidence")]
    scenario = ScriptedScenario("flip", FLIP_ESSAY, rubric)
    essay = scenario.essay

    scenario.extend(
        _discussion_block(
            essay,
            "evidence",
            "initial",
            reviews=[
                (
                    "Mike",
                    "level: 2\nTwo named sources are compared and weighed against local "
                    "policy; that is synthesis.",
                ),
                (
                    "Sarah",
                    "level: 0\nSources are name-dropped without interpretation; this "
                    "reads like a single borrowed example.",
                ),
            ],
            rounds=[
                [
                    ("Mike", "The comparison sentence is interpretation; I keep level 2."),
                    ("Sarah", "I still see no real evaluation; I keep level 0."),
                ],
                [
                    ("Mike", "We disagree; my reading stands."),
                    ("Sarah", "Likewise; level 0."),
                ],
            ],
        )
    )
    scenario.extend(
        _teacher_block(
            essay,
            "evidence",
            "initial",
            arguments=[
                _claim("Sarah", 0, "Sources are cited without interpretation; level 0."),
                _claim("Mike", 2, "Multiple sources are compared and synthesized; level 2."),
            ],
            attacks=[
                _attack("A", "B", "No interpretation contradicts synthesis."),
                _attack("B", "A", "Synthesis contradicts no interpretation."),
            ],
            n_args=2,
            accepted=["A"],
            synthesis=(
                "level: 0\nThe surviving claim (A) finds the sources cited without "
                "interpretation, so the evidence sits at level 0. Show how the two "
                "studies bear on each other to raise it."
            ),
        )
    )

    scenario.challenges["evidence"] = FLIP_CHALLENGE_TEXT
    scenario.extend(
        _discussion_block(
            essay,
            "evidence",
            "challenge1",
            reviews=[
                ("Mike", "level: 2\nAs before, I read the comparison as synthesis."),
                ("Sarah", "level: 0\nOpening position unchanged pending the discussion."),
            ],
            rounds=[
                [
                    (
                        "Mike",
                        "The student points at the exact comparison sentence; it weighs "
                        "the Finnish data against the survey. Level 2 is right.",
                    ),
                    (
                        "Sarah",
                        "I went back to the text; the comparison sentence does interpret "
                        "both sources. I concede: level 2.",
                    ),
                ],
                [
                    ("Mike", "Consensus reached: level 2."),
                    ("Sarah", "Yes, level 2."),
                ],
            ],
        )
    )
    scenario.extend(
        _teacher_block(
            essay,
            "evidence",
            "challenge1",
            arguments=[
                _claim("student", 2, "Two named sources are weighed against each other; level 2."),
                _claim("Mike", 2, "The comparison sentence is genuine synthesis; level 2."),
                _claim("Sarah", 2, "On re-reading, both sources are interpreted; level 2."),
            ],
            attacks=[
                _attack("C", "A", "Demonstrated interpretation defeats the no-interpretation claim."),
                _attack("D", "A", "The comparison sentence contradicts the level 0 reading."),
                _attack("E", "A", "Sarah withdraws her own earlier claim."),
            ],
            n_args=5,
            accepted=["B", "C", "D", "E"],
            synthesis=(
                "level: 2\nThe student's challenge (C) stood unrebutted and both "
                "reviewers now agree: the sources are interpreted and compared, "
                "so the evidence merits level 2."
            ),
        )
    )
    scenario.expected = {
        "initial": {"evidence": {"accepted": ["A"], "level": 0}},
        "challenge": {
            "evidence": {"accepted": ["B", "C", "D", "E"], "level": 2, "student_id": "C"}
        },
    }
    return scenario


# --- showcase scenario: the full default rubric ------------------------------

SHOWCASE_ESSAY = (
    "Social media platforms should verify the age of their users. The issue is "
    "whether verification protects teenagers or merely erodes privacy for "
    "everyone. A UK regulator report and a Pew survey both document harms to "
    "minors, though they disagree on scale; weighing them suggests the harms "
    "are real but concentrated. My position is that verification is justified "
    "for platforms whose recommendation systems target minors, a narrower rule "
    "than a blanket mandate. I conclude that age checks, scoped to those "
    "systems, follow from the evidence reviewed."
)


def showcase_scenario() -> ScriptedScenario:
    """The default four-dimension rubric end to end; the issue dimension gets
    the opposing-reviews treatment, the rest are unanimous. Includes one
    defeated challenge against the issue grade."""
    scenario = ScriptedScenario("showcase", SHOWCASE_ESSAY, default_rubric())
    essay = scenario.essay

    scenario.extend(
        _discussion_block(
            essay,
            "issue",
            "initial",
            reviews=[
                ("Mike", "level: 1\nThe issue is identified, though 'harms' stays vague."),
                ("Sarah", "level: 0\nThe issue is gestured at, not identified."),
            ],
            rounds=[
                [
                    ("Mike", "The second sentence states the issue outright; level 1 holds."),
                    ("Sarah", "Fair point about the second sentence; I accept level 1."),
                ],
                [
                    ("Mike", "Settled: level 1."),
                    ("Sarah", "Settled: level 1."),
                ],
            ],
        )
    )
    scenario.extend(
        _teacher_block(
            essay,
            "issue",
            "initial",
            arguments=[
                _claim("Mike", 1, "The issue is stated explicitly in the second sentence; level 1."),
                _claim("Sarah", 0, "The issue is only gestured at; level 0."),
                _claim("Sarah", 1, "Conceded: the second sentence does state the issue; level 1."),
            ],
            attacks=[
                _attack("A", "B", "Explicit statement contradicts mere gesture."),
                _attack("B", "A", "Mere gesture contradicts explicit statement."),
                _attack("C", "B", "The concession withdraws the opening claim."),
            ],
            n_args=3,
            accepted=["A", "C"],
            synthesis=(
                "level: 1\nThe issue is identified (claims A and C); defining the "
                "scale of 'harms' earlier would lift it to level 2."
            ),
        )
    )
    _unanimous_dimension(scenario, "evidence", 2)
    _unanimous_dimension(scenario, "position", 1)
    _unanimous_dimension(scenario, "conclusion", 0)

    scenario.challenges["issue"] = (
        "My second sentence frames the whole debate, so the issue dimension "
        "deserves level 2."
    )
    scenario.extend(
        _discussion_block(
            essay,
            "issue",
            "challenge1",
            reviews=[
                ("Mike", "level: 1\nStill level 1 on re-reading."),
                ("Sarah", "level: 1\nStill level 1."),
            ],
            rounds=[
                [
                    ("Mike", "Framing the debate is not the same as exploring its ambiguities."),
                    ("Sarah", "Agreed; background on both harms is missing. Level 1."),
                ],
                [
                    ("Mike", "Level 1 confirmed."),
                    ("Sarah", "Level 1 confirmed."),
                ],
            ],
        )
    )
    scenario.extend(
        _teacher_block(
            essay,
            "issue",
            "challenge1",
            arguments=[
                _claim("student", 2, "The second sentence frames the debate; level 2."),
                _claim("Mike", 1, "Framing is not exploring ambiguities; level 1."),
                _claim("Sarah", 1, "Background on the harms is missing; level 1."),
            ],
            attacks=[
                _attack("D", "A", "The student rejects the level 1 reading."),
                _attack("D", "C", "The student rejects the level 1 reading."),
                _attack("E", "D", "Ambiguities remain unexplored."),
                _attack("F", "D", "Missing background defeats the claim."),
            ],
            n_args=6,
            accepted=["A", "C", "E", "F"],
            synthesis=(
                "level: 1\nThe challenge (claim D) was rebutted on both counts "
                "(E, F); the issue grade remains level 1."
            ),
        )
    )
    scenario.expected = {
        "initial": {
            "issue": {"accepted": ["A", "C"], "level": 1},
            "evidence": {"accepted": ["A", "B"], "level": 2},
            "position": {"accepted": ["A", "B"], "level": 1},
            "conclusion": {"accepted": ["A", "B"], "level": 0},
        },
        "challenge": {"issue": {"accepted": ["A", "C", "E", "F"], "level": 1, "student_id": "D"}},
    }
    return scenario


# --- sample evaluation corpus -------------------------------------------------

# Per (essay index, dimension): (initially correct?, correct after challenge?).
# The harness smoke test hand-counts its metric expectations from this table.
OUTCOME_MATRIX: dict[str, list[tuple[bool, bool]]] = {
    "issue": [
        (True, True), (True, True), (True, True), (True, True), (True, True),
        (True, False), (False, True), (False, True), (False, True),
        (False, False), (False, False), (False, False),
    ],
    "evidence": [
        (True, True), (True, True), (True, True), (True, True), (True, True),
        (True, True), (True, True), (True, True), (True, False),
        (False, True), (False, False), (False, False),
    ],
    "position": [
        (True, True), (True, True), (True, True), (True, True), (True, True),
        (True, True), (True, True), (True, True), (True, True),
        (True, True), (True, True), (True, False),
    ],
    "conclusion": [
        (False, True), (False, True), (False, True), (False, True),
        (False, False), (False, False), (False, False), (False, False),
        (False, False), (False, False), (False, False), (False, False),
    ],
}

_SAMPLE_TOPICS = [
    ("e01", "school uniforms", "Uniforms mute income signals between students"),
    ("e02", "city congestion pricing", "Charging drivers at peak hours funds transit"),
    ("e03", "four day school weeks", "A shorter week trades seat time for rested attention"),
    ("e04", "public library funding", "Libraries double as the only free civic space left"),
    ("e05", "youth sports specialization", "Early single-sport focus raises injury rates"),
    ("e06", "community solar cooperatives", "Shared panels let renters join the grid shift"),
    ("e07", "standardized testing", "One exam day cannot carry a year of learning"),
    ("e08", "urban tree canopies", "Street trees cut summer cooling bills measurably"),
    ("e09", "school lunch sourcing", "Local produce contracts stabilize small farms"),
    ("e10", "curbside composting", "Food waste pickup halves landfill methane"),
    ("e11", "open source textbooks", "Free course texts remove a quiet dropout tax"),
    ("e12", "neighborhood speed limits", "Twenty mile limits save pedestrian lives"),
]

_LABEL_CYCLE = [
    {"issue": 1, "evidence": 2, "position": 1, "conclusion": 0},
    {"issue": 0, "evidence": 1, "position": 2, "conclusion": 1},
    {"issue": 2, "evidence": 0, "position": 1, "conclusion": 2},
    {"issue": 1, "evidence": 1, "position": 0, "conclusion": 1},
]


def sample_corpus() -> list[dict]:
    """Twelve short labeled essays used by the harness smoke tests."""
    corpus = []
    for i, (essay_id, topic, hook) in enumerate(_SAMPLE_TOPICS):
        text = (
            f"This essay takes up {topic}. {hook}, and the debate turns on whether "
            f"that gain outweighs the costs near home. Drawing on a city report and "
            f"a classroom survey, I weigh both sides and argue the benefits are "
            f"real but uneven. I conclude that {topic} deserves cautious support, "
            f"with results reviewed each year."
        )
        corpus.append({"id": essay_id, "text": text, "labels": dict(_LABEL_CYCLE[i % 4])})
    return corpus


def _wrong_level(truth: int, levels: int = 3) -> int:
    return truth + 1 if truth + 1 < levels else truth - 1


@dataclass
class EvalDemo:
    corpus: list[dict]
    exchanges: list[dict]
    outcomes: dict[str, list[tuple[bool, bool]]]

    def expected_record(self, essay: dict, dim: str, index: int) -> tuple[int, int, int]:
        truth = essay["labels"][dim]
        init_ok, post_ok = self.outcomes[dim][index]
        initial = truth if init_ok else _wrong_level(truth)
        if post_ok:
            post = truth
        elif init_ok:
            post = _wrong_level(truth)
        else:
            post = initial
        return initial, post, truth


def _trial_exchanges(essay_text: str, dim: str, initial: int, post: int) -> list[dict]:
    """Scripted exchanges for one single-dimension trial: evaluation, the
    simulated challenger, and the re-evaluation after the challenge."""
    out: list[dict] = []
    scenario = ScriptedScenario("trial", essay_text, [])
    _unanimous_dimension(scenario, dim, initial)
    out += scenario.exchanges

    demanded = _wrong_level(initial)
    out.append(
        {
            "match": _challenge_tag(essay_text, dim, initial),
            "response": (
                f"I disagree with level {initial} for {dim}; my essay clearly "
                f"deserves level {demanded}, and the feedback does not engage "
                f"with my strongest paragraph."
            ),
        }
    )

    survive = post == initial
    phase = "challenge1"
    out += _discussion_block(
        essay_text,
        dim,
        phase,
        reviews=[
            ("Mike", f"level: {initial}\nOn review my assessment is unchanged."),
            ("Sarah", f"level: {initial}\nSame reading as before."),
        ],
        rounds=[
            [
                (
                    "Mike",
                    "The challenge does not hold up against the text."
                    if survive
                    else f"The student is right; I move to level {post}.",
                ),
                (
                    "Sarah",
                    "Agreed, the original grade stands."
                    if survive
                    else f"Agreed, level {post} fits better.",
                ),
            ],
            [
                ("Mike", "Position unchanged." if survive else f"Settled at level {post}."),
                ("Sarah", "Position unchanged." if survive else f"Settled at level {post}."),
            ],
        ],
    )
    if survive:
        arguments = [
            _claim("student", demanded, f"The {dim} grade should be level {demanded}."),
            _claim("Mike", initial, "The challenge does not match the essay text."),
            _claim("Sarah", initial, "The original reading holds."),
        ]
        attacks = [
            _attack("C", "A", "The student rejects the original reading."),
            _attack("C", "B", "The student rejects the original reading."),
            _attack("D", "C", "The text does not support the demanded level."),
            _attack("E", "C", "The original reading survives scrutiny."),
        ]
        accepted = ["A", "B", "D", "E"]
        synthesis = (
            f"level: {initial}\nThe challenge (claim C) was rebutted by both "
            f"reviewers; level {initial} stands."
        )
    else:
        arguments = [
            _claim("student", post, f"The {dim} grade should be level {post}."),
            _claim("Mike", post, f"Conceded: level {post} fits the essay."),
            _claim("Sarah", post, f"Conceded: level {post}."),
        ]
        attacks = [
            _attack("C", "A", "The student's reading supersedes the original claim."),
            _attack("C", "B", "The student's reading supersedes the original claim."),
            _attack("D", "A", "Mike withdraws his earlier claim."),
            _attack("E", "B", "Sarah withdraws her earlier claim."),
        ]
        accepted = ["C", "D", "E"]
        synthesis = (
            f"level: {post}\nThe student's claim (C) stood unrebutted and both "
            f"reviewers conceded; the grade moves to level {post}."
        )
    out += _teacher_block(
        essay_text, dim, phase,
        arguments=arguments, attacks=attacks, n_args=5,
        accepted=accepted, synthesis=synthesis,
    )
    return out


def eval_demo() -> EvalDemo:
    """The sample corpus plus a complete script for all 48 trials."""
    corpus = sample_corpus()
    demo = EvalDemo(corpus, [], OUTCOME_MATRIX)
    for dim in ("issue", "evidence", "position", "conclusion"):
        for index, essay in enumerate(corpus):
            initial, post, _ = demo.expected_record(essay, dim, index)
            demo.exchanges += _trial_exchanges(essay["text"], dim, initial, post)
    return demo


# --- file emission -------------------------------------------------------------

def write_script(exchanges: list[dict], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for exchange in exchanges:
            handle.write(json.dumps(exchange, sort_keys=True, ensure_ascii=False) + "\n")


def write_corpus(corpus: list[dict], path: Path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in corpus:
            handle.write(json.dumps(record, sort_keys=True, ensure_ascii=False) + "\n")


def write_demo_files(out_dir: str | Path) -> dict[str, str]:
    """Write scripted configs, scripts, the sample corpus, and demo essays."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    showcase = showcase_scenario()
    demo = eval_demo()

    paths = {
        "showcase_script": out / "showcase_script.jsonl",
        "showcase_essay": out / "showcase_essay.txt",
        "eval_script": out / "eval_script.jsonl",
        "corpus": out / "sample_essays.jsonl",
        "grade_config": out / "grade_config.json",
        "eval_config": out / "eval_config.json",
        "challenger_config": out / "challenger_config.json",
    }
    write_script(showcase.exchanges, paths["showcase_script"])
    paths["showcase_essay"].write_text(showcase.essay + "\n", "utf-8")
    write_script(demo.exchanges, paths["eval_script"])
    write_corpus(demo.corpus, paths["corpus"])

    # script paths are resolved relative to the config file, which sits in
    # the same directory, so bare filenames keep the demo dir relocatable
    grade_config = {
        "backend": {"kind": "scripted", "script_path": paths["showcase_script"].name},
        "engine": {
            "personas": [{"name": "Mike", "bias": "positive"}, {"name": "Sarah", "bias": "negative"}],
            "deterministic": True,
        },
    }
    eval_config = {
        "backend": {"kind": "scripted", "script_path": paths["eval_script"].name},
        "engine": {
            "personas": [{"name": "Mike", "bias": "positive"}, {"name": "Sarah", "bias": "negative"}],
            "deterministic": True,
        },
    }
    challenger_config = {
        "backend": {"kind": "scripted", "script_path": paths["eval_script"].name}
    }
    paths["grade_config"].write_text(json.dumps(grade_config, indent=2) + "\n", "utf-8")
    paths["eval_config"].write_text(json.dumps(eval_config, indent=2) + "\n", "utf-8")
    paths["challenger_config"].write_text(json.dumps(challenger_config, indent=2) + "\n", "utf-8")
    return {k: str(v) for k, v in paths.items()}


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(description="Write bundled scripted demo files.")
    parser.add_argument("--out", required=True, help="output directory")
    args = parser.parse_args(argv)
    paths = write_demo_files(args.out)
    for name, path in sorted(paths.items()):
        print(f"{name}\t{path}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
