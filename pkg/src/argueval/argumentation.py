"""Abstract argumentation: frameworks, acceptance semantics, and extension selection.

A framework is a directed graph of arguments and binary attacks. A set of
arguments is conflict-free when it contains no internal attack, admissible
when it is conflict-free and defends each of its members, and complete when
it additionally contains every argument it defends. The grading pipeline
enumerates the complete extensions of each per-dimension framework and
selects the largest one as the accepted set.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Union

ArgId = Union[str, int]

DEFAULT_MAX_ARGUMENTS = 20

CONFLICT_FREE = "conflict_free"
ADMISSIBLE = "admissible"
COMPLETE = "complete"
GROUNDED = "grounded"
SELECTED_FINAL = "selected_final"


class UnknownArgumentError(ValueError):
    """A referenced argument id is not part of the framework."""


class FrameworkTooLargeError(ValueError):
    """Enumeration refused: the framework exceeds the argument cap."""


class EmptySelectionError(ValueError):
    """select_final was called with no candidate extensions."""


class AFParseError(ValueError):
    """The AF text document is malformed."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


@dataclass(frozen=True)
class ArgumentationFramework:
    """Immutable attack graph. Attack endpoints must be declared arguments.

    Self-attacks are legal; a self-attacking argument can never belong to an
    admissible set, but nothing in the definitions forbids the edge itself.
    """

    arguments: frozenset[ArgId]
    attacks: frozenset[tuple[ArgId, ArgId]]

    def __post_init__(self) -> None:
        for attacker, target in self.attacks:
            if attacker not in self.arguments or target not in self.arguments:
                raise UnknownArgumentError(
                    f"attack ({attacker!r}, {target!r}) references an unknown argument"
                )

    @classmethod
    def of(
        cls,
        arguments: Iterable[ArgId],
        attacks: Iterable[tuple[ArgId, ArgId]] = (),
    ) -> "ArgumentationFramework":
        return cls(frozenset(arguments), frozenset((a, b) for a, b in attacks))

    def attackers_of(self, target: ArgId) -> frozenset[ArgId]:
        return frozenset(a for a, b in self.attacks if b == target)

    def sorted_arguments(self) -> list[ArgId]:
        return sorted(self.arguments)


@dataclass(frozen=True)
class Extension:
    """A set of jointly acceptable arguments plus the predicate that produced it."""

    members: frozenset[ArgId]
    semantics_tag: str

    def sorted_members(self) -> list[ArgId]:
        return sorted(self.members)


def _require_subset(af: ArgumentationFramework, e: frozenset[ArgId] | set[ArgId]) -> None:
    unknown = set(e) - af.arguments
    if unknown:
        raise UnknownArgumentError(f"arguments not in framework: {sorted(unknown)!r}")


def is_conflict_free(af: ArgumentationFramework, e: Iterable[ArgId]) -> bool:
    """True iff no member of ``e`` attacks any member of ``e`` (itself included)."""
    members = frozenset(e)
    _require_subset(af, members)
    return not any(a in members and b in members for a, b in af.attacks)


def defends(af: ArgumentationFramework, e: Iterable[ArgId], a: ArgId) -> bool:
    """True iff every attacker of ``a`` is attacked by some member of ``e``."""
    members = frozenset(e)
    _require_subset(af, members)
    if a not in af.arguments:
        raise UnknownArgumentError(f"argument not in framework: {a!r}")
    attacked_by_e = {target for attacker, target in af.attacks if attacker in members}
    return all(attacker in attacked_by_e for attacker in af.attackers_of(a))


def is_admissible(af: ArgumentationFramework, e: Iterable[ArgId]) -> bool:
    """Conflict-free and self-defending. The empty set is vacuously admissible."""
    members = frozenset(e)
    if not is_conflict_free(af, members):
        return False
    return all(defends(af, members, a) for a in members)


def is_complete(af: ArgumentationFramework, e: Iterable[ArgId]) -> bool:
    """Admissible and containing every argument it defends."""
    members = frozenset(e)
    if not is_admissible(af, members):
        return False
    return all(a in members for a in af.arguments if defends(af, members, a))


def enumerate_complete(
    af: ArgumentationFramework,
    max_arguments: int = DEFAULT_MAX_ARGUMENTS,
) -> list[Extension]:
    """All complete extensions, smallest first, then by sorted member ids.

    Backtracking search over conflict-free sets: an argument joins the
    candidate set only if it neither attacks nor is attacked by the set so
    far, which prunes every conflicting subtree early. Each surviving
    conflict-free set is then checked for completeness.
    """
    n = len(af.arguments)
    if n > max_arguments:
        raise FrameworkTooLargeError(
            f"framework has {n} arguments, enumeration cap is {max_arguments}"
        )
    order = af.sorted_arguments()
    index = {a: i for i, a in enumerate(order)}
    attacks_from = [0] * n
    attacks_to = [0] * n
    for attacker, target in af.attacks:
        attacks_from[index[attacker]] |= 1 << index[target]
        attacks_to[index[target]] |= 1 << index[attacker]

    full = (1 << n) - 1
    complete_masks: list[int] = []

    def defended_mask(attacked_by_set: int) -> int:
        out = 0
        for i in range(n):
            if attacks_to[i] & ~attacked_by_set == 0:
                out |= 1 << i
        return out

    def search(pos: int, members: int, attacked_by_set: int, attackers_of_set: int) -> None:
        if pos == n:
            if defended_mask(attacked_by_set) == members:
                complete_masks.append(members)
            return
        search(pos + 1, members, attacked_by_set, attackers_of_set)
        bit = 1 << pos
        conflicts = (
            attacked_by_set & bit
            or attackers_of_set & bit
            or attacks_from[pos] & (members | bit)
        )
        if not conflicts:
            search(
                pos + 1,
                members | bit,
                attacked_by_set | attacks_from[pos],
                attackers_of_set | attacks_to[pos],
            )

    search(0, 0, 0, 0)
    assert all(mask <= full for mask in complete_masks)

    def members_of(mask: int) -> tuple[ArgId, ...]:
        return tuple(order[i] for i in range(n) if mask & (1 << i))

    complete_masks.sort(key=lambda m: (bin(m).count("1"), members_of(m)))
    return [Extension(frozenset(members_of(m)), COMPLETE) for m in complete_masks]


def grounded(af: ArgumentationFramework) -> Extension:
    """Least fixed point of the defense operator, iterated up from the empty set.

    Equals the intersection of all complete extensions; used as a cross-check
    oracle and as the "always accepted" annotation, never for grading.
    """
    current: frozenset[ArgId] = frozenset()
    while True:
        nxt = frozenset(a for a in af.arguments if defends(af, current, a))
        if nxt == current:
            return Extension(current, GROUNDED)
        current = nxt


def select_final(extensions: list[Extension]) -> Extension:
    """Largest extension; equal sizes break toward the smallest sorted member list.

    The tie-break makes repeated runs over the same framework replayable.
    """
    if not extensions:
        raise EmptySelectionError("no extensions to select from")
    for ext in extensions:
        if ext.semantics_tag != COMPLETE:
            raise ValueError(f"expected complete extensions, got tag {ext.semantics_tag!r}")
    winner = min(extensions, key=lambda e: (-len(e.members), e.sorted_members()))
    return Extension(winner.members, SELECTED_FINAL)


_HEADER_RE = re.compile(r"p\s+af\s+(\d+)")
_ATTACK_RE = re.compile(r"(\d+)\s+(\d+)")


def parse_af_text(text: str) -> ArgumentationFramework:
    """Parse the AF text format: header ``p af <n>``, then ``<i> <j>`` attack lines.

    Arguments are the integers 1..n. Lines starting with ``#`` and blank
    lines are ignored.
    """
    n: int | None = None
    attacks: list[tuple[int, int]] = []
    last_line = 0
    for line_no, raw in enumerate(text.splitlines(), 1):
        last_line = line_no
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if n is None:
            match = _HEADER_RE.fullmatch(line)
            if not match:
                raise AFParseError(f"expected header 'p af <n>', got {line!r}", line_no)
            n = int(match.group(1))
            continue
        match = _ATTACK_RE.fullmatch(line)
        if not match:
            raise AFParseError(f"expected attack '<i> <j>', got {line!r}", line_no)
        i, j = int(match.group(1)), int(match.group(2))
        if not (1 <= i <= n and 1 <= j <= n):
            raise AFParseError(f"attack ({i}, {j}) outside declared range 1..{n}", line_no)
        attacks.append((i, j))
    if n is None:
        raise AFParseError("missing header 'p af <n>'", last_line or 1)
    return ArgumentationFramework.of(range(1, n + 1), attacks)


def render_af_text(af: ArgumentationFramework) -> tuple[str, dict[str, ArgId]]:
    """Serialize any framework to AF text plus an index-to-id label map.

    Arguments are numbered 1..n in sorted id order so the rendering is stable;
    ``labels`` maps the printed index (as a string, for JSON friendliness)
    back to the original argument id.
    """
    order = af.sorted_arguments()
    index = {a: i + 1 for i, a in enumerate(order)}
    lines = [f"p af {len(order)}"]
    for attacker, target in sorted(af.attacks, key=lambda p: (index[p[0]], index[p[1]])):
        lines.append(f"{index[attacker]} {index[target]}")
    labels = {str(i + 1): a for i, a in enumerate(order)}
    return "\n".join(lines) + "\n", labels


def framework_from_snapshot(af_text: str, labels: dict[str, ArgId]) -> ArgumentationFramework:
    """Rebuild a framework from its rendered text and label map."""
    indexed = parse_af_text(af_text)
    try:
        arguments = [labels[str(i)] for i in indexed.sorted_arguments()]
        attacks = [(labels[str(a)], labels[str(b)]) for a, b in indexed.attacks]
    except KeyError as exc:
        raise UnknownArgumentError(f"label map is missing index {exc}") from exc
    return ArgumentationFramework.of(arguments, attacks)
