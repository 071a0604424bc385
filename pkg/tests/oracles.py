"""Independent brute-force oracles used to cross-check the solver.

These deliberately avoid the bitmask search in the production module: they
filter every subset of the argument set through the definitional predicates.
"""

from __future__ import annotations

import random
from itertools import chain, combinations
from typing import Iterable, Iterator

from argueval.argumentation import ArgumentationFramework, ArgId, is_complete


def powerset(items: Iterable[ArgId]) -> Iterator[tuple[ArgId, ...]]:
    pool = list(items)
    return chain.from_iterable(combinations(pool, r) for r in range(len(pool) + 1))


def brute_force_complete(af: ArgumentationFramework) -> set[frozenset[ArgId]]:
    """Every subset of the arguments that satisfies the completeness predicate."""
    return {
        frozenset(subset)
        for subset in powerset(af.sorted_arguments())
        if is_complete(af, subset)
    }


def all_frameworks(n: int) -> Iterator[ArgumentationFramework]:
    """Every framework over arguments 1..n (all 2^(n*n) attack relations)."""
    args = list(range(1, n + 1))
    pairs = [(a, b) for a in args for b in args]
    for mask in range(1 << len(pairs)):
        attacks = [pairs[i] for i in range(len(pairs)) if mask & (1 << i)]
        yield ArgumentationFramework.of(args, attacks)


def random_framework(n: int, rng: random.Random, density: float | None = None) -> ArgumentationFramework:
    args = list(range(1, n + 1))
    p = rng.random() if density is None else density
    attacks = [(a, b) for a in args for b in args if rng.random() < p]
    return ArgumentationFramework.of(args, attacks)


def oracle_select(complete_sets: set[frozenset[ArgId]]) -> frozenset[ArgId]:
    """Independent final-selection rule: maximum size, ties to the smallest
    sorted member list."""
    return min(complete_sets, key=lambda s: (-len(s), sorted(s)))
