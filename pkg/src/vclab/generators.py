"""Deterministic generators for structured and random concept classes."""

from __future__ import annotations

import random
from itertools import combinations

from .concept_core import ConceptClass

REJECTION_BUDGET = 10**6


class GenerationError(RuntimeError):
    """Rejection sampling ran out of candidate draws."""


def _check_n(n: int):
    if n < 1:
        raise ValueError("n must be at least 1")


def singletons_with_empty(n: int) -> ConceptClass:
    _check_n(n)
    return ConceptClass.build(range(n), [0] + [1 << j for j in range(n)])


def intervals(n: int) -> ConceptClass:
    """Indicators of contiguous runs i..j on 0..n-1, plus the empty set."""
    _check_n(n)
    rows = [0]
    for i in range(n):
        for j in range(i, n):
            rows.append(((1 << (j + 1)) - 1) ^ ((1 << i) - 1))
    return ConceptClass.build(range(n), rows)


def full_cube(n: int) -> ConceptClass:
    _check_n(n)
    return ConceptClass.build(range(n), range(1 << n))


def hamming_ball(n: int, d: int) -> ConceptClass:
    """All vectors of weight at most d: a maximum class of VC-dimension d."""
    _check_n(n)
    if not 0 <= d <= n:
        raise ValueError("need 0 <= d <= n")
    rows = [m for m in range(1 << n) if bin(m).count("1") <= d]
    return ConceptClass.build(range(n), rows)


def _check_size(n: int, size: int):
    _check_n(n)
    if not 1 <= size <= 1 << n:
        raise ValueError("size must lie in [1, 2^n]")


def random_class(n: int, size: int, seed: int) -> ConceptClass:
    _check_size(n, size)
    rng = random.Random(seed)
    return ConceptClass.build(range(n), rng.sample(range(1 << n), size))


def _grow(n: int, size: int, seed: int, accept) -> ConceptClass:
    rng = random.Random(seed)
    rows: list[int] = []
    have: set[int] = set()
    # rejections are permanent until the next acceptance
    rejected: set[int] = set()
    draws = 0
    while len(rows) < size:
        if draws >= REJECTION_BUDGET or len(rejected) + len(have) == 1 << n:
            raise GenerationError(f"rejection budget exhausted after {len(rows)} of {size} concepts")
        draws += 1
        cand = rng.randrange(1 << n)
        if cand in have or cand in rejected:
            continue
        if not accept(rows, cand):
            rejected.add(cand)
            continue
        rows.append(cand)
        have.add(cand)
        rejected.clear()
    return ConceptClass.build(range(n), rows)


def random_vc_bounded(n: int, d: int, size: int, seed: int) -> ConceptClass:
    """Random class of VC-dimension at most d, grown one accepted concept at a time."""
    _check_size(n, size)
    if d < 0:
        raise ValueError("d must be nonnegative")
    k = d + 1
    subsets = [sum(1 << j for j in S) for S in combinations(range(n), k)] if k <= n else []
    patterns: dict[int, set[int]] = {m: set() for m in subsets}
    full = 1 << k

    def accept(rows, cand):
        hit = [m for m in subsets if (cand & m) not in patterns[m]]
        if any(len(patterns[m]) + 1 == full for m in hit):
            return False
        for m in hit:
            patterns[m].add(cand & m)
        return True

    return _grow(n, size, seed, accept)


def random_36(n: int, size: int, seed: int) -> ConceptClass:
    """Random class with at most 6 patterns on every three points."""
    _check_size(n, size)
    triples = [sum(1 << j for j in S) for S in combinations(range(n), 3)]
    patterns: dict[int, set[int]] = {m: set() for m in triples}

    def accept(rows, cand):
        hit = [m for m in triples if (cand & m) not in patterns[m]]
        if any(len(patterns[m]) >= 6 for m in hit):
            return False
        for m in hit:
            patterns[m].add(cand & m)
        return True

    return _grow(n, size, seed, accept)


FAMILIES = {
    "singletons": lambda n, d, size, seed: singletons_with_empty(n),
    "intervals": lambda n, d, size, seed: intervals(n),
    "cube": lambda n, d, size, seed: full_cube(n),
    "ball": lambda n, d, size, seed: hamming_ball(n, d),
    "random": lambda n, d, size, seed: random_class(n, size, seed),
    "vc": lambda n, d, size, seed: random_vc_bounded(n, d, size, seed),
    "36": lambda n, d, size, seed: random_36(n, size, seed),
}


def generate(family: str, n: int, d: int | None = None, size: int | None = None, seed: int = 0) -> ConceptClass:
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {sorted(FAMILIES)}")
    if family in ("ball", "vc") and d is None:
        raise ValueError(f"family {family!r} needs d")
    if family in ("random", "vc", "36") and size is None:
        raise ValueError(f"family {family!r} needs size")
    return FAMILIES[family](n, d, size, seed)
