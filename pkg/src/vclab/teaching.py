"""Teaching sets and the recursive teaching dimension."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from itertools import combinations

from .concept_core import ConceptClass, vc_dimension

INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class TeachingReport:
    concept: int
    points: tuple[int, ...]
    method: str
    trace: tuple[dict, ...] = field(default=(), compare=False)

    @property
    def size(self) -> int:
        return len(self.points)

    def to_json(self, C: ConceptClass) -> dict:
        return {
            "concept": C.rows.index(self.concept),
            "concept_bits": _bits(C, self.concept),
            "method": self.method,
            "set": list(self.points),
            "size": self.size,
            "trace": list(self.trace),
        }


@dataclass(frozen=True)
class RTDecomposition:
    """Layers of (concept, minimum teaching set) pairs, peeled in order."""

    layers: tuple[tuple[tuple[int, tuple[int, ...]], ...], ...]

    @property
    def dimension(self) -> int:
        return max((len(ts) for layer in self.layers for _, ts in layer), default=0)

    def to_json(self, C: ConceptClass) -> dict:
        return {
            "rt_dimension": self.dimension,
            "layers": [
                {
                    "size": len(layer[0][1]),
                    "members": [
                        {"concept": C.rows.index(c), "concept_bits": _bits(C, c), "set": list(ts)}
                        for c, ts in layer
                    ],
                }
                for layer in self.layers
            ],
        }


def _bits(C: ConceptClass, row: int) -> str:
    return "".join(str((row >> j) & 1) for j in range(C.n))


def _require_member(C: ConceptClass, c: int):
    if c not in C.rows:
        raise ValueError("concept is not in the class")


def is_teaching_set(C: ConceptClass, c: int, Y) -> bool:
    _require_member(C, c)
    mask = C.mask_of(Y)
    want = c & mask
    return sum(1 for r in C.rows if r & mask == want) == 1


def _disagreements(C: ConceptClass, c: int, rows=None) -> list[int]:
    return [c ^ r for r in (C.rows if rows is None else rows) if r != c]


def _disjoint_lower_bound(sets: list[int]) -> int:
    used = 0
    count = 0
    for s in sorted(sets, key=lambda m: bin(m).count("1")):
        if not s & used:
            used |= s
            count += 1
    return count


def _hitting_set_of_size(sets: list[int], n: int, k: int) -> int | None:
    """Lexicographically smallest set of exactly-or-fewer ``k`` positions hitting all sets.

    Positions are chosen in increasing order, so the first solution found by
    the depth-first search is the lexicographically smallest of size ``<= k``
    whose elements, read in increasing order, come first.
    """
    def search(start: int, chosen: int, left: int, unhit: list[int]) -> int | None:
        if not unhit:
            return chosen
        if left == 0:
            return None
        # a set with no position >= start can no longer be hit
        floor = (1 << start) - 1
        if any(not (s & ~floor) for s in unhit):
            return None
        if _disjoint_lower_bound(unhit) > left:
            return None
        # the smallest unhit set must be hit by some position >= start; branch
        # only over positions in increasing order
        for j in range(start, n):
            bit = 1 << j
            rest = [s for s in unhit if not s & bit]
            got = search(j + 1, chosen | bit, left - 1, rest)
            if got is not None:
                return got
        return None

    return search(0, 0, k, [s for s in sets])


def _mask_points(C: ConceptClass, mask: int) -> tuple[int, ...]:
    return tuple(C.points[j] for j in range(C.n) if (mask >> j) & 1)


def min_teaching_set(C: ConceptClass, c: int, cap: int | None = None) -> tuple[int, ...] | None:
    """Minimum teaching set of ``c`` (lexicographically smallest among minima).

    Solved as a minimum hitting set of the disagreement sets by iterative
    deepening with disjoint-set lower bounds.  Returns ``None`` when the
    minimum exceeds ``cap``.
    """
    _require_member(C, c)
    sets = _disagreements(C, c)
    if not sets:
        return ()
    lo = _disjoint_lower_bound(sets)
    hi = C.n if cap is None else min(cap, C.n)
    for k in range(lo, hi + 1):
        # iterative deepening: a size-<=k search can only succeed with exactly k
        # points here because size k-1 failed
        got = _hitting_set_of_size(sets, C.n, k)
        if got is not None:
            return _mask_points(C, got)
    return None


def min_teaching_set_naive(C: ConceptClass, c: int) -> tuple[int, ...]:
    """Brute-force oracle: first teaching set in (size, lexicographic) order."""
    _require_member(C, c)
    for k in range(C.n + 1):
        for Y in combinations(C.points, k):
            if is_teaching_set(C, c, Y):
                return Y
    raise AssertionError("the full domain is always a teaching set")


def halving_teaching_concept(C: ConceptClass) -> TeachingReport:
    if not C.rows:
        raise ValueError("empty class")
    rows = list(C.rows)
    chosen = []
    trace = []
    while len(rows) > 1:
        for p in C.points:
            j = C.position[p]
            ones = [r for r in rows if (r >> j) & 1]
            if 0 < len(ones) < len(rows):
                break
        zeros = [r for r in rows if not (r >> j) & 1]
        keep, label = (ones, 1) if len(ones) < len(zeros) else (zeros, 0)
        chosen.append(p)
        trace.append({"point": p, "label": label, "remaining": len(keep)})
        rows = keep
    return TeachingReport(rows[0], tuple(sorted(chosen)), "halving", tuple(trace))


def default_fallback_threshold(d: int) -> int:
    """(4e^2)^(d 2^(d+2)), clamped to the int64 range."""
    exponent = d * 2 ** (d + 2)
    log_val = exponent * math.log(4 * math.e**2)
    if log_val >= math.log(INT64_MAX):
        return INT64_MAX
    return int(math.exp(log_val))


def pair_elimination_teaching(C: ConceptClass, fallback_threshold: int | None = None) -> TeachingReport:
    """Pair-elimination construction followed by halving.

    While the class is above ``fallback_threshold``, label the pair of points
    (x, x') with labels (b, b') whose agreeing sub-class is the smallest
    nonempty proper one, and keep only that sub-class.
    """
    if not C.rows:
        raise ValueError("empty class")
    d = vc_dimension(C)
    if fallback_threshold is None:
        fallback_threshold = default_fallback_threshold(d)
    rows = list(C.rows)
    labels: dict[int, int] = {}
    trace = []
    guarantee_exp = d * 2 ** (d + 2)
    while len(rows) > fallback_threshold:
        best = None
        for x in C.points:
            jx = C.position[x]
            for x2 in C.points:
                if x2 == x:
                    continue
                j2 = C.position[x2]
                for b in (0, 1):
                    for b2 in (0, 1):
                        size = sum(1 for r in rows if (r >> jx) & 1 == b and (r >> j2) & 1 == b2)
                        if 0 < size < len(rows):
                            key = (size, x, x2, b, b2)
                            if best is None or key < best:
                                best = key
        if best is None:
            break
        size, x, x2, b, b2 = best
        jx, j2 = C.position[x], C.position[x2]
        before = len(rows)
        if d >= 2 and math.log(before) > guarantee_exp * math.log(4 * math.e**2):  # pragma: no cover
            assert size <= before ** (1 - 1 / guarantee_exp)
        rows = [r for r in rows if (r >> jx) & 1 == b and (r >> j2) & 1 == b2]
        labels[x] = b
        labels[x2] = b2
        trace.append({"pair": [x, x2], "labels": [b, b2], "before": before, "after": len(rows)})
    rest = halving_teaching_concept(C.filter(rows))
    pts = tuple(sorted(set(labels) | set(rest.points)))
    return TeachingReport(rest.concept, pts, "pair", tuple(trace))


def rt_dimension(C: ConceptClass) -> tuple[int, RTDecomposition]:
    if not C.rows:
        raise ValueError("empty class")
    remaining = list(C.rows)
    layers = []
    while remaining:
        sub = C.filter(remaining)
        cap = halving_teaching_concept(sub).size
        found: dict[int, tuple[int, ...]] = {}
        for c in sub.rows:
            ts = min_teaching_set(sub, c, cap)
            if ts is None:
                continue
            if len(ts) < cap:
                cap = len(ts)
                found = {k: v for k, v in found.items() if len(v) <= cap}
            found[c] = ts
        layer = tuple((c, found[c]) for c in sub.rows if c in found and len(found[c]) == cap)
        layers.append(layer)
        gone = {c for c, _ in layer}
        remaining = [r for r in remaining if r not in gone]
    deco = RTDecomposition(tuple(layers))
    return deco.dimension, deco


def is_36_class(C: ConceptClass) -> bool:
    for triple in combinations(C.points, 3):
        mask = C.mask_of(triple)
        if len({r & mask for r in C.rows}) > 6:
            return False
    return True


def _vc1_teaching(C: ConceptClass) -> tuple[int, tuple[int, ...]]:
    if len(C) == 1:
        return C.rows[0], ()
    for c in C.rows:
        for p in C.points:
            if is_teaching_set(C, c, (p,)):
                return c, (p,)
    raise AssertionError("class of VC-dimension <= 1 without a size-1 teaching set")


def quadrant_teaching(C: ConceptClass) -> TeachingReport:
    """A concept with a teaching set of size at most 3 in a (3,6) class."""
    if not C.rows:
        raise ValueError("empty class")
    if not is_36_class(C):
        raise ValueError("class is not a (3,6) class")
    if vc_dimension(C) <= 1:
        c, ts = _vc1_teaching(C)
        return TeachingReport(c, ts, "quadrant")
    best = None
    for x, x2 in combinations(C.points, 2):
        jx, j2 = C.position[x], C.position[x2]
        quads = {}
        for r in C.rows:
            quads.setdefault(((r >> jx) & 1, (r >> j2) & 1), []).append(r)
        if len(quads) < 4:
            continue
        for (b, b2), rows in sorted(quads.items()):
            key = (len(rows), x, x2, b, b2)
            if best is None or key < best[0]:
                best = (key, rows)
    (size, x, x2, b, b2), rows = best
    quadrant = C.filter(rows)
    if vc_dimension(quadrant) > 1:
        raise AssertionError("minimal quadrant of a (3,6) class has VC-dimension > 1")
    c, ts = _vc1_teaching(quadrant)
    pts = tuple(sorted({x, x2, *ts}))
    trace = ({"pair": [x, x2], "labels": [b, b2], "quadrant_size": size},)
    return TeachingReport(c, pts, "quadrant", trace)
