"""Distribution-induced distances, epsilon-separated sets and greedy packings.

Every comparison between a distance and epsilon is decided exactly.  Distances
are :class:`fractions.Fraction`; epsilon is either a Fraction or the symbolic
value ``size ** (-1/s)``, compared through integer powers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .concept_core import ConceptClass


@dataclass(frozen=True)
class Distribution:
    """Integer weights over the domain positions; probability = weight / total."""

    weights: tuple[int, ...]

    def __post_init__(self):
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be nonnegative")
        if sum(self.weights) <= 0:
            raise ValueError("total weight must be positive")

    @classmethod
    def uniform(cls, n: int) -> "Distribution":
        return cls((1,) * n)

    @classmethod
    def from_json(cls, text: str) -> "Distribution":
        doc = json.loads(text)
        w = doc.get("weights")
        if not isinstance(w, list) or not all(isinstance(x, int) for x in w):
            raise ValueError("distribution JSON needs an integer 'weights' list")
        return cls(tuple(w))

    @property
    def total(self) -> int:
        return sum(self.weights)

    def mass(self, mask: int) -> int:
        """Total weight of the positions set in ``mask``."""
        s = 0
        j = 0
        while mask:
            if mask & 1:
                s += self.weights[j]
            mask >>= 1
            j += 1
        return s


@dataclass(frozen=True)
class Epsilon:
    """Either an exact rational (``value``) or ``size ** (-1/s)``."""

    value: Fraction | None = None
    size: int | None = None
    s: int | None = None

    def __post_init__(self):
        if self.value is not None:
            if not (0 < self.value):
                raise ValueError("epsilon must be positive")
        elif self.size is None or self.s is None or self.size < 1 or self.s < 1:
            raise ValueError("symbolic epsilon needs size >= 1 and s >= 1")

    @classmethod
    def rational(cls, v) -> "Epsilon":
        return cls(value=Fraction(v))

    @classmethod
    def root(cls, size: int, s: int) -> "Epsilon":
        return cls(size=size, s=s)

    @property
    def is_symbolic(self) -> bool:
        return self.value is None

    def exact(self) -> Fraction | None:
        """The rational value, when there is one."""
        if self.value is not None:
            return self.value
        r = _integer_root(self.size, self.s)
        return Fraction(1, r) if r is not None else None

    def __float__(self) -> float:
        if self.value is not None:
            return float(self.value)
        return self.size ** (-1.0 / self.s)

    def cmp(self, q: Fraction) -> int:
        """Sign of ``q - epsilon``."""
        q = Fraction(q)
        if self.value is not None:
            return (q > self.value) - (q < self.value)
        if q <= 0:
            return -1
        # q > size^(-1/s)  <=>  p^s * size > den^s
        lhs = q.numerator ** self.s * self.size
        rhs = q.denominator ** self.s
        return (lhs > rhs) - (lhs < rhs)

    def exceeded_by(self, q) -> bool:
        return self.cmp(q) > 0

    def times_at_least(self, count: int, whole: int) -> bool:
        """Exact test of ``count <= epsilon * whole`` for nonnegative integers."""
        if self.value is not None:
            return count <= self.value * whole
        if count == 0:
            return True
        # count <= whole * size^(-1/s)  <=>  count^s * size <= whole^s
        return count ** self.s * self.size <= whole ** self.s

    def to_json(self):
        if self.value is not None:
            return str(self.value)
        return {"size": self.size, "s": self.s}

    def __str__(self) -> str:
        if self.value is not None:
            return str(self.value)
        return f"{self.size}^(-1/{self.s})"


def _integer_root(x: int, k: int) -> int | None:
    r = round(x ** (1.0 / k))
    for cand in (r - 1, r, r + 1):
        if cand >= 1 and cand ** k == x:
            return cand
    return None


def parse_epsilon(text: str) -> Epsilon:
    return Epsilon.rational(Fraction(text))


def epsilon_of(size: int, d: int) -> Epsilon:
    """Epsilon solving ``eps * size = (1/eps) ** (d * 2**d)``: ``size ** (-1/(d 2^d + 1))``."""
    if size < 2:
        raise ValueError("class size must be at least 2")
    if d < 0:
        raise ValueError("d must be nonnegative")
    return Epsilon.root(size, d * 2**d + 1)


def dist(c: int, c2: int, mu: Distribution, n: int | None = None) -> Fraction:
    if n is not None and n != len(mu.weights):
        raise ValueError("concept length does not match the distribution")
    if (c | c2) >> len(mu.weights):
        raise ValueError("concept longer than the distribution's domain")
    return Fraction(mu.mass(c ^ c2), mu.total)


def is_separated(S: Sequence[int], mu: Distribution, eps: Epsilon) -> bool:
    S = list(S)
    for i in range(len(S)):
        for j in range(i + 1, len(S)):
            if not eps.exceeded_by(dist(S[i], S[j], mu)):
                return False
    return True


@dataclass(frozen=True)
class Packing:
    """Greedy maximal epsilon-separated subset with its rounding map.

    ``members`` and ``rounding`` hold indices into the scanned sequence;
    ``rounding[i]`` is the first member (insertion order) within epsilon of
    item ``i``.
    """

    members: tuple[int, ...]
    rounding: tuple[int, ...]
    eps: Epsilon
    mu: Distribution

    def __len__(self) -> int:
        return len(self.members)


def greedy_scan(items: Sequence[int], mu: Distribution, eps: Epsilon) -> Packing:
    """Greedy packing over ``items`` in the given order."""
    if not items:
        raise ValueError("cannot pack an empty sequence")
    members: list[int] = []
    for i, v in enumerate(items):
        if all(eps.exceeded_by(dist(v, items[m], mu)) for m in members):
            members.append(i)
    rounding = []
    for v in items:
        for m in members:
            if not eps.exceeded_by(dist(v, items[m], mu)):
                rounding.append(m)
                break
        else:  # pragma: no cover - maximality makes this unreachable
            raise AssertionError("greedy packing is not maximal")
    return Packing(tuple(members), tuple(rounding), eps, mu)


def greedy_packing(C: ConceptClass, mu: Distribution | None, eps: Epsilon) -> Packing:
    """Greedy packing over the concepts of ``C`` in canonical order."""
    if not C.rows:
        raise ValueError("cannot pack an empty class")
    mu = mu or Distribution.uniform(C.n)
    if len(mu.weights) != C.n:
        raise ValueError("distribution length differs from the domain size")
    return greedy_scan(C.rows, mu, eps)


@dataclass(frozen=True)
class DualApprox:
    """A*(C, eps) seen both as dual concepts and as domain points.

    ``points`` are the representative domain points of the selected columns
    (increasing order); ``rounding`` maps every domain point to the
    representative of its rounding.
    """

    packing: Packing
    columns: tuple[int, ...]
    points: tuple[int, ...]
    rounding: dict[int, int] = field(hash=False, compare=False)

    def __len__(self) -> int:
        return len(self.points)


def dual_approx_set(C: ConceptClass, eps: Epsilon) -> DualApprox:
    """Greedy packing of the dual class under the uniform measure on ``C``.

    Columns are scanned in domain order, so the first column always enters.
    """
    if not C.rows:
        raise ValueError("dual approximating set of an empty class")
    cols = [C.column(p) for p in C.points]
    first_point: dict[int, int] = {}
    for p, col in zip(C.points, cols):
        first_point.setdefault(col, p)
    distinct = list(first_point)  # dict preserves domain order of first occurrence
    packing = greedy_scan(distinct, Distribution.uniform(len(C)), eps)
    rep = {i: first_point[distinct[i]] for i in range(len(distinct))}
    col_index = {col: i for i, col in enumerate(distinct)}
    rounding = {p: rep[packing.rounding[col_index[col]]] for p, col in zip(C.points, cols)}
    sel_points = tuple(sorted(rep[m] for m in packing.members))
    return DualApprox(packing, tuple(distinct[m] for m in packing.members), sel_points, rounding)


def haussler_bound(d: int, eps) -> tuple[float, float]:
    """Return (tight, weak) = (e(d+1)(2e/eps)^d, (4e^2/eps)^d)."""
    eps = float(eps)
    if d < 0:
        raise ValueError("d must be nonnegative")
    if not (0 < eps <= 1):
        raise ValueError("epsilon must lie in (0, 1]")
    tight = math.e * (d + 1) * (2 * math.e / eps) ** d
    weak = (4 * math.e**2 / eps) ** d
    return tight, weak


def weak_packing_bound(d: int, eps) -> float:
    """(30 d log(2d/eps) / eps)^d with natural log; d >= 1."""
    eps = float(eps)
    if d < 1:
        raise ValueError("d must be at least 1")
    return (30 * d * math.log(2 * d / eps) / eps) ** d


def bound_ceiling(x: float) -> int:
    """Integer ceiling with one ulp of slack upward, for integer comparisons."""
    return math.ceil(math.nextafter(x, math.inf))
