"""Finite boolean concept classes: representation, shattering, VC-dimension, duals.

A class is stored as a tuple of integer bitmasks.  Bit ``j`` of a row is the
label of ``points[j]``; ``points`` are the (sorted) identifiers of the domain
points, which stay stable under restriction so that sub-classes can always be
related back to the original domain.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property
from itertools import combinations
from math import comb
from typing import Iterable, Sequence


class ClassFormatError(ValueError):
    """Raised when a class file (or in-memory description) is malformed."""


def _lex_key(mask: int, n: int) -> int:
    # Bit-reverse so numeric order equals lexicographic order of the 0/1 string
    # read from point 0 onwards.
    out = 0
    for j in range(n):
        out = (out << 1) | ((mask >> j) & 1)
    return out


def mask_to_str(mask: int, n: int) -> str:
    return "".join("1" if (mask >> j) & 1 else "0" for j in range(n))


def str_to_mask(bits: str) -> int:
    mask = 0
    for j, ch in enumerate(bits):
        if ch == "1":
            mask |= 1 << j
        elif ch != "0":
            raise ClassFormatError(f"invalid character {ch!r} in row {bits!r}")
    return mask


@dataclass(frozen=True)
class LabeledSample:
    """Distinct domain points with aligned 0/1 labels."""

    points: tuple[int, ...]
    labels: tuple[int, ...]

    def __post_init__(self):
        if len(self.points) != len(self.labels):
            raise ValueError("points and labels differ in length")
        if len(set(self.points)) != len(self.points):
            raise ValueError("sample points must be distinct")
        if any(b not in (0, 1) for b in self.labels):
            raise ValueError("labels must be 0/1")

    @classmethod
    def from_dict(cls, labels: dict[int, int]) -> "LabeledSample":
        pts = tuple(sorted(labels))
        return cls(pts, tuple(int(labels[p]) for p in pts))

    def as_dict(self) -> dict[int, int]:
        return dict(zip(self.points, self.labels))

    def __len__(self) -> int:
        return len(self.points)


@dataclass(frozen=True, eq=True)
class ConceptClass:
    """A deduplicated, canonically ordered set of concepts over ``points``.

    Use :meth:`build` rather than the raw constructor; it deduplicates and
    sorts rows.  Concepts are bitmasks relative to the position of each point
    in ``points``.
    """

    points: tuple[int, ...]
    rows: tuple[int, ...]

    @classmethod
    def build(cls, points: Iterable[int], rows: Iterable[int]) -> "ConceptClass":
        pts = tuple(points)
        if len(set(pts)) != len(pts):
            raise ClassFormatError("domain points must be distinct")
        if list(pts) != sorted(pts):
            raise ClassFormatError("domain points must be listed in increasing order")
        n = len(pts)
        full = (1 << n) - 1
        uniq = {r for r in rows}
        if any(r & ~full for r in uniq):
            raise ClassFormatError("row has bits outside the domain")
        ordered = tuple(sorted(uniq, key=lambda r: _lex_key(r, n)))
        return cls(pts, ordered)

    @classmethod
    def from_strings(cls, rows: Sequence[str]) -> "ConceptClass":
        if not rows:
            raise ClassFormatError("empty class")
        n = len(rows[0])
        for r in rows:
            if len(r) != n:
                raise ClassFormatError(f"ragged row {r!r}: expected length {n}")
        return cls.build(range(n), (str_to_mask(r) for r in rows))

    @property
    def n(self) -> int:
        return len(self.points)

    def __len__(self) -> int:
        return len(self.rows)

    @cached_property
    def position(self) -> dict[int, int]:
        return {p: j for j, p in enumerate(self.points)}

    def bit(self, row: int, point: int) -> int:
        return (row >> self.position[point]) & 1

    def mask_of(self, pts: Iterable[int]) -> int:
        m = 0
        for p in pts:
            m |= 1 << self.position[p]
        return m

    def to_strings(self) -> list[str]:
        return [mask_to_str(r, self.n) for r in self.rows]

    def labels_on(self, row: int, pts: Iterable[int]) -> dict[int, int]:
        return {p: self.bit(row, p) for p in pts}

    def consistent(self, sample: dict[int, int]) -> list[int]:
        """Rows agreeing with ``sample`` (a point -> label mapping)."""
        care = 0
        want = 0
        for p, b in sample.items():
            j = self.position[p]
            care |= 1 << j
            if b:
                want |= 1 << j
        return [r for r in self.rows if r & care == want]

    def project(self, pts: Iterable[int]) -> "ConceptClass":
        """Restriction to ``pts``; the empty point set is allowed here."""
        sub = tuple(sorted(pts))
        idx = [self.position[p] for p in sub]
        new_rows = []
        for r in self.rows:
            m = 0
            for k, j in enumerate(idx):
                if (r >> j) & 1:
                    m |= 1 << k
            new_rows.append(m)
        return ConceptClass.build(sub, new_rows)

    def filter(self, rows: Iterable[int]) -> "ConceptClass":
        return ConceptClass.build(self.points, rows)

    def column(self, point: int) -> int:
        """Column of ``point`` as a bitmask over the concept index."""
        j = self.position[point]
        col = 0
        for i, r in enumerate(self.rows):
            if (r >> j) & 1:
                col |= 1 << i
        return col

    def to_json(self) -> dict:
        return {"n": self.n, "concepts": self.to_strings()}


def parse_class(text: str) -> tuple[ConceptClass, bool]:
    """Parse the text or JSON class format.

    Returns the class and a flag telling whether duplicate rows were dropped.
    """
    stripped = text.strip()
    if not stripped:
        raise ClassFormatError("empty class file")
    if stripped.startswith("{"):
        try:
            doc = json.loads(stripped)
        except json.JSONDecodeError as exc:
            raise ClassFormatError(f"bad JSON: {exc}") from exc
        rows = doc.get("concepts")
        if not isinstance(rows, list) or not rows:
            raise ClassFormatError("JSON class needs a nonempty 'concepts' list")
        if "n" in doc and any(len(r) != doc["n"] for r in rows):
            raise ClassFormatError("concept length disagrees with 'n'")
    else:
        rows = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            rows.append(line)
        if not rows:
            raise ClassFormatError("empty class file")
    cls = ConceptClass.from_strings(rows)
    return cls, len(cls) < len(rows)


def load_class(source: str) -> ConceptClass:
    return parse_class(source)[0]


def restrict(C: ConceptClass, Y: Iterable[int]) -> ConceptClass:
    Y = list(Y)
    if not Y:
        raise ValueError("restriction to an empty point set")
    bad = [p for p in Y if p not in C.position]
    if bad:
        raise ValueError(f"points {bad} are not in the domain")
    return C.project(Y)


def shatters(C: ConceptClass, Y: Iterable[int]) -> bool:
    Y = list(Y)
    if not C.rows:
        return False
    if not Y:
        return True
    mask = C.mask_of(Y)
    need = 1 << len(Y)
    seen = set()
    for r in C.rows:
        seen.add(r & mask)
        if len(seen) == need:
            return True
    return False


def vc_dimension(C: ConceptClass) -> int:
    if not C.rows:
        raise ValueError("VC-dimension of an empty class")
    # log2|C| caps the dimension; shattering is monotone so stop at the first
    # size with no shattered set.
    cap = min(C.n, len(C).bit_length() - 1)
    d = 0
    for k in range(1, cap + 1):
        if any(shatters(C, Y) for Y in combinations(C.points, k)):
            d = k
        else:
            break
    return d


def dual(C: ConceptClass) -> ConceptClass:
    """The dual class: one concept per distinct column, over the concept index."""
    if not C.rows:
        raise ValueError("dual of an empty class")
    cols = [C.column(p) for p in C.points]
    return ConceptClass.build(range(len(C)), cols)


def sauer_bound(n: int, d: int) -> int:
    if n < 0 or d < 0 or d > n:
        raise ValueError(f"need 0 <= d <= n, got n={n}, d={d}")
    return sum(comb(n, k) for k in range(d + 1))


def class_matrix_rank(C: ConceptClass) -> int:
    from fractions import Fraction

    rows = [[Fraction((r >> j) & 1) for j in range(C.n)] for r in C.rows]
    rank = 0
    ncols = C.n
    for col in range(ncols):
        pivot = next((i for i in range(rank, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        pv = rows[rank][col]
        for i in range(len(rows)):
            if i != rank and rows[i][col] != 0:
                f = rows[i][col] / pv
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank
