"""Sample compression schemes: majority-halving base scheme, rank scheme, and
the recursive scheme with side information (f, T) built on dual packings.

Samples and kept sets are handled internally as ``{point: label}`` dicts; the
public entry points accept and return :class:`LabeledSample` and
:class:`CompressedSample`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, perm

from .concept_core import ConceptClass, LabeledSample, vc_dimension
from .metric_packing import DualApprox, Epsilon, dual_approx_set, epsilon_of

INT64_MAX = 2**63 - 1
# (4e^2)^9: the smallest default threshold (VC = 0, d = 2).
_MIN_DEFAULT_THRESHOLD = int((4 * math.e**2) ** 9)


class UnrealizableSample(ValueError):
    """No concept of the class is consistent with the sample."""


class MalformedSideInfo(ValueError):
    """Side information violates its structural invariants."""


class NotInImage(Exception):
    """Reconstruction input cannot have been produced by the compressor."""


def default_base_threshold(vc: int) -> int:
    """(4e^2)^(d 2^d + 1) with d = vc + 2, clamped to the int64 range."""
    d = vc + 2
    log_val = (d * 2**d + 1) * math.log(4 * math.e**2)
    if log_val >= math.log(INT64_MAX):
        return INT64_MAX
    return int(math.exp(log_val))


@dataclass(frozen=True)
class SchemeParams:
    """``base_threshold=None`` selects (4e^2)^(d 2^d + 1), d = vc + 2, at every level."""

    base_threshold: int | None = None

    def __post_init__(self):
        if self.base_threshold is not None and self.base_threshold < 2:
            raise ValueError("base_threshold must be at least 2")

    def is_base(self, C: ConceptClass) -> bool:
        if self.base_threshold is not None:
            return len(C) <= self.base_threshold
        if len(C) <= _MIN_DEFAULT_THRESHOLD:
            return True
        return len(C) <= default_base_threshold(vc_dimension(C))

    def kept_slack(self) -> int:
        """Bound on |Z| - T: the base scheme keeps at most floor(log2 threshold) points."""
        thr = self.base_threshold if self.base_threshold is not None else INT64_MAX
        return math.ceil(math.log2(thr)) + 1


@dataclass(frozen=True)
class SideInfo:
    T: int
    f: tuple[tuple[int, int], ...] = ()

    def as_dict(self) -> dict[int, int]:
        return dict(self.f)


@dataclass(frozen=True)
class CompressedSample:
    kept: LabeledSample
    info: SideInfo

    def to_json(self) -> dict:
        return {
            "T": self.info.T,
            "Z": [[p, b] for p, b in zip(self.kept.points, self.kept.labels)],
            "f": [[t, p] for t, p in sorted(self.info.f)],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True, separators=(",", ":"))

    def to_bytes(self) -> bytes:
        return self.dumps().encode("ascii")

    @classmethod
    def from_json(cls, doc: dict) -> "CompressedSample":
        try:
            Z = {int(p): int(b) for p, b in doc["Z"]}
            if len(Z) != len(doc["Z"]):
                raise MalformedSideInfo("repeated point in Z")
            f = tuple(sorted((int(t), int(p)) for t, p in doc["f"]))
            T = int(doc["T"])
        except (KeyError, TypeError, ValueError) as exc:
            if isinstance(exc, MalformedSideInfo):
                raise
            raise MalformedSideInfo(f"bad compressed sample: {exc}") from exc
        return cls(LabeledSample.from_dict(Z), SideInfo(T, f))

    @classmethod
    def loads(cls, text: str | bytes) -> "CompressedSample":
        return cls.from_json(json.loads(text))


def check_side_info(cs: CompressedSample) -> None:
    """Raise :class:`MalformedSideInfo` unless (f, T) is structurally valid."""
    T = cs.info.T
    if T < 0:
        raise MalformedSideInfo("T must be nonnegative")
    ts = [t for t, _ in cs.info.f]
    if len(set(ts)) != len(ts):
        raise MalformedSideInfo("f assigns a level twice")
    if any(t < 0 or t > T for t in ts):
        raise MalformedSideInfo("f defined outside {0..T}")
    vals = [p for _, p in cs.info.f]
    if len(set(vals)) != len(vals):
        raise MalformedSideInfo("f is not injective")
    Z = set(cs.kept.points)
    if any(p not in Z for p in vals):
        raise MalformedSideInfo("f maps outside the kept points")
    if T == 0 and cs.info.f:
        raise MalformedSideInfo("f must be empty when T = 0")


# ---------------------------------------------------------------------------
# base scheme


@lru_cache(maxsize=1 << 16)
def _majority(rows: tuple[int, ...], n: int) -> int:
    h = 0
    size = len(rows)
    for j in range(n):
        ones = 0
        for r in rows:
            ones += (r >> j) & 1
        if 2 * ones >= size:
            h |= 1 << j
    return h


@lru_cache(maxsize=1 << 16)
def _keep(rows: tuple[int, ...], j: int, b: int) -> tuple[int, ...]:
    return tuple(r for r in rows if (r >> j) & 1 == b)


def _halving_run(C: ConceptClass, labels: dict[int, int]):
    """Shared loop: filter by the smallest labeled point disagreeing with the majority."""
    V = C.rows
    order = sorted(labels)
    pivots = []
    while True:
        if not V:
            return None, pivots
        h = _majority(V, C.n)
        for p in order:
            j = C.position[p]
            if (h >> j) & 1 != labels[p]:
                break
        else:
            return h, pivots
        pivots.append(p)
        V = _keep(V, j, labels[p])


def base_compress_dict(C: ConceptClass, y: dict[int, int]) -> dict[int, int]:
    if not C.consistent(y):
        raise UnrealizableSample("sample is not realized by the class")
    h, pivots = _halving_run(C, y)
    return {p: y[p] for p in pivots}


def base_reconstruct_dict(C: ConceptClass, kept: dict[int, int]) -> tuple[int, list[int]]:
    """Return (hypothesis mask, pivot points visited)."""
    h, pivots = _halving_run(C, kept)
    if h is None:
        raise NotInImage("kept points are inconsistent with every replay state")
    return h, pivots


def base_compress(C: ConceptClass, sample: LabeledSample) -> LabeledSample:
    return LabeledSample.from_dict(base_compress_dict(C, sample.as_dict()))


def base_reconstruct(C: ConceptClass, kept: LabeledSample) -> int:
    return base_reconstruct_dict(C, kept.as_dict())[0]


# ---------------------------------------------------------------------------
# rank scheme


def _spanning_points(C: ConceptClass, Y: list[int]) -> list[int]:
    """Points of Y (in order) whose columns of C|_Y form a basis of the column space."""
    sub = C.project(Y)
    cols = {p: [Fraction(sub.bit(r, p)) for r in sub.rows] for p in Y}
    basis: list[tuple[int, list[Fraction]]] = []  # (pivot row, reduced vector)
    chosen = []
    for p in sorted(Y):
        v = list(cols[p])
        for piv, b in basis:
            if v[piv] != 0:
                f = v[piv] / b[piv]
                v = [a - f * c for a, c in zip(v, b)]
        piv = next((i for i, a in enumerate(v) if a != 0), None)
        if piv is not None:
            basis.append((piv, v))
            chosen.append(p)
    return chosen


def rank_compress(C: ConceptClass, sample: LabeledSample) -> LabeledSample:
    y = sample.as_dict()
    if not y:
        return LabeledSample((), ())
    if not C.consistent(y):
        raise UnrealizableSample("sample is not realized by the class")
    Z = _spanning_points(C, list(y))
    return LabeledSample.from_dict({p: y[p] for p in Z})


def rank_reconstruct(C: ConceptClass, kept: LabeledSample) -> int:
    rows = C.consistent(kept.as_dict())
    if not rows:
        raise NotInImage("no concept is consistent with the kept sample")
    return rows[0]


# ---------------------------------------------------------------------------
# recursive scheme


@dataclass(frozen=True)
class LevelData:
    vc: int
    eps: Epsilon
    approx: DualApprox


@lru_cache(maxsize=1 << 14)
def level_data(C: ConceptClass) -> LevelData:
    """epsilon, A* and rounding for a non-base level; a pure function of C."""
    vc = vc_dimension(C)
    eps = epsilon_of(len(C), vc + 2)
    return LevelData(vc, eps, dual_approx_set(C, eps))


@dataclass
class Level:
    """One step of a compression trace."""

    case: str  # "base", "case1", "case2"
    cls: ConceptClass
    sample: dict[int, int]
    T: int = 0
    f_at_T: int | None = None
    sub_size: int | None = None
    approx_size: int | None = None
    witness: tuple[int, int] | None = None
    kept_size: int = 0
    guard: str | None = None

    def to_json(self) -> dict:
        out = {
            "case": self.case,
            "class_size": len(self.cls),
            "n": self.cls.n,
            "sample_size": len(self.sample),
            "T": self.T,
            "kept_size": self.kept_size,
        }
        if self.case != "base":
            lv = level_data(self.cls)
            out["eps"] = lv.eps.to_json()
            out["eps_float"] = float(lv.eps)
            out["approx_size"] = self.approx_size
        if self.case == "case1":
            out["x"], out["r_x"] = self.witness
            out["sub_class_size"] = self.sub_size
        if self.guard:
            out["guard"] = self.guard
        return out


def _case1_subclass(C: ConceptClass, x: int, rx: int, bx: int, brx: int) -> ConceptClass:
    jx, jr = C.position[x], C.position[rx]
    rows = [r for r in C.rows if (r >> jx) & 1 == bx and (r >> jr) & 1 == brx]
    sub = C.filter(rows)
    return sub.project(p for p in C.points if p not in (x, rx))


def _compress(C, y, params, trace):
    if not y or params.is_base(C):
        kept = base_compress_dict(C, y)
        trace.append(Level("base", C, y, T=0, kept_size=len(kept),
                           guard=None if y or params.is_base(C) else "empty-sample"))
        return kept, {}, 0
    consistent = C.consistent(y)
    if not consistent:
        raise UnrealizableSample("sample is not realized by the class")
    lv = level_data(C)
    r = lv.approx.rounding
    level = Level("case2", C, y, approx_size=len(lv.approx))
    trace.append(level)

    for x in sorted(y):
        rx = r[x]
        if rx == x:
            continue
        jx, jr = C.position[x], C.position[rx]
        c = next((c for c in consistent if (c >> jx) & 1 != (c >> jr) & 1), None)
        if c is None:
            continue
        bx, brx = (c >> jx) & 1, (c >> jr) & 1
        assert bx == y[x] and brx == 1 - y[x]
        sub = _case1_subclass(C, x, rx, bx, brx)
        y2 = {p: b for p, b in y.items() if p not in (x, rx)}
        level.case = "case1"
        level.witness = (x, rx)
        level.sub_size = len(sub)
        kept, f, T = _compress(sub, y2, params, trace)
        kept = dict(kept)
        kept[x] = y[x]
        T += 1
        f = dict(f)
        f[T] = x
        level.T, level.f_at_T, level.kept_size = T, x, len(kept)
        return kept, f, T

    P = lv.approx.points
    if len(P) >= C.n:
        # packing merged no columns: recursion cannot shrink the domain
        trace.pop()
        kept = base_compress_dict(C, y)
        trace.append(Level("base", C, y, T=0, kept_size=len(kept), guard="no-shrink"))
        return kept, {}, 0
    s: dict[int, int] = {}
    for x in sorted(y):
        s.setdefault(r[x], x)
    y2 = {xp: y[s[xp]] for xp in s}
    sub = C.project(P)
    kept2, f2, T2 = _compress(sub, y2, params, trace)
    kept = {s[xp]: b for xp, b in kept2.items()}
    f = {t: s[p] for t, p in f2.items()}
    T = T2 + 1
    level.T, level.kept_size = T, len(kept)
    return kept, f, T


def compress_with_trace(C: ConceptClass, sample: LabeledSample, params: SchemeParams | None = None):
    """Return (CompressedSample, list of Level records, outermost first)."""
    params = params or SchemeParams()
    y = sample.as_dict()
    if not y:
        raise ValueError("sample must be nonempty")
    if any(p not in C.position for p in y):
        raise ValueError("sample points outside the domain")
    trace: list[Level] = []
    kept, f, T = _compress(C, y, params, trace)
    cs = CompressedSample(LabeledSample.from_dict(kept), SideInfo(T, tuple(sorted(f.items()))))
    return cs, trace


def recursive_compress(C: ConceptClass, sample: LabeledSample, params: SchemeParams | None = None) -> CompressedSample:
    return compress_with_trace(C, sample, params)[0]


def _reconstruct(C, Z, f, T) -> dict[int, int]:
    if T == 0:
        h, _ = base_reconstruct_dict(C, Z)
        return {p: (h >> C.position[p]) & 1 for p in C.points}
    if len(C) < 2:
        raise NotInImage("recursion below a single concept")
    lv = level_data(C)
    r = lv.approx.rounding
    f_low = {t: p for t, p in f.items() if t < T}
    if T in f:
        x = f[T]
        rx = r[x]
        if rx == x or rx in Z:
            raise NotInImage("case-1 marker on a point that cannot trigger it")
        sub = _case1_subclass(C, x, rx, Z[x], 1 - Z[x])
        if not sub.rows:
            raise NotInImage("empty case-1 sub-class")
        Z2 = {p: b for p, b in Z.items() if p not in (x, rx)}
        if any(p not in Z2 for p in f_low.values()):
            raise NotInImage("side information refers to removed points")
        h2 = _reconstruct(sub, Z2, f_low, T - 1)
        h = dict(h2)
        h[x] = Z[x]
        h[rx] = 1 - Z[x]
        return h
    P = lv.approx.points
    if len(P) >= C.n:
        raise NotInImage("case-2 level where the packing does not shrink the domain")
    s: dict[int, int] = {}
    for x in sorted(Z):
        s.setdefault(r[x], x)
    if len(s) != len(Z):
        raise NotInImage("kept points collide under rounding")
    Z2 = {xp: Z[s[xp]] for xp in s}
    f2 = {t: r[p] for t, p in f_low.items()}
    h2 = _reconstruct(C.project(P), Z2, f2, T - 1)
    return {p: h2[r[p]] for p in C.points}


def recursive_reconstruct(C: ConceptClass, cs: CompressedSample, params: SchemeParams | None = None) -> int:
    """Hypothesis mask over ``C.points``.

    Malformed side information raises; structurally valid inputs outside the
    compressor's image map to the first concept of ``C``.
    """
    check_side_info(cs)
    Z = cs.kept.as_dict()
    if any(p not in C.position for p in Z):
        raise MalformedSideInfo("kept point outside the domain")
    try:
        h = _reconstruct(C, Z, cs.info.as_dict(), cs.info.T)
    except NotInImage:
        return C.rows[0]
    return C.mask_of(p for p, b in h.items() if b)


# ---------------------------------------------------------------------------
# size accounting


def count_side_info(T: int, k: int) -> int:
    """Number of (f, T') with T' <= T and f a partial injection {1..T'} -> Z, |Z| = k."""
    total = 0
    for t in range(T + 1):
        total += sum(comb(t, j) * perm(k, j) for j in range(min(t, k) + 1))
    return total


@dataclass(frozen=True)
class SizeReport:
    kept_size: int
    T: int
    levels: int
    cases: tuple[str, ...]
    side_info_bits: int
    log2_q: float
    trace: tuple[dict, ...] = field(default=(), compare=False)

    def to_json(self) -> dict:
        return {
            "kept_size": self.kept_size,
            "T": self.T,
            "levels": self.levels,
            "cases": list(self.cases),
            "side_info_bits": self.side_info_bits,
            "log2_q": self.log2_q,
            "trace": list(self.trace),
        }


def size_report(cs: CompressedSample, trace: list[Level]) -> SizeReport:
    info = json.dumps({"T": cs.info.T, "f": [list(e) for e in cs.info.f]},
                      sort_keys=True, separators=(",", ":"))
    return SizeReport(
        kept_size=len(cs.kept),
        T=cs.info.T,
        levels=len(trace),
        cases=tuple(lv.case for lv in trace),
        side_info_bits=8 * len(info),
        log2_q=math.log2(count_side_info(cs.info.T, len(cs.kept))),
        trace=tuple(lv.to_json() for lv in trace),
    )


# ---------------------------------------------------------------------------
# verification


def unfaithful_points(C: ConceptClass, y: dict[int, int], rounding: dict[int, int]) -> set[int]:
    """Points x of the sample for which some consistent concept has c(x) != c(r(x)).

    Deliberately a plain scan, independent of the compressor's search.
    """
    out = set()
    for row in C.rows:
        if any(C.bit(row, p) != b for p, b in y.items()):
            continue
        for x in y:
            if C.bit(row, x) != C.bit(row, rounding[x]):
                out.add(x)
    return out


def check_trace(trace: list[Level]) -> list[str]:
    """Per-level structural checks; returns a list of violation messages."""
    errs = []
    for i, lv in enumerate(trace):
        below = trace[i + 1] if i + 1 < len(trace) else None
        if lv.case == "base":
            if below is not None:
                errs.append(f"level {i}: base level is not last")
            if lv.T != 0:
                errs.append(f"level {i}: base level with T={lv.T}")
            if lv.kept_size > max(len(lv.cls), 1).bit_length() - 1:
                errs.append(f"level {i}: base kept {lv.kept_size} > floor(log2 |C|)")
            continue
        if below is None:
            errs.append(f"level {i}: recursion without a base level")
            continue
        if lv.T != below.T + 1:
            errs.append(f"level {i}: T does not grow by exactly 1")
        grow = lv.kept_size - below.kept_size
        if grow not in ((1,) if lv.case == "case1" else (0,)):
            errs.append(f"level {i}: kept size grew by {grow} in {lv.case}")
        data = level_data(lv.cls)
        W = unfaithful_points(lv.cls, lv.sample, data.approx.rounding)
        if (lv.f_at_T is not None) != bool(W):
            errs.append(f"level {i}: f defined at T disagrees with the unfaithful condition")
        if lv.f_at_T is not None and lv.f_at_T not in W:
            errs.append(f"level {i}: f(T)={lv.f_at_T} is not an unfaithful point")
        if lv.case == "case1":
            if not data.eps.times_at_least(lv.sub_size, len(lv.cls)):
                errs.append(f"level {i}: |C'|={lv.sub_size} > eps*|C| with |C|={len(lv.cls)}")
        else:
            if not lv.approx_size < lv.cls.n:
                errs.append(f"level {i}: |A*|={lv.approx_size} not < n={lv.cls.n}")
    return errs


def _iter_pairs(C: ConceptClass, budget: int, samples: int, seed: int):
    import random

    full = (1 << C.n) - 1
    if len(C) * full <= budget:
        for c in C.rows:
            for ymask in range(1, full + 1):
                yield c, ymask
        return
    rng = random.Random(seed)
    for _ in range(samples):
        yield rng.choice(C.rows), rng.randint(1, full)


def verify_scheme(C: ConceptClass, params: SchemeParams | None = None, budget: int = 10**6,
                  seed: int = 0, samples: int = 10_000, max_failures: int = 20) -> dict:
    """Check the recursive scheme on (concept, sample) pairs; failures are report entries."""
    params = params or SchemeParams()
    exhaustive = len(C) * ((1 << C.n) - 1) <= budget
    failures: list[dict] = []
    case_counts = {"base": 0, "case1": 0, "case2": 0}
    groups: dict[str, dict[int, int]] = {}
    collisions = 0
    checked = 0
    max_kept = 0
    max_T = 0
    first_cs = None

    counts: dict[str, int] = {}

    def fail(kind, c, Y, detail=""):
        counts[kind] = counts.get(kind, 0) + 1
        if len(failures) < max_failures:
            failures.append({"check": kind, "concept": C.rows.index(c), "points": Y, "detail": detail})

    for c, ymask in _iter_pairs(C, budget, samples, seed):
        Y = [C.points[j] for j in range(C.n) if (ymask >> j) & 1]
        y = {p: C.bit(c, p) for p in Y}
        cs, trace = compress_with_trace(C, LabeledSample.from_dict(y), params)
        first_cs = first_cs or cs
        checked += 1
        for lv in trace:
            case_counts[lv.case] += 1
        Z = cs.kept.as_dict()
        if not set(Z) <= set(Y):
            fail("Z_subset_Y", c, Y)
        if any(y.get(p) != b for p, b in Z.items()):
            fail("z_matches_y", c, Y)
        h = recursive_reconstruct(C, cs, params)
        if any(C.bit(h, p) != b for p, b in y.items()):
            fail("roundtrip", c, Y)
        try:
            check_side_info(cs)
        except MalformedSideInfo as exc:
            fail("side_info", c, Y, str(exc))
        if len(Z) > cs.info.T + params.kept_slack():
            fail("kept_bound", c, Y)
        rep = size_report(cs, trace)
        if rep.kept_size != len(Z) or rep.T != cs.info.T or rep.levels != cs.info.T + 1:
            fail("size_report", c, Y)
        if CompressedSample.loads(cs.to_bytes()) != cs or CompressedSample.loads(cs.dumps()).dumps() != cs.dumps():
            fail("serialization", c, Y)
        for msg in check_trace(trace):
            fail("trace", c, Y, msg)
        max_kept = max(max_kept, len(Z))
        max_T = max(max_T, cs.info.T)
        seen = groups.setdefault(cs.dumps(), {})
        if seen:
            collisions += 1
        for p, b in y.items():
            if seen.setdefault(p, b) != b:
                fail("group_consistency", c, Y, f"point {p}")
                break

    malformed_rejected = True
    if first_cs is not None:
        outside = next((p for p in C.points if p not in set(first_cs.kept.points)), -1)
        bad = CompressedSample(first_cs.kept, SideInfo(first_cs.info.T + 1,
                                                       first_cs.info.f + ((first_cs.info.T + 1, outside),)))
        try:
            recursive_reconstruct(C, bad, params)
            malformed_rejected = False
        except MalformedSideInfo:
            pass

    return {
        "base_threshold": params.base_threshold,
        "case_levels": case_counts,
        "checked": checked,
        "collisions": collisions,
        "exhaustive": exhaustive,
        "failure_counts": counts,
        "failures": failures,
        "malformed_rejected": malformed_rejected,
        "max_T": max_T,
        "max_kept": max_kept,
        "ok": not failures and malformed_rejected,
    }
