"""Monte-Carlo checks of the double-sampling and compression-to-PAC bounds.

Randomness comes from numpy's Philox counter-based bit generator.  Trial ``t``
of an experiment with seed ``s`` uses ``Philox(SeedSequence([s, t]))``, so a
trial's draws depend only on (seed, trial index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
import numpy as np

from .compression import SchemeParams, count_side_info, compress_with_trace, recursive_reconstruct
from .concept_core import ConceptClass, LabeledSample, vc_dimension
from .metric_packing import Distribution

_PREC_DIGITS = 50


def _round_up(x: mpmath.mpf) -> float:
    f = float(x)
    return f if mpmath.mpf(f) >= x else math.nextafter(f, math.inf)


def ds_bound(m: int, d: int, eps) -> float:
    """2 (2m+1)^d (1 - eps/4)^m, rounded up to a float."""
    eps = Fraction(eps)
    if m < 1 or d < 0 or not (0 < eps <= 1):
        raise ValueError("need m >= 1, d >= 0 and eps in (0, 1]")
    with mpmath.workdps(_PREC_DIGITS):
        e = mpmath.mpf(eps.numerator) / eps.denominator
        val = 2 * mpmath.mpf(2 * m + 1) ** d * (1 - e / 4) ** m
        return _round_up(val)


def lw_bound(m: int, k: int, qsize: int, eps) -> float:
    """|Q| * sum_{j<=k} C(m, j) (1-eps)^(m-j), rounded up to a float."""
    eps = Fraction(eps)
    if not 0 <= k <= m:
        raise ValueError("need 0 <= k <= m")
    if qsize < 1:
        raise ValueError("qsize must be positive")
    if not (0 < eps <= 1):
        raise ValueError("eps must lie in (0, 1]")
    with mpmath.workdps(_PREC_DIGITS):
        q = 1 - mpmath.mpf(eps.numerator) / eps.denominator
        val = qsize * mpmath.fsum(mpmath.binomial(m, j) * q ** (m - j) for j in range(k + 1))
        return _round_up(val)


def smallest_m(d: int, eps, delta: float, m_max: int = 10**6) -> int:
    for m in range(1, m_max + 1):
        if ds_bound(m, d, eps) < delta:
            return m
    raise ValueError("no m below m_max meets the target")


@dataclass(frozen=True)
class PacExperiment:
    cls: ConceptClass
    target: int
    mu: Distribution
    m: int
    eps: Fraction
    trials: int
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.trials < 1:
            raise ValueError("m and trials must be positive")
        if not (0 < self.eps):
            raise ValueError("eps must be positive")
        if self.target not in self.cls.rows:
            raise ValueError("target concept is not in the class")
        if len(self.mu.weights) != self.cls.n:
            raise ValueError("distribution does not match the domain")


@dataclass(frozen=True)
class BoundReport:
    learner: str
    failures: int
    trials: int
    bound: float
    extra: dict = field(default_factory=dict)

    @property
    def rate(self) -> float:
        return self.failures / self.trials

    @property
    def stderr(self) -> float:
        p = self.rate
        return math.sqrt(p * (1 - p) / self.trials)

    @property
    def ci(self) -> tuple[float, float]:
        return max(0.0, self.rate - 3 * self.stderr), min(1.0, self.rate + 3 * self.stderr)

    @property
    def passed(self) -> bool:
        return self.ci[0] <= self.bound

    def to_json(self) -> dict:
        lo, hi = self.ci
        return {
            "learner": self.learner,
            "failures": self.failures,
            "trials": self.trials,
            "rate": self.rate,
            "ci_low": lo,
            "ci_high": hi,
            "bound": self.bound,
            "verdict": "pass" if self.passed else "fail",
            **self.extra,
        }

    def csv_row(self, m: int, eps) -> str:
        return f"{self.learner},{m},{eps},{self.trials},{self.failures},{self.rate!r},{self.bound!r},{'pass' if self.passed else 'fail'}"


CSV_HEADER = "learner,m,eps,trials,failures,rate,bound,verdict"


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial])))


def draw_sample(exp: PacExperiment, trial: int) -> np.ndarray:
    """m i.i.d. domain positions drawn from mu (with replacement)."""
    w = np.asarray(exp.mu.weights, dtype=np.float64)
    return trial_rng(exp.seed, trial).choice(exp.cls.n, size=exp.m, p=w / w.sum())


def _positions_mask(pos: np.ndarray) -> int:
    m = 0
    for j in set(int(p) for p in pos):
        m |= 1 << j
    return m


def simulate_consistency_failure(exp: PacExperiment) -> BoundReport:
    """Rate at which some eps-far concept stays consistent with the sample."""
    C, c, mu = exp.cls, exp.target, exp.mu
    # concepts at exact distance > eps, as disagreement masks
    bad = [c ^ r for r in C.rows if Fraction(mu.mass(c ^ r), mu.total) > exp.eps]
    failures = 0
    for t in range(exp.trials):
        seen = _positions_mask(draw_sample(exp, t))
        if any(not (diff & seen) for diff in bad):
            failures += 1
    d = vc_dimension(C)
    eps_b = min(exp.eps, Fraction(1))
    return BoundReport("consistent", failures, exp.trials, ds_bound(exp.m, d, eps_b), {"vc": d})


def simulate_compression_learner(exp: PacExperiment, params: SchemeParams | None = None) -> BoundReport:
    """Rate at which rho(kappa(sample)) is eps-far from the target."""
    params = params or SchemeParams()
    C, c, mu = exp.cls, exp.target, exp.mu
    failures = 0
    k_max = 0
    T_max = 0
    for t in range(exp.trials):
        seen = _positions_mask(draw_sample(exp, t))
        pts = [C.points[j] for j in range(C.n) if (seen >> j) & 1]
        y = {p: C.bit(c, p) for p in pts}
        cs, _ = compress_with_trace(C, LabeledSample.from_dict(y), params)
        h = recursive_reconstruct(C, cs, params)
        k_max = max(k_max, len(cs.kept))
        T_max = max(T_max, cs.info.T)
        if Fraction(mu.mass(h ^ c), mu.total) > exp.eps:
            failures += 1
    if params.is_base(C):
        # the base scheme never keeps more than floor(log2 |C|) points and uses
        # no side information, so the a-priori size is known exactly
        k, T, k_source = (len(C).bit_length() - 1), 0, "base-scheme"
    else:
        k, T, k_source = k_max, T_max, "observed"
    qsize = count_side_info(T, k)
    eps_b = min(exp.eps, Fraction(1))
    bound = lw_bound(exp.m, min(k, exp.m), qsize, eps_b)
    return BoundReport("compression", failures, exp.trials, bound,
                       {"k": k, "T": T, "qsize": qsize, "k_source": k_source,
                        "observed_k": k_max, "observed_T": T_max})
