from fractions import Fraction
from math import comb

import pytest

from vclab.compression import SchemeParams
from vclab.concept_core import ConceptClass
from vclab.generators import intervals, singletons_with_empty
from vclab.metric_packing import Distribution
from vclab.pac_sim import (
    BoundReport,
    PacExperiment,
    draw_sample,
    ds_bound,
    lw_bound,
    simulate_compression_learner,
    simulate_consistency_failure,
    smallest_m,
)


def exact_lw(m, k, q, eps):
    eps = Fraction(eps)
    return q * sum(comb(m, j) * (1 - eps) ** (m - j) for j in range(k + 1))


def exact_ds(m, d, eps):
    return 2 * (2 * m + 1) ** d * (1 - Fraction(eps) / 4) ** m


def test_ds_small():
    assert ds_bound(1, 0, 1) == 1.5


@pytest.mark.parametrize("m,d,eps", [(10, 1, "1/2"), (100, 2, "1/4"), (238, 2, "1/4"), (7, 3, "1/3")])
def test_ds_matches_exact(m, d, eps):
    exact = exact_ds(m, d, eps)
    got = ds_bound(m, d, eps)
    assert Fraction(got) >= exact  # rounded up, never below
    assert got == pytest.approx(float(exact), rel=1e-15)


def test_smallest_m_is_minimal():
    m = smallest_m(2, Fraction(1, 2), 0.1)
    assert exact_ds(m, 2, "1/2") < Fraction(1, 10)
    assert exact_ds(m - 1, 2, "1/2") >= Fraction(1, 10)


def test_lw_examples():
    assert lw_bound(30, 0, 1, "1/4") == pytest.approx(0.75**30)
    exact = exact_lw(100, 2, 1, "1/5")
    got = lw_bound(100, 2, 1, Fraction(1, 5))
    assert Fraction(got) >= exact
    assert got == pytest.approx(float(exact), rel=1e-15)
    # k = m sums the full range
    assert lw_bound(6, 6, 3, "1/2") == pytest.approx(float(exact_lw(6, 6, 3, "1/2")))


@pytest.mark.parametrize("args", [(0, 1, "1/2"), (5, -1, "1/2"), (5, 1, "0"), (5, 1, "3/2")])
def test_ds_domain(args):
    with pytest.raises(ValueError):
        ds_bound(*args)


def test_lw_domain():
    with pytest.raises(ValueError):
        lw_bound(5, 6, 1, "1/2")
    with pytest.raises(ValueError):
        lw_bound(5, 1, 0, "1/2")


def test_report_interval():
    r = BoundReport("consistent", 50, 2000, 0.01)
    p = 50 / 2000
    half = 3 * (p * (1 - p) / 2000) ** 0.5
    assert r.ci == pytest.approx((p - half, p + half))
    assert r.passed == (p - half <= 0.01)
    assert BoundReport("consistent", 0, 100, 0.0).passed


def test_single_concept_never_fails():
    C = ConceptClass.from_strings(["0110"])
    exp = PacExperiment(C, C.rows[0], Distribution.uniform(4), 5, Fraction(1, 10), 50, 1)
    assert simulate_consistency_failure(exp).failures == 0


def test_eps_one_never_fails():
    C = intervals(6)
    exp = PacExperiment(C, C.rows[4], Distribution.uniform(6), 3, Fraction(1), 100, 2)
    assert simulate_consistency_failure(exp).failures == 0


def test_draws_depend_only_on_seed_and_trial():
    C = intervals(10)
    exp = PacExperiment(C, C.rows[3], Distribution.uniform(10), 12, Fraction(1, 4), 5, 99)
    a = [draw_sample(exp, t).tolist() for t in range(5)]
    b = [draw_sample(exp, t).tolist() for t in reversed(range(5))][::-1]
    assert a == b
    other = PacExperiment(C, C.rows[3], Distribution.uniform(10), 12, Fraction(1, 4), 5, 100)
    assert draw_sample(other, 0).tolist() != a[0]


def test_skewed_distribution_respected():
    C = intervals(4)
    mu = Distribution((0, 0, 1, 0))
    exp = PacExperiment(C, C.rows[1], mu, 20, Fraction(1, 4), 3, 0)
    assert set(draw_sample(exp, 0).tolist()) == {2}


def test_full_coverage_saturates():
    # every point drawn with high probability; any consistent hypothesis is exact
    C = singletons_with_empty(3)
    exp = PacExperiment(C, C.rows[2], Distribution.uniform(3), 60, Fraction(1, 10), 200, 5)
    rep = simulate_compression_learner(exp)
    assert rep.failures == 0
    assert rep.passed


def test_compression_learner_bound_uses_scheme_size():
    C = singletons_with_empty(12)
    exp = PacExperiment(C, C.rows[1], Distribution.uniform(12), 40, Fraction(3, 10), 200, 2015)
    rep = simulate_compression_learner(exp)
    assert rep.extra["k"] == 3  # floor(log2 13)
    assert rep.extra["observed_k"] <= 3
    assert rep.bound == lw_bound(40, 3, 1, Fraction(3, 10))


def test_compression_learner_forced():
    C = intervals(6)
    exp = PacExperiment(C, C.rows[7], Distribution.uniform(6), 8, Fraction(1, 4), 100, 3)
    rep = simulate_compression_learner(exp, SchemeParams(4))
    assert rep.extra["k_source"] == "observed"
    assert rep.extra["qsize"] >= 1


def test_experiment_validation():
    C = intervals(4)
    with pytest.raises(ValueError):
        PacExperiment(C, 0b0101, Distribution.uniform(4), 5, Fraction(1, 4), 10)
    with pytest.raises(ValueError):
        PacExperiment(C, 0, Distribution.uniform(3), 5, Fraction(1, 4), 10)
    with pytest.raises(ValueError):
        PacExperiment(C, 0, Distribution.uniform(4), 0, Fraction(1, 4), 10)
