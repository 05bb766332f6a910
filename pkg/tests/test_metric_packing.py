import math
from fractions import Fraction

import pytest

from vclab.concept_core import ConceptClass, str_to_mask
from vclab.generators import intervals
from vclab.metric_packing import (
    Distribution,
    Epsilon,
    dist,
    dual_approx_set,
    epsilon_of,
    greedy_packing,
    haussler_bound,
    is_separated,
    parse_epsilon,
    weak_packing_bound,
)

Q = Epsilon.rational


def m(s):
    return str_to_mask(s)


def test_dist_examples():
    u3 = Distribution.uniform(3)
    assert dist(m("010"), m("010"), u3) == 0
    assert dist(m("000"), m("111"), u3) == 1
    w = Distribution((1, 2, 3, 4))
    assert dist(m("0101"), m("0011"), w) == Fraction(1, 2)


def test_distribution_validation():
    with pytest.raises(ValueError):
        Distribution((0, 0))
    with pytest.raises(ValueError):
        Distribution((1, -1))
    assert Distribution.from_json('{"weights": [1, 3]}').total == 4


def test_is_separated_examples():
    u2 = Distribution.uniform(2)
    assert is_separated([m("01")], u2, Q("1/2"))
    assert is_separated([m("00"), m("11")], u2, Q("1/2"))
    # distance exactly epsilon is not separated
    assert not is_separated([m("00"), m("01")], u2, Q("1/2"))


def test_greedy_large_epsilon_keeps_first():
    C = intervals(5)
    pk = greedy_packing(C, None, Q(1))
    assert pk.members == (0,)
    assert set(pk.rounding) == {0}


def test_greedy_small_epsilon_keeps_all():
    C = intervals(5)
    pk = greedy_packing(C, None, Q("1/10"))
    assert len(pk) == len(C)
    assert pk.rounding == tuple(range(len(C)))


def test_greedy_hand_run():
    C = ConceptClass.from_strings(["000", "001", "011", "111"])
    pk = greedy_packing(C, Distribution.uniform(3), Q("1/3"))
    assert [C.to_strings()[i] for i in pk.members] == ["000", "011"]
    assert pk.rounding == (0, 0, 2, 2)


def test_dual_approx_degenerate():
    C = ConceptClass.from_strings(["000", "111"])
    da = dual_approx_set(C, Q("1/4"))
    assert len(da) == 1
    assert da.points == (0,)
    assert set(da.rounding.values()) == {0}


def test_dual_approx_tiny_epsilon():
    C = intervals(4)
    da = dual_approx_set(C, Q(Fraction(1, 2 * len(C))))
    assert len(da) == 4
    assert all(da.rounding[p] == p for p in C.points)


def test_dual_approx_intervals_oracle():
    C = intervals(4)
    eps = Fraction(1, 4)
    da = dual_approx_set(C, Q(eps))
    cols = {p: C.column(p) for p in C.points}

    def d(p, q):
        return Fraction(bin(cols[p] ^ cols[q]).count("1"), len(C))

    sel = list(da.points)
    for a in sel:
        for b in sel:
            if a != b:
                assert d(a, b) > eps
    for p in C.points:
        assert any(d(p, s) <= eps for s in sel)
        assert d(p, da.rounding[p]) <= eps
        assert da.rounding[p] in sel


def test_epsilon_exact_power():
    e = Epsilon.root(2**9, 9)
    assert e.exact() == Fraction(1, 2)
    assert e.cmp(Fraction(1, 2)) == 0


def test_epsilon_of_symbolic():
    e = epsilon_of(1024, 2)
    assert (e.size, e.s) == (1024, 9)
    # eps * |C| and (1/eps)^8 are both |C|^(8/9); integer k lies below it iff k^9 <= |C|^8
    assert math.isclose(float(e) * 1024, (1 / float(e)) ** 8)
    for k in range(470, 480):
        assert e.times_at_least(k, 1024) == (k**9 <= 1024**8)
    assert e.exact() is None
    lo, hi = Fraction(45, 100), Fraction(47, 100)
    assert float(lo) < float(e) < float(hi)
    assert e.cmp(lo) < 0 < e.cmp(hi)


def test_epsilon_times_at_least():
    e = Epsilon.root(1024, 9)  # about 0.4629
    assert e.times_at_least(46, 100)
    assert not e.times_at_least(47, 100)
    assert Q("1/2").times_at_least(5, 10)
    assert not Q("1/2").times_at_least(6, 10)


def test_epsilon_of_errors():
    with pytest.raises(ValueError):
        epsilon_of(1, 2)
    with pytest.raises(ValueError):
        Q(0)


def test_parse_epsilon():
    assert parse_epsilon("1/4").exact() == Fraction(1, 4)
    assert str(parse_epsilon("0.25")) == "1/4"


def test_haussler_examples():
    tight, weak = haussler_bound(0, Fraction(1, 3))
    assert tight == pytest.approx(math.e)
    assert weak == 1
    tight, _ = haussler_bound(1, Fraction(1, 2))
    assert tight == pytest.approx(8 * math.e**2)
    assert tight == pytest.approx(59.11, abs=0.01)


def test_weak_bound_dominates_tight():
    for d in range(1, 5):
        for eps in (Fraction(1, 8), Fraction(1, 4), Fraction(1, 2)):
            tight, _ = haussler_bound(d, eps)
            assert weak_packing_bound(d, eps) >= tight


def test_bound_domain_errors():
    with pytest.raises(ValueError):
        haussler_bound(-1, Fraction(1, 2))
    with pytest.raises(ValueError):
        haussler_bound(1, 0)
    with pytest.raises(ValueError):
        weak_packing_bound(0, Fraction(1, 2))
