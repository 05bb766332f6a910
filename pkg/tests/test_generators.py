import pytest

from vclab.concept_core import sauer_bound, vc_dimension
from vclab.generators import (
    GenerationError,
    full_cube,
    generate,
    hamming_ball,
    intervals,
    random_36,
    random_class,
    random_vc_bounded,
    singletons_with_empty,
)
from vclab.teaching import is_36_class, quadrant_teaching, rt_dimension


def test_singletons():
    assert sorted(singletons_with_empty(3).to_strings()) == ["000", "001", "010", "100"]


def test_intervals_count():
    assert len(intervals(4)) == 11
    for n in range(1, 9):
        assert len(intervals(n)) == n * (n + 1) // 2 + 1


def test_intervals_never_show_101():
    C = intervals(6)
    for s in C.to_strings():
        ones = [i for i, ch in enumerate(s) if ch == "1"]
        assert not ones or ones == list(range(ones[0], ones[-1] + 1))


def test_ball_and_cube():
    B = hamming_ball(5, 2)
    assert len(B) == 16 == sauer_bound(5, 2)
    assert vc_dimension(B) == 2
    assert vc_dimension(full_cube(3)) == 3


def test_random_vc_bounded():
    for seed in range(5):
        C = random_vc_bounded(8, 1, 6, seed)
        assert len(C) == 6
        assert vc_dimension(C) <= 1
        assert rt_dimension(C)[0] == 1


def test_random_36():
    C = random_36(8, 12, 0)
    assert len(C) == 12
    assert is_36_class(C)
    assert quadrant_teaching(C).size <= 3


def test_determinism():
    assert random_class(7, 30, 4) == random_class(7, 30, 4)
    assert random_vc_bounded(8, 2, 20, 9) == random_vc_bounded(8, 2, 20, 9)
    assert random_36(7, 10, 1) == random_36(7, 10, 1)
    assert random_class(7, 30, 4) != random_class(7, 30, 5)


def test_infeasible_size_fails_fast():
    # Sauer caps a VC-1 class on 4 points at 5 concepts
    with pytest.raises(GenerationError):
        random_vc_bounded(4, 1, 6, 0)


@pytest.mark.parametrize("args", [
    ("nope", 4, None, None),
    ("ball", 4, None, None),
    ("random", 4, None, None),
])
def test_generate_errors(args):
    with pytest.raises(ValueError):
        generate(*args)


def test_generate_dispatch():
    assert generate("intervals", 5) == intervals(5)
    assert generate("vc", 6, d=1, size=5, seed=2) == random_vc_bounded(6, 1, 5, 2)
    with pytest.raises(ValueError):
        generate("random", 3, size=9)
