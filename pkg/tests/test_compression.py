from itertools import combinations, permutations

import pytest

from vclab.compression import (
    CompressedSample,
    MalformedSideInfo,
    SchemeParams,
    SideInfo,
    UnrealizableSample,
    base_compress,
    base_reconstruct,
    check_side_info,
    check_trace,
    compress_with_trace,
    count_side_info,
    rank_compress,
    rank_reconstruct,
    recursive_compress,
    recursive_reconstruct,
    size_report,
    verify_scheme,
)
from vclab.concept_core import ConceptClass, LabeledSample, class_matrix_rank, str_to_mask
from vclab.generators import full_cube, intervals, random_class, random_vc_bounded, singletons_with_empty

FORCED = SchemeParams(4)


def sample_of(C, c, pts):
    return LabeledSample.from_dict({p: C.bit(c, p) for p in pts})


def agrees_on(C, h, sample):
    return all(C.bit(h, p) == b for p, b in sample.as_dict().items())


def test_base_hand_run():
    C = full_cube(3)
    c = str_to_mask("101")
    kept = base_compress(C, sample_of(C, c, C.points))
    assert kept.as_dict() == {1: 0}
    assert base_reconstruct(C, kept) == c


def test_base_nothing_kept_when_majority_agrees():
    C = singletons_with_empty(5)
    kept = base_compress(C, sample_of(C, 0, [0, 2, 4]))
    assert len(kept) == 0
    assert base_reconstruct(C, kept) == 0


def test_base_two_concepts():
    C = ConceptClass.from_strings(["0110", "1011"])
    for c in C.rows:
        kept = base_compress(C, sample_of(C, c, C.points))
        assert len(kept) <= 1
        assert base_reconstruct(C, kept) == c


def test_base_unrealizable():
    C = singletons_with_empty(3)
    with pytest.raises(UnrealizableSample):
        base_compress(C, LabeledSample.from_dict({0: 1, 1: 1}))


@pytest.mark.parametrize("C", [intervals(5), random_class(6, 30, 2), full_cube(3)])
def test_base_exhaustive(C):
    limit = (len(C)).bit_length() - 1
    for c in C.rows:
        for k in range(1, C.n + 1):
            for Y in combinations(C.points, k):
                s = sample_of(C, c, Y)
                kept = base_compress(C, s)
                assert len(kept) <= limit
                assert set(kept.points) <= set(Y)
                assert agrees_on(C, base_reconstruct(C, kept), s)


def test_rank_examples():
    C = ConceptClass.from_strings(["1111", "0000"])
    assert class_matrix_rank(C) == 1
    c = C.rows[-1]
    kept = rank_compress(C, sample_of(C, c, C.points))
    assert len(kept) == 1
    assert rank_reconstruct(C, kept) == c
    cube = full_cube(2)
    for c in cube.rows:
        kept = rank_compress(cube, sample_of(cube, c, cube.points))
        assert len(kept) <= 2
        assert rank_reconstruct(cube, kept) == c


@pytest.mark.parametrize("C", [intervals(5), random_class(6, 20, 7)])
def test_rank_exhaustive(C):
    r = class_matrix_rank(C)
    for c in C.rows:
        for k in range(1, C.n + 1):
            for Y in combinations(C.points, k):
                s = sample_of(C, c, Y)
                kept = rank_compress(C, s)
                assert len(kept) <= r
                assert agrees_on(C, rank_reconstruct(C, kept), s)


def test_default_params_reduce_to_base():
    C = random_vc_bounded(8, 2, 30, 1)
    for c in C.rows[:5]:
        s = sample_of(C, c, [0, 2, 3, 6, 7])
        cs = recursive_compress(C, s)
        assert cs.info == SideInfo(0, ())
        assert cs.kept == base_compress(C, s)
        assert recursive_reconstruct(C, cs) == base_reconstruct(C, cs.kept)


def test_forced_recursion_roundtrip_and_trace():
    C = random_vc_bounded(8, 2, 30, 1)
    cases = set()
    for c in C.rows:
        for Y in [C.points, (0, 1, 2, 5), (3, 4, 6, 7), (1,)]:
            s = sample_of(C, c, Y)
            cs, trace = compress_with_trace(C, s, FORCED)
            cases.update(lv.case for lv in trace)
            assert check_trace(trace) == []
            assert set(cs.kept.points) <= set(Y)
            assert all(s.as_dict()[p] == b for p, b in cs.kept.as_dict().items())
            check_side_info(cs)
            h = recursive_reconstruct(C, cs, FORCED)
            assert agrees_on(C, h, s)
    assert {"case1", "case2", "base"} <= cases


def test_verify_reports_both_cases():
    rep = verify_scheme(random_vc_bounded(8, 2, 30, 1), FORCED)
    assert rep["ok"], rep["failures"]
    assert rep["exhaustive"]
    assert rep["case_levels"]["case1"] > 0 and rep["case_levels"]["case2"] > 0
    assert rep["malformed_rejected"]


def test_verify_default_singletons():
    rep = verify_scheme(singletons_with_empty(6))
    assert rep["ok"]
    assert rep["checked"] == 7 * (2**6 - 1)
    assert rep["max_T"] == 0


def test_verify_sampled_mode_is_seeded():
    C = random_class(8, 40, 5)
    a = verify_scheme(C, FORCED, budget=100, samples=200, seed=3)
    b = verify_scheme(C, FORCED, budget=100, samples=200, seed=3)
    assert not a["exhaustive"]
    assert a == b and a["ok"]


def test_corrupted_side_info_rejected():
    C = random_vc_bounded(8, 2, 30, 1)
    c = C.rows[7]
    cs = recursive_compress(C, sample_of(C, c, C.points), FORCED)
    outside = next(p for p in C.points if p not in cs.kept.points)
    bad = CompressedSample(cs.kept, SideInfo(cs.info.T + 1, cs.info.f + ((cs.info.T + 1, outside),)))
    with pytest.raises(MalformedSideInfo):
        recursive_reconstruct(C, bad, FORCED)


@pytest.mark.parametrize("doc", [
    {"T": -1, "Z": [], "f": []},
    {"T": 1, "Z": [[0, 1]], "f": [[2, 0]]},
    {"T": 2, "Z": [[0, 1], [1, 0]], "f": [[1, 0], [2, 0]]},
    {"T": 0, "Z": [[0, 1]], "f": [[0, 0]]},
    {"T": 1, "Z": [[0, 1], [0, 0]], "f": []},
    {"Z": [], "f": []},
])
def test_malformed_documents(doc):
    with pytest.raises(MalformedSideInfo):
        cs = CompressedSample.from_json(doc)
        check_side_info(cs)


def test_non_image_input_gives_first_concept():
    C = singletons_with_empty(4)
    # label 1 at two points is not an output of the compressor on this class
    cs = CompressedSample(LabeledSample.from_dict({0: 1, 1: 1}), SideInfo(0, ()))
    assert recursive_reconstruct(C, cs) == C.rows[0]


def test_serialization_roundtrip():
    C = random_vc_bounded(8, 2, 30, 1)
    cs = recursive_compress(C, sample_of(C, C.rows[3], C.points), FORCED)
    blob = cs.to_bytes()
    back = CompressedSample.loads(blob)
    assert back == cs
    assert back.to_bytes() == blob


def brute_side_info(T, k):
    total = 0
    for t in range(T + 1):
        for j in range(min(t, k) + 1):
            for dom in combinations(range(1, t + 1), j):
                total += len(list(permutations(range(k), j)))
    return total


@pytest.mark.parametrize("T,k", [(0, 0), (0, 3), (1, 1), (2, 3), (3, 2), (4, 4)])
def test_count_side_info(T, k):
    assert count_side_info(T, k) == brute_side_info(T, k)


def test_size_report_default():
    C = intervals(6)
    c = C.rows[9]
    cs, trace = compress_with_trace(C, sample_of(C, c, C.points))
    rep = size_report(cs, trace)
    assert rep.T == 0
    assert rep.kept_size <= 5
    assert rep.cases == ("base",)
    assert rep.log2_q == 0


def test_params_validation():
    with pytest.raises(ValueError):
        SchemeParams(1)
