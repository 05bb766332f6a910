"""Acceptance suite: the named class collection and one check per criterion.

Each ``criterion_*`` function returns a :class:`CriterionResult`; ``run_suite``
runs them all.  The CLI ``suite`` subcommand and the acceptance tests share
this module.
"""

from __future__ import annotations

import contextlib
import io
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations

from . import generators as gen
from .compression import (
    CompressedSample,
    SchemeParams,
    base_compress_dict,
    base_reconstruct_dict,
    rank_compress,
    rank_reconstruct,
    verify_scheme,
)
from .concept_core import ConceptClass, LabeledSample, class_matrix_rank, dual, sauer_bound, vc_dimension
from .metric_packing import (
    Distribution,
    Epsilon,
    bound_ceiling,
    dual_approx_set,
    greedy_packing,
    haussler_bound,
    weak_packing_bound,
)
from .pac_sim import (
    PacExperiment,
    simulate_compression_learner,
    simulate_consistency_failure,
    smallest_m,
)
from .teaching import (
    halving_teaching_concept,
    is_36_class,
    is_teaching_set,
    quadrant_teaching,
    min_teaching_set,
    min_teaching_set_naive,
    rt_dimension,
    pair_elimination_teaching,
)

EPSILONS = (Fraction(1, 8), Fraction(1, 4), Fraction(1, 2))
FORCED_THRESHOLD = 4
EXHAUSTIVE_BUDGET = 10**6


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.number}: {self.name} ({self.seconds:.1f}s)"

    def to_json(self) -> dict:
        return {"criterion": self.number, "name": self.name, "passed": self.passed,
                "detail": self.detail}


def suite_classes(level: str = "desk") -> list[tuple[str, ConceptClass]]:
    """The named classes of the acceptance suite."""
    out: list[tuple[str, ConceptClass]] = []
    top = 8 if level == "desk" else 5
    for n in range(3, top + 1):
        out.append((f"singletons-{n}", gen.singletons_with_empty(n)))
    for n in range(3, top + 1):
        out.append((f"intervals-{n}", gen.intervals(n)))
    for n in range(2, 5):
        out.append((f"cube-{n}", gen.full_cube(n)))
    for n, d in ((4, 1), (4, 2), (5, 2)):
        out.append((f"ball-{n}-{d}", gen.hamming_ball(n, d)))
    count = 20 if level == "desk" else 4
    for i in range(count):
        n = 4 + i % 5
        if i % 2 == 0:
            C = gen.random_class(n, min(2**n, 6 + (7 * i) % 43), i)
            out.append((f"random-{i}", C))
        else:
            d = 1 + (i // 2) % 2
            C = gen.random_vc_bounded(n, d, min(sauer_bound(n, d) * 2 // 3, 48), i)
            out.append((f"vcbounded-{i}", C))
    for i in range(10 if level == "desk" else 2):
        out.append((f"36-{i}", gen.random_36(5 + i % 4, 6 + i % 6, 100 + i)))
    return out


def _all_pairs(C: ConceptClass):
    full = (1 << C.n) - 1
    for c in C.rows:
        for ymask in range(1, full + 1):
            yield c, {C.points[j]: (c >> j) & 1 for j in range(C.n) if (ymask >> j) & 1}


def _timed(number, name, fn) -> CriterionResult:
    t0 = time.perf_counter()
    passed, detail = fn()
    return CriterionResult(number, name, passed, detail, time.perf_counter() - t0)


# -- criterion 1 and 2 ------------------------------------------------------


@lru_cache(maxsize=None)
def _verify(C: ConceptClass, threshold):
    return verify_scheme(C, SchemeParams(threshold), budget=EXHAUSTIVE_BUDGET)


def _verify_all(classes, threshold):
    return {name: _verify(C, threshold) for name, C in classes}


def criterion_1(classes) -> CriterionResult:
    def run():
        detail = {}
        ok = True
        for thr in (None, FORCED_THRESHOLD):
            reps = _verify_all(classes, thr)
            core = ("roundtrip", "Z_subset_Y", "z_matches_y", "side_info", "serialization",
                    "group_consistency", "kept_bound", "size_report")
            bad = {n: {k: v for k, v in r["failure_counts"].items() if k in core}
                   for n, r in reps.items()}
            bad = {n: v for n, v in bad.items() if v}
            not_exhaustive = [n for n, r in reps.items() if not r["exhaustive"]]
            unrejected = [n for n, r in reps.items() if not r["malformed_rejected"]]
            ok &= not bad and not not_exhaustive and not unrejected
            detail[str(thr or "default")] = {
                "pairs": sum(r["checked"] for r in reps.values()),
                "failing_classes": bad,
                "not_exhaustive": not_exhaustive,
                "malformed_not_rejected": unrejected,
                "case1_levels": sum(r["case_levels"]["case1"] for r in reps.values()),
                "case2_levels": sum(r["case_levels"]["case2"] for r in reps.values()),
            }
        return ok, detail

    return _timed(1, "compression round-trip", run)


def criterion_2(classes) -> CriterionResult:
    def run():
        reps = _verify_all(classes, FORCED_THRESHOLD)
        violations = {n: r["failure_counts"].get("trace", 0) for n, r in reps.items()}
        violations = {n: v for n, v in violations.items() if v}
        c1 = sum(r["case_levels"]["case1"] for r in reps.values())
        c2 = sum(r["case_levels"]["case2"] for r in reps.values())
        return not violations and c1 > 0 and c2 > 0, {
            "violations": violations, "case1_levels": c1, "case2_levels": c2}

    return _timed(2, "recursion-level invariants", run)


# -- criterion 3 --------------------------------------------------------------


def criterion_3(classes) -> CriterionResult:
    def run():
        problems = []
        pairs = 0
        for name, C in classes:
            cap = len(C).bit_length() - 1
            rank = class_matrix_rank(C)
            for c, y in _all_pairs(C):
                pairs += 1
                kept = base_compress_dict(C, y)
                h, pivots = base_reconstruct_dict(C, kept)
                if len(kept) > cap:
                    problems.append((name, "base size"))
                if any((h >> C.position[p]) & 1 != b for p, b in y.items()):
                    problems.append((name, "base roundtrip"))
                if pivots != list(kept):
                    problems.append((name, "base replay"))
                rk = rank_compress(C, LabeledSample.from_dict(y))
                if len(rk) > rank:
                    problems.append((name, "rank size"))
                h2 = rank_reconstruct(C, rk)
                if any((h2 >> C.position[p]) & 1 != b for p, b in y.items()):
                    problems.append((name, "rank roundtrip"))
                if len(problems) > 20:
                    break
        return not problems, {"pairs": pairs, "problems": problems[:20]}

    return _timed(3, "base and rank scheme sizes", run)


# -- criterion 4 --------------------------------------------------------------


def criterion_4(classes) -> CriterionResult:
    def run():
        problems = []
        rtd = {}
        for name, C in classes:
            ceil_log = math.ceil(math.log2(len(C))) if len(C) > 1 else 0
            vc = vc_dimension(C)
            reports = [halving_teaching_concept(C), pair_elimination_teaching(C),
                       pair_elimination_teaching(C, fallback_threshold=2)]
            if reports[0].size > ceil_log:
                problems.append((name, "halving size"))
            if is_36_class(C):
                rep = quadrant_teaching(C)
                reports.append(rep)
                if rep.size > 3:
                    problems.append((name, "quadrant size"))
            for rep in reports:
                if not is_teaching_set(C, rep.concept, rep.points):
                    problems.append((name, f"{rep.method} invalid"))
            for tr in reports[2].trace:
                if not 0 < tr["after"] < tr["before"]:
                    problems.append((name, "pair trace"))
            dim, deco = rt_dimension(C)
            rtd[name] = dim
            if dim > ceil_log:
                problems.append((name, "rtd > ceil log2|C|"))
            if vc == 1 and dim != 1:
                problems.append((name, "VC-1 class with rtd != 1"))
            left = set(C.rows)
            for layer in deco.layers:
                remaining = C.filter(left)
                for c, ts in layer:
                    if not is_teaching_set(remaining, c, ts):
                        problems.append((name, "rtd layer set invalid"))
                left -= {c for c, _ in layer}
            if left:
                problems.append((name, "rtd layers do not partition the class"))
        for n in range(3, 11):
            if rt_dimension(gen.singletons_with_empty(n))[0] != 1:
                problems.append((f"singletons-{n}", "rtd != 1"))
        for n, d in ((4, 1), (4, 2), (5, 2)):
            if rt_dimension(gen.hamming_ball(n, d))[0] != d:
                problems.append((f"ball-{n}-{d}", "rtd != d"))
        return not problems, {"problems": problems[:20], "rt_dimension": rtd}

    return _timed(4, "teaching sets and RT-dimension", run)


# -- criterion 5 --------------------------------------------------------------


def check_packing_independent(items, members, rounding, weights, eps: Fraction) -> list[str]:
    """Brute-force re-check of separation, maximality and rounding; floats never decide."""
    total = sum(weights)

    def d(a, b):
        x = a ^ b
        return Fraction(sum(w for j, w in enumerate(weights) if (x >> j) & 1), total)

    errs = []
    for i, j in combinations(members, 2):
        if not d(items[i], items[j]) > eps:
            errs.append(f"members {i},{j} not separated")
    for i, v in enumerate(items):
        close = [m for m in members if d(v, items[m]) <= eps]
        if not close:
            errs.append(f"item {i} uncovered")
        elif rounding[i] != close[0]:
            errs.append(f"item {i} rounded to {rounding[i]}, expected {close[0]}")
    for m in members:
        if rounding[m] != m:
            errs.append(f"rounding not idempotent at {m}")
    return errs


def criterion_5(classes) -> CriterionResult:
    def run():
        problems = []
        checked = 0
        for name, C in classes:
            vc = vc_dimension(C)
            dual_vc_bound = 2 ** (vc + 1)
            skew = Distribution(tuple(j + 1 for j in range(C.n)))
            for eps in EPSILONS:
                eps_v = Epsilon.rational(eps)
                for mu in (Distribution.uniform(C.n), skew):
                    pk = greedy_packing(C, mu, eps_v)
                    checked += 1
                    errs = check_packing_independent(C.rows, pk.members, pk.rounding, mu.weights, eps)
                    problems += [(name, str(eps), e) for e in errs]
                    tight, weak = haussler_bound(vc, eps)
                    if len(pk) > bound_ceiling(tight) or len(pk) > bound_ceiling(weak):
                        problems.append((name, str(eps), "Haussler bound"))
                    if vc >= 1 and len(pk) > bound_ceiling(weak_packing_bound(vc, eps)):
                        problems.append((name, str(eps), "weak-statement bound"))
                da = dual_approx_set(C, eps_v)
                cols = []
                for p in C.points:
                    col = C.column(p)
                    if col not in cols:
                        cols.append(col)
                errs = check_packing_independent(cols, da.packing.members, da.packing.rounding,
                                                 (1,) * len(C), eps)
                problems += [(name, str(eps), "dual: " + e) for e in errs]
                tight, weak = haussler_bound(dual_vc_bound, eps)
                if len(da) > bound_ceiling(tight) or len(da) > bound_ceiling(weak):
                    problems.append((name, str(eps), "dual Haussler bound"))
        return not problems, {"packings": checked, "problems": problems[:20]}

    return _timed(5, "packings and Haussler bounds", run)


# -- criterion 6 --------------------------------------------------------------


def criterion_6(classes) -> CriterionResult:
    def run():
        problems = []
        for name, C in classes:
            vc = vc_dimension(C)
            if len(C) > sauer_bound(C.n, vc):
                problems.append((name, "Sauer"))
            if name.startswith("ball") and len(C) != sauer_bound(C.n, vc):
                problems.append((name, "Sauer equality"))
            if vc <= 3 and vc_dimension(dual(C)) > 2 ** (vc + 1):
                problems.append((name, "dual VC"))
            if C.n <= 8:
                for c in C.rows:
                    if min_teaching_set(C, c) != min_teaching_set_naive(C, c):
                        problems.append((name, "min teaching set mismatch"))
        return not problems, {"problems": problems[:20]}

    return _timed(6, "structural invariants", run)


# -- criterion 7 --------------------------------------------------------------


def pac_experiments(trials: int = 2000, seed: int = 2015):
    iv = gen.intervals(20)
    eps_a = Fraction(1, 4)
    m_a = smallest_m(vc_dimension(iv), eps_a, 0.1)
    target_a = iv.rows[len(iv) // 2]
    exp_a = PacExperiment(iv, target_a, Distribution.uniform(20), m_a, eps_a, trials, seed)
    sg = gen.singletons_with_empty(12)
    target_b = next(r for r in sg.rows if r)
    exp_b = PacExperiment(sg, target_b, Distribution.uniform(12), 40, Fraction(3, 10), trials, seed)
    return exp_a, exp_b


def criterion_7(trials: int = 2000) -> CriterionResult:
    def run():
        exp_a, exp_b = pac_experiments(trials)
        rep_a = simulate_consistency_failure(exp_a)
        rep_b = simulate_compression_learner(exp_b)
        ok_a = rep_a.rate <= rep_a.bound + 3 * rep_a.stderr
        ok_b = rep_b.rate <= rep_b.bound + 3 * rep_b.stderr
        return ok_a and ok_b, {"double_sampling": {"m": exp_a.m, **rep_a.to_json()},
                               "compression": {"m": exp_b.m, **rep_b.to_json()}}

    return _timed(7, "PAC bounds", run)


# -- criterion 8 --------------------------------------------------------------


def _run_cli(argv) -> tuple[int, str]:
    from .cli import main

    buf = io.StringIO()
    with contextlib.redirect_stdout(buf):
        code = main(argv)
    return code, buf.getvalue()


def criterion_8(workdir) -> CriterionResult:
    """Byte-identical CLI output across two runs; CompressedSample round-trips."""
    from pathlib import Path

    def run():
        wd = Path(workdir)
        cls_file = wd / "iv6.txt"
        cls_file.write_text("\n".join(gen.intervals(6).to_strings()) + "\n")
        cs_file = wd / "cs.json"
        commands = {
            "analyze": ["analyze", "-c", str(cls_file), "--eps", "1/4", "--eps", "1/2"],
            "compress": ["compress", "--class", str(cls_file), "--target", "5",
                         "--points", "0,1,2,4,5", "--base-threshold", "4"],
            "verify": ["verify", "--class", str(cls_file), "--base-threshold", "4", "--seed", "7"],
            "pac": ["pac", "--class", str(cls_file), "--target", "3", "--m", "30", "--eps", "1/4",
                    "--trials", "200", "--seed", "11", "--learner", "compression",
                    "--base-threshold", "4"],
        }
        mismatched = []
        codes = {}
        for name, argv in commands.items():
            c1, out1 = _run_cli(argv)
            c2, out2 = _run_cli(argv)
            codes[name] = c1
            if out1 != out2 or c1 != c2 or c1 != 0:
                mismatched.append(name)
        _, out = _run_cli(commands["compress"])
        cs_file.write_text(out)
        cs = CompressedSample.loads(out)
        roundtrip = CompressedSample.loads(cs.to_bytes()).to_bytes() == cs.to_bytes() == out.strip().encode()
        return not mismatched and roundtrip, {"mismatched": mismatched, "exit_codes": codes,
                                              "serialization_roundtrip": roundtrip}

    return _timed(8, "determinism", run)


def run_suite(level: str = "desk", workdir=None) -> list[CriterionResult]:
    import tempfile

    classes = suite_classes(level)
    trials = 2000 if level == "desk" else 300
    results = [criterion_1(classes), criterion_2(classes), criterion_3(classes),
               criterion_4(classes), criterion_5(classes), criterion_6(classes),
               criterion_7(trials)]
    with tempfile.TemporaryDirectory() as tmp:
        results.append(criterion_8(workdir or tmp))
    return results
