"""``vclab`` command-line front end.

Every subcommand writes JSON with sorted keys to stdout (or ``-o FILE``).
Exit status: 0 success, 1 a check failed, 2 usage or input-format error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import generators as gen
from .compression import (
    CompressedSample,
    MalformedSideInfo,
    SchemeParams,
    UnrealizableSample,
    compress_with_trace,
    recursive_reconstruct,
    size_report,
    verify_scheme,
)
from .concept_core import ClassFormatError, ConceptClass, LabeledSample, dual, mask_to_str, parse_class, sauer_bound, vc_dimension
from .metric_packing import (
    Distribution,
    Epsilon,
    bound_ceiling,
    dual_approx_set,
    greedy_packing,
    haussler_bound,
)
from .pac_sim import CSV_HEADER, PacExperiment, simulate_compression_learner, simulate_consistency_failure
from .teaching import (
    halving_teaching_concept,
    quadrant_teaching,
    min_teaching_set,
    rt_dimension,
    pair_elimination_teaching,
)


class UsageError(Exception):
    pass


def _read_class(path: str) -> tuple[ConceptClass, bool]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    return parse_class(text)


def _read_dist(path: str | None, n: int) -> Distribution:
    if path is None:
        return Distribution.uniform(n)
    try:
        mu = Distribution.from_json(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"bad distribution file {path}: {exc}") from exc
    if len(mu.weights) != n:
        raise UsageError(f"distribution has {len(mu.weights)} weights, class has {n} points")
    return mu


def _fraction(text: str) -> Fraction:
    try:
        v = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc
    if v <= 0:
        raise argparse.ArgumentTypeError("epsilon must be positive")
    return v


def _target(C: ConceptClass, index: int) -> int:
    if not 0 <= index < len(C):
        raise UsageError(f"target index {index} out of range (class has {len(C)} concepts)")
    return C.rows[index]


def _params(args) -> SchemeParams:
    try:
        return SchemeParams(args.base_threshold)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _emit(args, doc, table: str | None = None):
    if getattr(args, "pretty", False) and table is not None:
        text = table
    else:
        text = json.dumps(doc, sort_keys=True, indent=2)
    if getattr(args, "output", None):
        Path(args.output).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _table(rows: list[tuple]) -> str:
    width = max(len(str(k)) for k, _ in rows)
    return "\n".join(f"{str(k).ljust(width)}  {v}" for k, v in rows)


# -- subcommands -------------------------------------------------------------


def cmd_vc(args) -> int:
    C, dups = _read_class(args.cls)
    doc = {"n": C.n, "size": len(C), "vc": vc_dimension(C), "duplicates_removed": dups}
    _emit(args, doc, _table(list(doc.items())))
    return 0


def cmd_dual(args) -> int:
    C, _ = _read_class(args.cls)
    D = dual(C)
    doc = {"n": C.n, "size": len(C), "vc": vc_dimension(C), "dual_n": D.n,
           "dual_size": len(D), "dual_vc": vc_dimension(D), "dual": D.to_strings()}
    _emit(args, doc, _table([(k, v) for k, v in doc.items() if k != "dual"]))
    return 0


def cmd_teach(args) -> int:
    C, _ = _read_class(args.cls)
    if args.method == "exact":
        if args.target is None:
            raise UsageError("--method exact needs --target")
        c = _target(C, args.target)
        ts = min_teaching_set(C, c)
        doc = {"concept": args.target, "concept_bits": mask_to_str(c, C.n), "method": "exact",
               "set": list(ts), "size": len(ts), "trace": []}
    elif args.method == "halving":
        doc = halving_teaching_concept(C).to_json(C)
    elif args.method == "pair":
        doc = pair_elimination_teaching(C, args.fallback_threshold).to_json(C)
    else:
        try:
            doc = quadrant_teaching(C).to_json(C)
        except ValueError as exc:
            raise UsageError(str(exc)) from exc
    _emit(args, doc, _table([(k, doc[k]) for k in ("method", "concept", "concept_bits", "set", "size")]))
    return 0


def cmd_rtd(args) -> int:
    C, _ = _read_class(args.cls)
    dim, deco = rt_dimension(C)
    doc = deco.to_json(C)
    rows = [("rt_dimension", dim)] + [
        (f"layer {i}", f"size {L['size']}: concepts {[m['concept'] for m in L['members']]}")
        for i, L in enumerate(doc["layers"])]
    _emit(args, doc, _table(rows))
    return 0


def _packing_doc(C: ConceptClass, mu: Distribution, eps: Fraction, use_dual: bool) -> dict:
    eps_v = Epsilon.rational(eps)
    vc = vc_dimension(C)
    if use_dual:
        da = dual_approx_set(C, eps_v)
        d_bound = 2 ** (vc + 1)
        tight, weak = haussler_bound(d_bound, min(eps, Fraction(1)))
        return {"eps": str(eps), "dual": True, "size": len(da), "points": list(da.points),
                "rounding": {str(p): q for p, q in sorted(da.rounding.items())},
                "haussler_d": d_bound, "haussler_tight": tight, "haussler_weak": weak,
                "within_bound": len(da) <= bound_ceiling(tight)}
    pk = greedy_packing(C, mu, eps_v)
    tight, weak = haussler_bound(vc, min(eps, Fraction(1)))
    return {"eps": str(eps), "dual": False, "size": len(pk), "members": list(pk.members),
            "rounding": list(pk.rounding), "haussler_d": vc, "haussler_tight": tight,
            "haussler_weak": weak, "within_bound": len(pk) <= bound_ceiling(tight)}


def cmd_pack(args) -> int:
    C, _ = _read_class(args.cls)
    mu = _read_dist(args.dist, C.n)
    doc = _packing_doc(C, mu, args.eps, args.dual)
    _emit(args, doc, _table([(k, doc[k]) for k in ("eps", "dual", "size", "haussler_tight", "within_bound")]))
    return 0 if doc["within_bound"] else 1


def _parse_points(text: str, C: ConceptClass) -> list[int]:
    try:
        pts = [int(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise UsageError(f"bad point list {text!r}") from exc
    if not pts:
        raise UsageError("point list is empty")
    if len(set(pts)) != len(pts) or any(p not in C.position for p in pts):
        raise UsageError("points must be distinct domain points")
    return pts


def cmd_compress(args) -> int:
    C, _ = _read_class(args.cls)
    c = _target(C, args.target)
    pts = _parse_points(args.points, C)
    sample = LabeledSample.from_dict({p: C.bit(c, p) for p in pts})
    cs, trace = compress_with_trace(C, sample, _params(args))
    if args.report:
        _emit(args, {"compressed": cs.to_json(), "size_report": size_report(cs, trace).to_json()})
    elif getattr(args, "output", None):
        Path(args.output).write_text(cs.dumps() + "\n")
    else:
        sys.stdout.write(cs.dumps() + "\n")
    return 0


def cmd_decompress(args) -> int:
    C, _ = _read_class(args.cls)
    try:
        cs = CompressedSample.loads(Path(args.inp).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read compressed sample: {exc}") from exc
    h = recursive_reconstruct(C, cs, _params(args))
    doc = {"hypothesis": mask_to_str(h, C.n), "in_class": h in C.rows}
    _emit(args, doc, _table(list(doc.items())))
    return 0


def cmd_verify(args) -> int:
    C, _ = _read_class(args.cls)
    rep = verify_scheme(C, _params(args), budget=args.budget, seed=args.seed, samples=args.samples)
    _emit(args, rep, _table([(k, rep[k]) for k in ("ok", "checked", "exhaustive", "case_levels", "max_kept", "max_T")]))
    return 0 if rep["ok"] else 1


def cmd_pac(args) -> int:
    C, _ = _read_class(args.cls)
    mu = _read_dist(args.dist, C.n)
    exp = PacExperiment(C, _target(C, args.target), mu, args.m, args.eps, args.trials, args.seed)
    if args.learner == "consistent":
        rep = simulate_consistency_failure(exp)
    else:
        rep = simulate_compression_learner(exp, _params(args))
    doc = {"m": args.m, "eps": str(args.eps), "seed": args.seed, **rep.to_json()}
    if args.csv:
        Path(args.csv).write_text(CSV_HEADER + "\n" + rep.csv_row(args.m, args.eps) + "\n")
    _emit(args, doc, _table(list(doc.items())))
    return 0 if rep.passed else 1


def cmd_gen(args) -> int:
    try:
        C = gen.generate(args.family, args.n, args.d, args.size, args.seed)
    except gen.GenerationError as exc:
        print(f"vclab: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    text = "\n".join(C.to_strings()) + "\n"
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def analyze_class(C: ConceptClass, eps_list, rtd_limit: int = 64, budget: int = 10**4,
                  base_threshold: int | None = None, seed: int = 0) -> dict:
    vc = vc_dimension(C)
    D = dual(C)
    dual_vc = vc_dimension(D)
    rec = {
        "n": C.n,
        "size": len(C),
        "vc": vc,
        "dual_vc": dual_vc,
        "sauer_bound": sauer_bound(C.n, vc),
        "checks": {
            "sauer": len(C) <= sauer_bound(C.n, vc),
            "dual_vc": dual_vc <= 2 ** (vc + 1),
        },
    }
    if len(C) <= rtd_limit:
        rec["rt_dimension"] = rt_dimension(C)[0]
    mu = Distribution.uniform(C.n)
    packs = []
    for eps in eps_list:
        for use_dual in (False, True):
            p = _packing_doc(C, mu, eps, use_dual)
            packs.append({k: p[k] for k in ("eps", "dual", "size", "haussler_d", "haussler_tight",
                                           "haussler_weak", "within_bound")}
                         | {"margin": p["haussler_tight"] - p["size"]})
    rec["packings"] = packs
    rec["checks"]["haussler"] = all(p["within_bound"] for p in packs)
    rep = verify_scheme(C, SchemeParams(base_threshold), budget=budget, seed=seed, samples=min(budget, 2000))
    rec["compression"] = {k: rep[k] for k in ("checked", "exhaustive", "max_kept", "max_T", "case_levels", "ok")}
    rec["checks"]["compression"] = rep["ok"]
    return rec


def cmd_analyze(args) -> int:
    C, _ = _read_class(args.cls)
    eps_list = args.eps or [Fraction(1, 4), Fraction(1, 2)]
    rec = analyze_class(C, eps_list, args.rtd_limit, args.budget, args.base_threshold, args.seed)
    rec["file"] = Path(args.cls).name
    rows = [(k, rec[k]) for k in ("n", "size", "vc", "dual_vc", "rt_dimension") if k in rec]
    rows += [(f"pack eps={p['eps']}{' dual' if p['dual'] else ''}", f"{p['size']} (bound {p['haussler_tight']:.4g})")
             for p in rec["packings"]]
    rows += [("checks", rec["checks"])]
    _emit(args, rec, _table(rows))
    return 0 if all(rec["checks"].values()) else 1


def cmd_suite(args) -> int:
    from .suite import run_suite

    results = run_suite(args.level)
    for r in results:
        print(r.line(), file=sys.stderr)
    doc = {"level": args.level, "passed": all(r.passed for r in results),
           "criteria": [r.to_json() for r in results]}
    _emit(args, doc, "\n".join(r.line() for r in results))
    return 0 if doc["passed"] else 1


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="vclab", description="Teaching sets, packings and compression schemes for finite concept classes.")
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, fn, help_, cls=True):
        sp = sub.add_parser(name, help=help_)
        if cls:
            sp.add_argument("-c", "--class", dest="cls", required=True, help="class file (text or JSON)")
        sp.add_argument("-o", "--output", help="write output to FILE instead of stdout")
        sp.add_argument("--pretty", action="store_true", help="human-readable table instead of JSON")
        sp.set_defaults(func=fn)
        return sp

    add("vc", cmd_vc, "VC-dimension of a class")
    add("dual", cmd_dual, "dual class and its VC-dimension")

    sp = add("teach", cmd_teach, "teaching set for some concept")
    sp.add_argument("--method", choices=["exact", "halving", "pair", "quadrant"], default="halving")
    sp.add_argument("--target", type=int, help="concept index (exact method)")
    sp.add_argument("--fallback-threshold", type=int, default=None)

    add("rtd", cmd_rtd, "recursive teaching dimension with its layers")

    sp = add("pack", cmd_pack, "greedy eps-packing of a class or its dual")
    sp.add_argument("--eps", type=_fraction, required=True)
    sp.add_argument("--dist", help="distribution JSON file")
    sp.add_argument("--dual", action="store_true", help="pack the dual class (A*)")

    sp = add("compress", cmd_compress, "compress a labeled sample of a target concept")
    sp.add_argument("--target", type=int, required=True)
    sp.add_argument("--points", required=True, help="comma-separated sample points")
    sp.add_argument("--base-threshold", type=int, default=None)
    sp.add_argument("--report", action="store_true", help="include the size report")

    sp = add("decompress", cmd_decompress, "reconstruct a hypothesis from a compressed sample")
    sp.add_argument("--in", dest="inp", required=True)
    sp.add_argument("--base-threshold", type=int, default=None)

    sp = add("verify", cmd_verify, "check the compression scheme on (concept, sample) pairs")
    sp.add_argument("--budget", type=int, default=10**6)
    sp.add_argument("--samples", type=int, default=10_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--base-threshold", type=int, default=None)

    sp = add("pac", cmd_pac, "Monte-Carlo check of a PAC bound")
    sp.add_argument("--target", type=int, required=True)
    sp.add_argument("--dist")
    sp.add_argument("--m", type=int, required=True)
    sp.add_argument("--eps", type=_fraction, required=True)
    sp.add_argument("--trials", type=int, default=2000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--learner", choices=["consistent", "compression"], default="consistent")
    sp.add_argument("--base-threshold", type=int, default=None)
    sp.add_argument("--csv", help="also write a CSV row to FILE")

    sp = add("gen", cmd_gen, "generate a class file", cls=False)
    sp.add_argument("--family", required=True, choices=sorted(gen.FAMILIES))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int)
    sp.add_argument("--size", type=int)
    sp.add_argument("--seed", type=int, default=0)

    sp = add("analyze", cmd_analyze, "batch analysis report for a class")
    sp.add_argument("--eps", type=_fraction, action="append")
    sp.add_argument("--rtd-limit", type=int, default=64, help="skip RT-dimension above this class size")
    sp.add_argument("--budget", type=int, default=10**4)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--base-threshold", type=int, default=None)

    sp = add("suite", cmd_suite, "run the acceptance suite", cls=False)
    sp.add_argument("--level", choices=["desk", "quick"], default="desk")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (UsageError, ClassFormatError, MalformedSideInfo, UnrealizableSample, ValueError) as exc:
        print(f"vclab: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
