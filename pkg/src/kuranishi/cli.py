"""Command-line front end: ``kur check``, ``kur fiber``, ``kur laws`` and ``kur demo joyce``.

Exit status is 0 when every check passes, 1 when some check fails and 2 for
parse or structural errors.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Callable

from .atlas import check_atlas, label_str
from .charts import (Chart, ChartMorphism, Homotopy, check_homotopy, homotopy_items, joyce_style_solve,
                     morphism_items)
from .errors import KuranishiError, ParseError
from .fiber import check_fiber_product, fiber_product
from .groebner import Ideal
from .laws import SUITES, run_suite
from .localization import check_roof, check_roof_homotopy
from .morphisms import check_2morphism, check_strict_morphism
from .poly import Poly, PolyMap, PolyMatrix
from .report import FAIL, PASS, CheckItem, VerificationReport, point_str
from .serialize import Document, atlas_to_json, dumps, load_document, strict_to_json

EXIT_PASS, EXIT_FAIL, EXIT_ERROR = 0, 1, 2
KINDS = ("chart", "morphism", "homotopy", "atlas", "strict", "2morphism", "roof")
JOYCE_MAX_DEGREE = 8


# check

def _chart_report(name: str, c: Chart) -> VerificationReport:
    # witnesses and domains are validated on construction; what is left is reporting them
    rep = VerificationReport("chart", name)
    rep.add(CheckItem("chart.section", name, PASS, {"n": c.n, "m": c.m, "vdim": c.vdim}))
    for w in c.witnesses:
        rep.add(CheckItem("chart.witness", f"{name} at {point_str(w)}", PASS))
    return rep


def _morphism_report(name: str, m: ChartMorphism) -> VerificationReport:
    return VerificationReport("morphism", name, morphism_items(m, name))


def _homotopy_report(name: str, h: Homotopy, order: str) -> VerificationReport:
    rep = VerificationReport("homotopy", name)
    rep.extend(morphism_items(h.f0, f"{name}.f0"))
    rep.extend(morphism_items(h.f1, f"{name}.f1"))
    rep.extend(homotopy_items(h, name, order=order))
    return rep


def _roof_reports(doc: Document, order: str) -> list[VerificationReport]:
    reps = [check_roof(r, order) for r in doc.roofs.values()]
    reps += [check_roof_homotopy(x, order) for x in doc.roof_homotopies.values()]
    return reps


def reports_for(doc: Document, kind: str, order: str = "grevlex") -> list[VerificationReport]:
    """One report per object of ``kind`` in the document."""
    if kind == "chart":
        return [_chart_report(nm, c) for nm, c in doc.charts.items()]
    if kind == "morphism":
        return [_morphism_report(nm, m) for nm, m in doc.chart_morphisms.items()]
    if kind == "homotopy":
        return [_homotopy_report(nm, h, order) for nm, h in doc.homotopies.items()]
    if kind == "atlas":
        return [check_atlas(a, order) for a in doc.atlases.values()]
    if kind == "strict":
        return [check_strict_morphism(m, order) for m in doc.morphisms.values()]
    if kind == "2morphism":
        return [check_2morphism(u, order) for u in doc.two_morphisms.values()]
    if kind == "roof":
        return _roof_reports(doc, order)
    raise ValueError(f"unknown kind {kind!r}")


def merge(kind: str, artifact: str, reports: list[VerificationReport]) -> VerificationReport:
    out = VerificationReport(kind, artifact)
    for r in reports:
        out.extend(r.items)
        out.notes.extend(r.notes)
    return out


def checkers_for(doc: Document, order: str = "grevlex") -> dict[str, VerificationReport]:
    """Every checker that has something to check in ``doc``, keyed by kind."""
    out = {}
    for kind in KINDS:
        reps = reports_for(doc, kind, order)
        if reps:
            out[kind] = merge(kind, "", reps)
    return out


def cmd_check(path: str, kind: str, order: str = "grevlex") -> VerificationReport:
    doc = load_document(path)
    reps = reports_for(doc, kind, order)
    if not reps:
        raise ParseError(f"file has no {kind} to check", path)
    return merge(kind, Path(path).name, reps)


# fiber

def cmd_fiber(path: str, order: str = "grevlex") -> tuple[dict, VerificationReport]:
    doc = load_document(path)
    if doc.fiber is None:
        raise ParseError("file has no fiber section", path)
    req = doc.fiber
    fp = fiber_product(req["x"], req["h"], req["y"], req["g"], req["witness_pairs"])
    rep = check_fiber_product(fp, order)
    rep.artifact = Path(path).name
    n = fp.base.vdim
    x, y = req["x"], req["y"]
    for (i, p), c in fp.z.charts.items():
        ci, cp = x.charts[i], y.charts[p]
        rep.notes.append(f"chart ({label_str(i)},{label_str(p)}): n_d = {ci.n} + {cp.n} = {c.n}, "
                         f"m_d = {ci.m} + {cp.m} + {n} = {c.m}, vdim {c.vdim}")
    out = {"atlas": atlas_to_json(fp.z), "pi1": strict_to_json(fp.pi1), "pi2": strict_to_json(fp.pi2)}
    return out, rep


# Joyce demonstration

def joyce_homotopy(lam_second: Poly | None = None, linear_target: bool = False,
                   equal_bundle_maps: bool = False) -> Homotopy:
    """Two morphisms from s=(x^2, 0) to a rank-one chart that agree away from the bundle part.

    ``linear_target`` swaps the target section x^3 for x and the base map x for
    x^3, keeping both morphisms valid; ``equal_bundle_maps`` uses f̂0 twice.
    """
    x = Poly.var(1, 0)
    zero = Poly.zero(1)
    src = Chart(PolyMap(1, [x ** 2, zero]), witnesses=((0,),))
    tgt = Chart(PolyMap(1, [x]) if linear_target else PolyMap(1, [x ** 3]), witnesses=((0,),))
    base = PolyMap(1, [x ** 3]) if linear_target else PolyMap(1, [x])
    fhat0 = PolyMatrix(1, [[x, x]])
    fhat1 = fhat0 if equal_bundle_maps else PolyMatrix(1, [[x, x ** 2]])
    f0, f1 = ChartMorphism(src, tgt, base, fhat0), ChartMorphism(src, tgt, base, fhat1)
    second = lam_second if lam_second is not None else zero
    return Homotopy(PolyMatrix(1, [[zero, second]]), f0, f1)


def _joyce_items(tag: str, h: Homotopy, expect_feasible: bool, order: str,
                 lams: tuple = ()) -> list[CheckItem]:
    items = []
    x = Poly.var(1, 0)
    for label, entry in lams or (("(0, 0)", None),):
        hh = h if entry is None else Homotopy(PolyMatrix(1, [[Poly.zero(1), entry]]), h.f0, h.f1)
        ok = check_homotopy(hh, order)
        items.append(CheckItem("joyce.check-homotopy", f"{tag}, lambda = {label}", PASS if ok else FAIL,
                               {"value": ok}))
    locus = Ideal(1, (x,))
    results = [joyce_style_solve(h, locus, d, order) for d in range(JOYCE_MAX_DEGREE + 1)]
    feasible = [r.feasible for r in results]
    # feasibility only grows with the degree bound
    ok = feasible[-1] == expect_feasible and (expect_feasible or not any(feasible))
    last = results[-1]
    detail = {"value": last.feasible, "max_degree": JOYCE_MAX_DEGREE,
              "degrees_checked": f"0..{JOYCE_MAX_DEGREE}"}
    if last.feasible:
        first = next(r for r in results if r.feasible)
        detail["solution"] = str(first.solution)
        detail["solution_degree"] = first.max_degree
    else:
        detail["certificate"] = last.describe()
    items.append(CheckItem("joyce.joyce-style", tag, PASS if ok else FAIL, detail))
    return items


def cmd_demo_joyce(order: str = "grevlex") -> VerificationReport:
    """Homotopic in the footprint sense yet not related by a big-O style relation."""
    rep = VerificationReport("demo", "joyce")
    x = Poly.var(1, 0)
    lams = (("(0, 0)", Poly.zero(1)), ("(0, x)", x))
    rep.extend(_joyce_items("s_beta = x^3", joyce_homotopy(), False, order, lams))
    rep.extend(_joyce_items("s_beta = x, f = x^3", joyce_homotopy(linear_target=True), True, order))
    rep.extend(_joyce_items("fhat1 = fhat0", joyce_homotopy(equal_bundle_maps=True), True, order))
    rep.notes.append("expected: (true, false) for s_beta = x^3; (true, true) for both variants")
    return rep


# entry point

def _error(exc: Exception, fmt: str) -> int:
    if fmt == "json":
        print(json.dumps({"status": "error", "error": type(exc).__name__, "message": str(exc)}, indent=2))
    else:
        print(f"error: {exc}", file=sys.stderr)
    return EXIT_ERROR


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--report", choices=("text", "json"), default=argparse.SUPPRESS)
    common.add_argument("--order", choices=("grevlex", "lex"), default=argparse.SUPPRESS)
    common.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS,
                        help="list passing items too")
    p = argparse.ArgumentParser(prog="kur", parents=[common],
                                description="Check polynomial Kuranishi data and the 2-category laws.")
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("check", parents=[common], help="run the checker for one kind of object")
    c.add_argument("kind", choices=KINDS)
    c.add_argument("file")
    f = sub.add_parser("fiber", parents=[common], help="build and check a fiber product")
    f.add_argument("file")
    f.add_argument("--out", help="write the product atlas and projections as JSON")
    lw = sub.add_parser("laws", parents=[common], help="run a seeded randomized law suite")
    lw.add_argument("--suite", choices=SUITES, required=True)
    lw.add_argument("--seed", type=int, default=0)
    lw.add_argument("--cases", type=int, default=10)
    lw.add_argument("--max-degree", type=int, default=3)
    lw.add_argument("--max-vars", type=int, default=2)
    lw.add_argument("--timing", action="store_true", help="include elapsed time in JSON reports")
    lw.add_argument("--mutate", action="store_true", help=argparse.SUPPRESS)
    d = sub.add_parser("demo", parents=[common], help="run a bundled demonstration")
    d.add_argument("name", choices=("joyce",))
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    fmt = getattr(args, "report", "text")
    order = getattr(args, "order", "grevlex")
    verbose = getattr(args, "verbose", False)
    runners: dict[str, Callable[[], VerificationReport]] = {
        "check": lambda: cmd_check(args.file, args.kind, order),
        "fiber": lambda: _fiber(args, order),
        "laws": lambda: _laws(args, order),
        "demo": lambda: cmd_demo_joyce(order),
    }
    start = time.perf_counter()
    try:
        rep = runners[args.command]()
    except (KuranishiError, OSError) as exc:
        return _error(exc, fmt)
    if rep.elapsed is None:
        rep.elapsed = time.perf_counter() - start
    if fmt == "json":
        print(rep.dumps(timing=getattr(args, "timing", False)))
    else:
        print(rep.render_text(verbose=verbose or args.command == "demo"))
    return EXIT_PASS if rep.passed else EXIT_FAIL


def _fiber(args, order: str) -> VerificationReport:
    out, rep = cmd_fiber(args.file, order)
    if args.out:
        Path(args.out).write_text(dumps(out) + "\n")
        rep.notes.append(f"wrote {args.out}")
    return rep


def _laws(args, order: str) -> VerificationReport:
    for flag, least in (("cases", 0), ("max_degree", 1), ("max_vars", 1)):
        if getattr(args, flag) < least:
            name = "--" + flag.replace("_", "-")
            raise ParseError(f"must be at least {least}", name)
    return run_suite(args.suite, seed=args.seed, cases=args.cases, max_degree=args.max_degree,
                     max_vars=args.max_vars, order=order, mutate=args.mutate)


if __name__ == "__main__":
    sys.exit(main())
