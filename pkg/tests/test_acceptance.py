"""Acceptance suite: one PASS/FAIL line per criterion, with the pinned case counts and time limits.

Run with ``pytest tests/test_acceptance.py`` or ``python3 tests/test_acceptance.py``.
"""
import json
import shutil
import subprocess
import sys
import time
from pathlib import Path

import pytest

from kuranishi.cli import JOYCE_MAX_DEGREE, checkers_for, cmd_check, cmd_demo_joyce
from kuranishi.laws import run_suite
from kuranishi.serialize import load_document

GALLERY = Path(__file__).resolve().parents[1] / "src" / "kuranishi" / "gallery"

# (suite, cases, seconds, laws that must appear in the report)
SUITE_CRITERIA = {
    2: ("star", 100, 60, {"star.associativity", "star.interchange"}),
    3: ("pre2cat", 50, 300, {"pre.composition-associativity", "pre.vertical-associativity",
                             "pre.horizontal-associativity", "pre.interchange"}),
    4: ("kur", 25, 300, {"kur.horizontal-associativity", "kur.vertical-associativity", "kur.interchange",
                         "refine.unit", "refine.associativity", "refine.symmetry"}),
    5: ("fiber", 25, 600, {"fiber.product-valid", "fiber.vdim", "fiber.theta-u-chi", "fiber.lambda-identities"}),
    6: ("taylor", 200, 30, {"taylor.difference", "taylor.diagonal", "taylor.chain"}),
    7: ("manifold", 20, 30, {"manifold.trivial-slots", "manifold.roof-composition"}),
}
MUTATION_COUNT = 10


def report_line(number: int, ok: bool, message: str) -> str:
    return f"{'PASS' if ok else 'FAIL'} criterion {number}: {message}"


def emit(capsys, number: int, ok: bool, message: str) -> None:
    with capsys.disabled():
        print("\n" + report_line(number, ok, message), flush=True)


def command_seconds(argv) -> tuple[int, float]:
    start = time.perf_counter()
    code = subprocess.run(argv, capture_output=True).returncode
    return code, time.perf_counter() - start


def joyce_criterion():
    # the whole command, interpreter start-up included, when the console script is installed
    kur = shutil.which("kur")
    argv = [kur, "demo", "joyce"] if kur else [sys.executable, "-m", "kuranishi.cli", "demo", "joyce"]
    code, elapsed = command_seconds(argv)
    rep = cmd_demo_joyce()
    items = {(i.check, i.subject): i for i in rep.items}
    homotopic = all(items[("joyce.check-homotopy", f"s_beta = x^3, lambda = {lam}")].detail["value"]
                    for lam in ("(0, 0)", "(0, x)"))
    style = items[("joyce.joyce-style", "s_beta = x^3")].detail
    ok = (homotopic and style["value"] is False and "certificate" in style
          and style["max_degree"] == JOYCE_MAX_DEGREE == 8 and code == 0 and elapsed < 1.0)
    return ok, (f"joyce demo: check_homotopy={homotopic}, joyce_style={style['value']} up to degree "
                f"{style['max_degree']}, certificate={'certificate' in style}, exit {code}, {elapsed:.2f}s < 1s")


def suite_criterion(number: int):
    suite, cases, limit, laws = SUITE_CRITERIA[number]
    rep = run_suite(suite, seed=0, cases=cases)
    seen = {i.check for i in rep.items}
    ok = rep.passed and laws <= seen and rep.elapsed < limit
    fails = len(rep.failures())
    return ok, (f"{suite} suite: {cases} cases, {fails} failing items, "
                f"laws present={laws <= seen}, {rep.elapsed:.2f}s < {limit}s")


def mutation_outcome(path: Path):
    meta = json.loads(path.read_text())["mutation"]
    rep = cmd_check(str(path), meta["kind"])
    localized = [i for i in rep.failures() if i.check == meta["check"] and i.subject == meta["subject"]]
    witnessed = all("point" in i.detail for i in rep.failures())
    failing = [k for k, r in checkers_for(load_document(path)).items() if not r.passed]
    return failing == [meta["kind"]] and bool(localized) and witnessed, meta


def mutation_criterion():
    paths = sorted((GALLERY / "mutations").glob("*.json"))
    caught = [p.stem for p in paths if mutation_outcome(p)[0]]
    ok = len(paths) == MUTATION_COUNT and len(caught) == len(paths)
    missed = sorted({p.stem for p in paths} - set(caught))
    return ok, f"mutations: {len(caught)}/{len(paths)} rejected by exactly one checker with a witness point" + (
        f"; missed {', '.join(missed)}" if missed else "")


def test_criterion_1_joyce(capsys):
    ok, msg = joyce_criterion()
    emit(capsys, 1, ok, msg)
    assert ok, msg


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(SUITE_CRITERIA))
def test_suite_criteria(capsys, number):
    ok, msg = suite_criterion(number)
    emit(capsys, number, ok, msg)
    assert ok, msg


def test_criterion_8_mutations(capsys):
    ok, msg = mutation_criterion()
    emit(capsys, 8, ok, msg)
    assert ok, msg


if __name__ == "__main__":
    results = [joyce_criterion()] + [suite_criterion(k) for k in sorted(SUITE_CRITERIA)] + [mutation_criterion()]
    for number, (ok, msg) in enumerate(results, start=1):
        print(report_line(number, ok, msg))
    sys.exit(0 if all(ok for ok, _ in results) else 1)
