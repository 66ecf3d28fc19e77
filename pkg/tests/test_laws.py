import pytest

from kuranishi.laws import CASES, SUITES, case_rng, mutated_star, run_suite, taylor_laws
from kuranishi.poly import Poly, PolyMap

SMALL = {"star": 5, "pre2cat": 2, "kur": 1, "fiber": 4, "taylor": 20, "manifold": 3}


def test_every_suite_has_a_case_body():
    assert set(CASES) == set(SUITES)


@pytest.mark.parametrize("suite", SUITES)
def test_small_runs_pass(suite):
    rep = run_suite(suite, seed=1, cases=SMALL[suite])
    assert rep.passed, rep.render_text()
    assert {i.subject for i in rep.items} == {f"case {k}" for k in range(SMALL[suite])}


def test_reports_are_reproducible():
    a = run_suite("star", seed=4, cases=3)
    b = run_suite("star", seed=4, cases=3)
    assert a.dumps() == b.dumps()


def test_cases_do_not_depend_on_run_length():
    short = run_suite("taylor", seed=2, cases=2).items
    longer = run_suite("taylor", seed=2, cases=5).items
    assert [i.to_json() for i in short] == [i.to_json() for i in longer[:len(short)]]


def test_case_streams_are_independent():
    assert case_rng("star", 0, 1).random() != case_rng("star", 0, 2).random()
    assert case_rng("star", 0, 1).random() == case_rng("star", 0, 1).random()


def test_lex_order_gives_the_same_verdicts():
    assert run_suite("star", seed=3, cases=3, order="lex").passed


def test_mutated_star_breaks_associativity():
    rep = run_suite("star", seed=0, cases=5, mutate=True)
    assert "star.associativity" in {i.check for i in rep.failures()}


def test_mutation_is_undone_afterwards():
    with mutated_star():
        pass
    assert run_suite("star", seed=0, cases=2).passed


def test_unknown_suite():
    with pytest.raises(ValueError):
        run_suite("nope")


def test_zero_cases():
    rep = run_suite("kur", cases=0)
    assert rep.passed and rep.items == []


def test_taylor_laws_on_a_fixed_pair():
    x, y = Poly.var(2, 0), Poly.var(2, 1)
    u = Poly.var(1, 0)
    inner = PolyMap(2, [x * y, x - y])
    outer = PolyMap(2, [x ** 2 + x, y ** 2 + y])
    assert all(ok for _, ok in taylor_laws(inner, outer))
    assert all(ok for _, ok in taylor_laws(PolyMap(1, [u ** 3]), PolyMap(1, [u - 1])))


@pytest.mark.slow
@pytest.mark.parametrize("suite, cases", [("star", 30), ("pre2cat", 10), ("fiber", 15), ("manifold", 10)])
def test_longer_runs_pass(suite, cases):
    assert run_suite(suite, seed=7, cases=cases).passed
