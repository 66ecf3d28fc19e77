import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import from_sympy, polys, symbols, to_sympy
from kuranishi.errors import InvalidWitnessError
from kuranishi.groebner import (Ideal, groebner_basis, ideal_membership, locus_defects, normal_form,
                                radical_membership, vanishes_on_locus)
from kuranishi.poly import Poly, PolyMap, PolyMatrix

x1, x2 = Poly.var(2, 0), Poly.var(2, 1)
x = Poly.var(1, 0)


def test_zero_generators_are_dropped():
    assert groebner_basis(Ideal.of([x ** 2, Poly.zero(1)])).generators == (x ** 2,)


def test_lex_basis_of_triangular_system():
    assert set(groebner_basis(Ideal.of([x1 - x2, x2]), "lex").generators) == {x1, x2}


def test_unit_ideal_collapses_to_one():
    assert groebner_basis(Ideal.of([x1 * x2 - 1, x1])).generators == (Poly.one(2),)


def test_empty_ideal_has_empty_basis():
    assert groebner_basis(Ideal(2)).generators == ()
    assert not radical_membership(x1, Ideal(2))


@pytest.mark.parametrize("f, gens, expected", [
    (x1 ** 3, [x1 ** 2], True),
    (x1, [x1 ** 2], False),
    (x1 * x2, [x1, x2 ** 2], True),
    (x2, [x1 - x2, x1 ** 2], False),
])
def test_membership(f, gens, expected):
    assert ideal_membership(f, Ideal.of(gens)) is expected


@pytest.mark.parametrize("f, gens, expected", [
    (x1, [x1 ** 2], True),
    (x1 + x2, [x1 ** 3, x2 ** 2], True),
    (x1, [x1 ** 2 + x2 ** 2], False),
    (x1 * x2, [x1 ** 2 * x2, x1 * x2 ** 2], True),
    (x1, [x1 * x2], False),
    (x2, [x1 - x2, x1 ** 4], True),
])
def test_radical_membership(f, gens, expected):
    assert radical_membership(f, Ideal.of(gens)) is expected


def test_radical_needs_the_rabinowitsch_route():
    # (x1 + x2)^9 is the first power in the ideal, beyond the cheap power attempts
    ideal = Ideal.of([x1 ** 5, x2 ** 5])
    assert radical_membership(x1 + x2, ideal)
    assert not ideal_membership((x1 + x2) ** 8, ideal)


def test_vanishing_of_jacobian_entry_on_double_point():
    s = PolyMap(1, [x ** 2])
    assert vanishes_on_locus(PolyMatrix(1, [[x]]), s, [(0,)])
    assert not vanishes_on_locus(PolyMatrix(1, [[x + 1]]), s, [(0,)])


def test_defect_records_a_witness_point():
    s = PolyMap(2, [x1 * (x1 - 1)])
    defects = locus_defects(PolyMatrix(2, [[x1]]), s, [(0, 5), (1, 0)])
    assert len(defects) == 1
    assert defects[0].point == (1, 0)


def test_invalid_witness_is_rejected():
    with pytest.raises(InvalidWitnessError):
        vanishes_on_locus(PolyMatrix(1, [[x]]), PolyMap(1, [x ** 2]), [(1,)])
    with pytest.raises(InvalidWitnessError):
        vanishes_on_locus(PolyMatrix(1, [[x]]), PolyMap(1, [x ** 2]), [(0, 0)])


def test_square_of_ideal():
    assert set(Ideal.of([x1, x2]).square().generators) == {x1 ** 2, x1 * x2, x2 ** 2}


nonzero = polys(2, 2, 3).filter(lambda p: not p.is_zero())
ideals = st.lists(nonzero, min_size=1, max_size=3).map(lambda gs: Ideal(2, tuple(gs)))


@settings(max_examples=40, deadline=None)
@given(ideals, st.sampled_from(["grevlex", "lex"]))
def test_basis_matches_sympy(ideal, order):
    syms = symbols(2)
    exprs = [to_sympy(g, syms) for g in ideal.generators]
    ours = set(groebner_basis(ideal, order).generators)
    theirs = sympy.groebner(exprs, *syms, order=order, domain=sympy.QQ)
    assert ours == {from_sympy(g, syms) for g in theirs.exprs}


@settings(max_examples=40, deadline=None)
@given(ideals)
def test_basis_is_idempotent(ideal):
    once = groebner_basis(ideal)
    assert groebner_basis(once) == once


@settings(max_examples=40, deadline=None)
@given(ideals, polys(2, 2, 3), polys(2, 2, 3))
def test_combinations_are_members(ideal, a, b):
    gens = ideal.generators
    f = a * gens[0] + b * gens[-1]
    assert ideal_membership(f, ideal)
    assert radical_membership(f, ideal)
    assert normal_form(f, ideal).is_zero()


@settings(max_examples=30, deadline=None)
@given(ideals, polys(2, 2, 3))
def test_membership_matches_sympy_reduction(ideal, f):
    syms = symbols(2)
    exprs = [to_sympy(g, syms) for g in ideal.generators]
    basis = sympy.groebner(exprs, *syms, order="grevlex", domain=sympy.QQ)
    assert ideal_membership(f, ideal) is basis.contains(to_sympy(f, syms))


@settings(max_examples=30, deadline=None)
@given(ideals, polys(2, 2, 3), st.integers(1, 3))
def test_powers_in_ideal_put_base_in_radical(ideal, f, k):
    gens = ideal.generators + (f ** k,)
    assert radical_membership(f, Ideal(2, gens))
