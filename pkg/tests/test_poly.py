from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import from_sympy, polymaps, polys, symbols, to_sympy
from kuranishi.errors import DimensionError
from kuranishi.poly import Poly, PolyMap, PolyMatrix

x = Poly.var(1, 0)


def test_difference_of_squares():
    assert (x + 1) * (x - 1) == x ** 2 - 1


def test_substitute_square_into_shift():
    g = PolyMap(1, [x ** 2])
    f = PolyMap(1, [x + 1])
    assert g.compose(f) == PolyMap(1, [x ** 2 + 2 * x + 1])


def test_section_projected_to_second_component_vanishes():
    s = PolyMap(1, [x ** 2, Poly.zero(1)])
    second = PolyMap(2, [Poly.var(2, 1)])
    assert second.compose(s) == PolyMap(1, [Poly.zero(1)])


def test_zero_coefficients_are_dropped():
    p = Poly(2, {(1, 0): 0, (0, 1): 2})
    assert list(p.terms) == [(0, 1)]
    assert p == Poly.var(2, 1, 2)


def test_mismatched_variable_counts_raise():
    with pytest.raises(DimensionError):
        _ = Poly.var(1, 0) + Poly.var(2, 0)
    with pytest.raises(DimensionError):
        PolyMap(1, [x]).compose(PolyMap(2, [Poly.var(2, 0), Poly.var(2, 1)]))


def test_jacobian_of_cube():
    assert PolyMap(1, [x ** 3]).jacobian() == PolyMatrix(1, [[3 * x ** 2]])


def test_jacobian_of_linear_map_is_constant():
    x1, x2 = Poly.var(2, 0), Poly.var(2, 1)
    a = PolyMap(2, [2 * x1 - x2, x1.scale(Fraction(1, 2))])
    assert a.jacobian() == PolyMatrix.constant(2, [[2, -1], [Fraction(1, 2), 0]])


def test_jacobian_of_two_variable_section():
    x1, x2 = Poly.var(2, 0), Poly.var(2, 1)
    s = PolyMap(2, [x1 * x2, x2 ** 2])
    assert s.jacobian() == PolyMatrix(2, [[x2, x1], [Poly.zero(2), 2 * x2]])


def test_divided_difference_of_square():
    xy = PolyMap(2, [Poly.var(2, 0) + Poly.var(2, 1)]).as_column()
    assert PolyMap(1, [x ** 2]).divided_difference() == xy.transpose()


def test_divided_difference_of_linear_map():
    x1, x2 = Poly.var(2, 0), Poly.var(2, 1)
    a = PolyMap(2, [3 * x1 - x2])
    assert a.divided_difference() == PolyMatrix.constant(4, [[3, -1]])


def _dd_residual(h: PolyMap) -> PolyMatrix:
    n = h.domain_dim
    both = 2 * n
    xs = PolyMap(both, [Poly.var(both, i) for i in range(n)])
    ys = PolyMap(both, [Poly.var(both, n + i) for i in range(n)])
    lhs = (h.compose(xs) - h.compose(ys)).as_column()
    return lhs - h.divided_difference() @ (xs - ys).as_column()


def test_chain_identity_for_square_then_quadratic():
    u = Poly.var(1, 0)
    h1, h2 = PolyMap(1, [x ** 2]), PolyMap(1, [u + u ** 2])
    both = PolyMap(2, [Poly.var(2, 0)]), PolyMap(2, [Poly.var(2, 1)])
    inner = h1.compose(both[0]).concat(h1.compose(both[1]))
    diff = (both[0] - both[1]).as_column()
    lhs = h2.divided_difference().substitute(inner) @ h1.divided_difference() @ diff
    rhs = h2.compose(h1).divided_difference() @ diff
    assert lhs == rhs


# sympy is the independent oracle for arithmetic, Jacobians and divided differences

@settings(max_examples=60, deadline=None)
@given(polys(3, 3), polys(3, 3), polys(3, 2))
def test_ring_laws(p, q, r):
    assert (p + q) + r == p + (q + r)
    assert p * (q + r) == p * q + p * r
    assert p * q == q * p


@settings(max_examples=60, deadline=None)
@given(polys(2, 3), polys(2, 3))
def test_product_matches_sympy(p, q):
    syms = symbols(2)
    assert from_sympy(to_sympy(p, syms) * to_sympy(q, syms), syms) == p * q


@settings(max_examples=40, deadline=None)
@given(polymaps(2, 1, 3), polymaps(2, 2, 2))
def test_composition_matches_sympy(g, f):
    syms = symbols(2)
    images = {s: to_sympy(c, syms) for s, c in zip(syms, f.components)}
    expected = to_sympy(g.components[0], syms).subs(images, simultaneous=True)
    assert g.compose(f).components[0] == from_sympy(expected, syms)


@settings(max_examples=40, deadline=None)
@given(polymaps(2, 2, 3))
def test_jacobian_matches_sympy(h):
    syms = symbols(2)
    jac = h.jacobian()
    for i, c in enumerate(h.components):
        for j, s in enumerate(syms):
            assert jac[i, j] == from_sympy(sympy.diff(to_sympy(c, syms), s), syms)


@settings(max_examples=30, deadline=None)
@given(polymaps(2, 1, 3))
def test_divided_difference_matches_integral_formula(h):
    xs, ys = symbols(2, "x"), symbols(2, "y")
    t = sympy.Symbol("t")
    line = {a: t * a + (1 - t) * b for a, b in zip(xs, ys)}
    dd = h.divided_difference()
    for j, s in enumerate(xs):
        partial = sympy.diff(to_sympy(h.components[0], xs), s).subs(line, simultaneous=True)
        expected = sympy.integrate(sympy.expand(partial), (t, 0, 1))
        assert dd[0, j] == from_sympy(expected, xs + ys)


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 3).flatmap(lambda n: polymaps(n, 2, 3)))
def test_divided_difference_identities(h):
    n = h.domain_dim
    assert _dd_residual(h).is_zero()
    diag = PolyMap(n, [Poly.var(n, i) for i in range(n)] * 2)
    assert h.divided_difference().substitute(diag) == h.jacobian()


@settings(max_examples=40, deadline=None)
@given(polymaps(2, 2, 2), polymaps(2, 1, 2))
def test_chain_identity(h1, h2):
    both = 4
    xs = PolyMap(both, [Poly.var(both, i) for i in range(2)])
    ys = PolyMap(both, [Poly.var(both, 2 + i) for i in range(2)])
    diff = (xs - ys).as_column()
    inner = h1.compose(xs).concat(h1.compose(ys))
    lhs = h2.divided_difference().substitute(inner) @ h1.divided_difference() @ diff
    rhs = h2.compose(h1).divided_difference() @ diff
    assert lhs == rhs
