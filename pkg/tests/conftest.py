from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import pytest
import sympy
from hypothesis import strategies as st

from kuranishi.poly import Poly, PolyMap

GALLERY = Path(__file__).resolve().parents[1] / "src" / "kuranishi" / "gallery"

coefficients = st.one_of(st.integers(-3, 3), st.fractions(min_value=-2, max_value=2, max_denominator=3))


@st.composite
def exponents(draw, nvars: int, max_degree: int) -> tuple:
    # spend a degree budget variable by variable instead of filtering on the total
    left, out = max_degree, []
    for _ in range(nvars):
        e = draw(st.integers(0, left))
        out.append(e)
        left -= e
    return tuple(out)


@st.composite
def polys(draw, nvars: int, max_degree: int = 3, max_terms: int = 5) -> Poly:
    terms = draw(st.dictionaries(exponents(nvars, max_degree), coefficients, max_size=max_terms))
    return Poly(nvars, {e: Fraction(c) for e, c in terms.items()})


@st.composite
def polymaps(draw, nvars: int, size: int, max_degree: int = 2) -> PolyMap:
    return PolyMap(nvars, [draw(polys(nvars, max_degree, 4)) for _ in range(size)])


def symbols(n: int, prefix: str = "x") -> list:
    return list(sympy.symbols(f"{prefix}1:{n + 1}")) if n else []


def to_sympy(p: Poly, syms) -> sympy.Expr:
    out = sympy.Integer(0)
    for exps, coef in p.terms.items():
        term = sympy.Rational(int(coef.numerator), int(coef.denominator))
        for s, e in zip(syms, exps):
            term *= s ** e
        out += term
    return sympy.expand(out)


def from_sympy(expr, syms) -> Poly:
    poly = sympy.Poly(sympy.expand(expr), *syms)
    return Poly(len(syms), {tuple(m): Fraction(int(c.p), int(c.q)) for m, c in poly.terms() if c != 0})


@pytest.fixture
def gallery() -> Path:
    return GALLERY
