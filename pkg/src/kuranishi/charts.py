"""Kuranishi charts, chart morphisms and homotopies between them.

A chart is a polynomial section ``s: R^n -> R^m`` together with bookkeeping
(footprint id, domain descriptor, witness zeros). A morphism is a pair
``(f, fhat)`` with ``fhat · s_src = s_tgt ∘ f``. A homotopy from ``f0`` to
``f1`` is a matrix ``lam`` (``n_tgt x m_src``) with ``lam · s_src = f1 - f0``
exactly and ``fhat1 - fhat0 = ds_tgt(f0) · lam`` on the zero locus.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations_with_replacement
from typing import Sequence

from .domain import Box, Domain, as_point
from .errors import DimensionError, EndpointMismatchError, InvalidWitnessError, StructuralError
from .groebner import Ideal, locus_defects, normal_form, vanishes_on_locus
from .linalg import solve
from .poly import Poly, PolyMap, PolyMatrix, rational_str
from .report import CheckItem, exact_residual_items, locus_item


@dataclass(frozen=True)
class Chart:
    s: PolyMap
    footprint: str = "U"
    domain: Domain | Box | None = None
    witnesses: tuple = ()

    def __post_init__(self):
        dom = self.domain if self.domain is not None else Domain.full(self.s.domain_dim)
        if isinstance(dom, Box):
            dom = Domain(dom.dim, dom)
        if dom.dim != self.s.domain_dim:
            raise DimensionError("domain dimension differs from the chart dimension")
        object.__setattr__(self, "domain", dom)
        pts = tuple(as_point(w) for w in self.witnesses)
        for w in pts:
            if len(w) != self.n:
                raise InvalidWitnessError(f"witness {list(map(str, w))} has length != {self.n}")
            if any(v != 0 for v in self.s(w)):
                raise InvalidWitnessError(f"witness {list(map(str, w))} is not a zero of s")
            if not dom.contains(w):
                raise InvalidWitnessError(f"witness {list(map(str, w))} lies outside the chart domain")
        object.__setattr__(self, "witnesses", pts)

    @classmethod
    def make(cls, n: int, m: int, s: PolyMap | Sequence[Poly], **kw) -> Chart:
        if not isinstance(s, PolyMap):
            s = PolyMap(n, s)
        if s.domain_dim != n or s.codomain_dim != m:
            raise DimensionError(f"section has shape {s.domain_dim}->{s.codomain_dim}, expected {n}->{m}")
        return cls(s, **kw)

    @property
    def n(self) -> int:
        return self.s.domain_dim

    @property
    def m(self) -> int:
        return self.s.codomain_dim

    @property
    def vdim(self) -> int:
        return self.n - self.m

    @property
    def ideal(self) -> Ideal:
        return Ideal(self.n, self.s.components)

    def same_germ(self, other: Chart) -> bool:
        return self.s == other.s

    def restrict(self, domain: Domain) -> Chart:
        from .atlas import restrict_chart
        return restrict_chart(self, domain)


@dataclass(frozen=True, eq=False)
class ChartMorphism:
    source: Chart
    target: Chart
    f: PolyMap
    fhat: PolyMatrix

    def __post_init__(self):
        a, b = self.source, self.target
        if self.f.domain_dim != a.n or self.f.codomain_dim != b.n:
            raise DimensionError(f"f has shape {self.f.domain_dim}->{self.f.codomain_dim}, expected {a.n}->{b.n}")
        if self.fhat.shape != (b.m, a.m) or self.fhat.nvars != a.n:
            raise DimensionError(f"fhat has shape {self.fhat.shape}, expected {(b.m, a.m)}")

    def same_data(self, other: ChartMorphism) -> bool:
        return self is other or (self.f == other.f and self.fhat == other.fhat)

    def __eq__(self, other) -> bool:
        if not isinstance(other, ChartMorphism):
            return NotImplemented
        return (self is other or (self.same_data(other) and self.source.s == other.source.s
                                  and self.target.s == other.target.s))

    def __hash__(self) -> int:
        return hash((self.f, self.fhat))

    def differential(self) -> PolyMatrix:
        return self.f.jacobian()


@dataclass(frozen=True, eq=False)
class Homotopy:
    lam: PolyMatrix
    f0: ChartMorphism
    f1: ChartMorphism

    def __post_init__(self):
        if not (self.f0.source.same_germ(self.f1.source) and self.f0.target.same_germ(self.f1.target)):
            raise StructuralError("homotopy endpoints do not share source and target charts")
        a, b = self.f0.source, self.f0.target
        if self.lam.shape != (b.n, a.m) or self.lam.nvars != a.n:
            raise DimensionError(f"lambda has shape {self.lam.shape}, expected {(b.n, a.m)}")

    @property
    def source(self) -> Chart:
        return self.f0.source

    @property
    def target(self) -> Chart:
        return self.f0.target


def identity_morphism(chart: Chart) -> ChartMorphism:
    return ChartMorphism(chart, chart, PolyMap.identity(chart.n), PolyMatrix.identity(chart.n, chart.m))


def is_identity(m: ChartMorphism) -> bool:
    return m.f == PolyMap.identity(m.source.n) and m.fhat == PolyMatrix.identity(m.source.n, m.source.m)


def morphism_residual(m: ChartMorphism) -> PolyMap:
    return (m.fhat @ m.source.s) - m.target.s.compose(m.f)


def check_morphism(m: ChartMorphism) -> bool:
    return morphism_residual(m).is_zero()


def morphism_items(m: ChartMorphism, subject: str = "morphism") -> list[CheckItem]:
    return [exact_residual_items("morphism.bundle-identity", subject, morphism_residual(m), m.source.witnesses)]


@lru_cache(maxsize=65536)
def _compose(g: ChartMorphism, f: ChartMorphism, f_source: Chart, g_source: Chart, g_target: Chart) -> ChartMorphism:
    # the charts are part of the key so cached results carry the right domains
    source = f.source
    if not g.source.domain.is_full():
        from .atlas import restrict_chart
        source = restrict_chart(source, g.source.domain.pullback(f.f))
    return ChartMorphism(source, g.target, g.f.compose(f.f), g.fhat.substitute(f.f) @ f.fhat)


def compose_morphisms(g: ChartMorphism, f: ChartMorphism) -> ChartMorphism:
    """``g ∘ f`` with bundle part ``(ĝ ∘ f) · f̂``."""
    if not f.target.same_germ(g.source):
        raise StructuralError("cannot compose: target of f is not the source of g")
    return _compose(g, f, f.source, g.source, g.target)


def zero_homotopy(m: ChartMorphism) -> Homotopy:
    return Homotopy(PolyMatrix.zeros(m.source.n, m.target.n, m.source.m), m, m)


def _witnesses(chart: Chart, witnesses) -> Sequence:
    return chart.witnesses if witnesses is None else witnesses


def homotopy_items(h: Homotopy, subject: str = "homotopy", witnesses=None,
                   order: str = "grevlex") -> list[CheckItem]:
    """The three homotopy conditions as report items."""
    a, b = h.source, h.target
    pts = _witnesses(a, witnesses)
    f0, f1 = h.f0, h.f1
    items = [exact_residual_items("homotopy.global-identity", subject,
                                  (h.lam @ a.s) - (f1.f - f0.f), pts)]
    ds_b = b.s.jacobian().substitute(f0.f)
    lower = (f1.fhat - f0.fhat) - (ds_b @ h.lam)
    items.append(locus_item("homotopy.lower-triangle", subject, locus_defects(lower, a.s, pts, order)))
    upper = (f1.f.jacobian() - f0.f.jacobian()) - (h.lam @ a.s.jacobian())
    items.append(locus_item("homotopy.upper-triangle", subject, locus_defects(upper, a.s, pts, order)))
    return items


def check_homotopy(h: Homotopy, order: str = "grevlex") -> bool:
    return all(i.passed for i in homotopy_items(h, order=order))


def khom_equal(lam_a: PolyMatrix, lam_b: PolyMatrix, chart: Chart, order: str = "grevlex",
               witnesses=None) -> bool:
    """Equality of two quotient bundle maps on the zero locus of ``chart``."""
    if lam_a == lam_b:
        return True
    return vanishes_on_locus(lam_a - lam_b, chart.s, _witnesses(chart, witnesses), order)


def morphisms_agree(p: ChartMorphism, q: ChartMorphism, order: str = "grevlex") -> bool:
    """Exact equality, falling back to equality on the zero locus of the source."""
    if p.same_data(q):
        return True
    a = p.source
    return (vanishes_on_locus((p.f - q.f).as_column(), a.s, a.witnesses, order)
            and vanishes_on_locus(p.fhat - q.fhat, a.s, a.witnesses, order))


def homotopies_equal(h: Homotopy, k: Homotopy, order: str = "grevlex") -> bool:
    return (morphisms_agree(h.f0, k.f0, order) and morphisms_agree(h.f1, k.f1, order)
            and khom_equal(h.lam, k.lam, h.source, order))


def negate(h: Homotopy) -> Homotopy:
    """The reverse homotopy ``f1 ≅ f0`` via ``-lam``."""
    return Homotopy(-h.lam, h.f1, h.f0)


def vertical_add(h01: Homotopy, h12: Homotopy, order: str = "grevlex") -> Homotopy:
    if not h01.source.same_germ(h12.source) or not h01.target.same_germ(h12.target):
        raise EndpointMismatchError("homotopies live between different charts")
    if not morphisms_agree(h01.f1, h12.f0, order):
        raise EndpointMismatchError("end of the first homotopy is not the start of the second")
    return Homotopy(h01.lam + h12.lam, h01.f0, h12.f1)


def _along(dd: PolyMatrix, first: PolyMap, second: PolyMap) -> PolyMatrix:
    """Evaluate a divided difference at (first(x), second(x))."""
    return dd.substitute(first.concat(second))


def horizontal_star(hbc: Homotopy, hab: Homotopy) -> Homotopy:
    """``lam_ac = lam_bc(f1) · f̂1 + δg0(f1, f0) · lam_ab``."""
    if not hab.target.same_germ(hbc.source):
        raise StructuralError("homotopies are not composable: chart chain mismatch")
    f0, f1, g0, g1 = hab.f0, hab.f1, hbc.f0, hbc.f1
    a = hab.source
    lam = PolyMatrix.zeros(a.n, hbc.target.n, a.m)
    if not hbc.lam.is_zero():
        lam = lam + hbc.lam.substitute(f1.f) @ f1.fhat
    if not hab.lam.is_zero():
        lam = lam + _along(g0.f.divided_difference(), f1.f, f0.f) @ hab.lam
    return Homotopy(lam, compose_morphisms(g0, f0), compose_morphisms(g1, f1))


def star_with_morphism(left, right) -> Homotopy:
    """Whiskering: a morphism on either side is read as its zero homotopy."""
    if isinstance(left, ChartMorphism) and isinstance(right, Homotopy):
        return horizontal_star(zero_homotopy(left), right)
    if isinstance(left, Homotopy) and isinstance(right, ChartMorphism):
        return horizontal_star(left, zero_homotopy(right))
    if isinstance(left, Homotopy) and isinstance(right, Homotopy):
        return horizontal_star(left, right)
    raise TypeError("star_with_morphism needs at least one homotopy")


@dataclass
class JoyceStyleResult:
    feasible: bool
    max_degree: int
    solution: PolyMatrix | None = None
    certificate: list = field(default_factory=list)

    def __bool__(self) -> bool:
        return self.feasible

    def describe(self) -> str:
        if self.feasible:
            return f"feasible at degree <= {self.max_degree}: {self.solution}"
        parts = [f"{w.removesuffix('/1')} * [entry {e}, coefficient of {mono}]" for e, mono, w in self.certificate]
        return (f"infeasible at degree <= {self.max_degree}; the combination "
                + " + ".join(parts) + " of required coefficients cannot be produced")


def _monomials(nvars: int, degree: int) -> list[tuple]:
    out = []
    for d in range(degree + 1):
        for combo in combinations_with_replacement(range(nvars), d):
            e = [0] * nvars
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def joyce_style_solve(h: Homotopy, locus_ideal: Ideal, max_degree: int,
                      order: str = "grevlex") -> JoyceStyleResult:
    """Search for lam' (entries of degree <= max_degree) with
    ``(f̂1 - f̂0) - ds_tgt(f0) · lam'`` entrywise in ``locus_ideal**2``.

    This is a demonstrative comparison with a big-O style relation; it is a
    linear feasibility problem because normal forms are linear.
    """
    a, b = h.source, h.target
    if locus_ideal.nvars != a.n:
        raise DimensionError("locus ideal lives in the wrong ring")
    square = locus_ideal.square()
    target = h.f1.fhat - h.f0.fhat
    ds_b = b.s.jacobian().substitute(h.f0.f)
    monos = _monomials(a.n, max_degree)
    columns = [(r, c, mono) for c in range(a.m) for r in range(b.n) for mono in monos]
    rows: dict = {}
    rhs: dict = {}
    for (r, c, mono) in columns:
        mono_poly = Poly.monomial(mono) if a.n else Poly.one(0)
        for k in range(b.m):
            contrib = normal_form(ds_b[k, r] * mono_poly, square, order)
            for e, v in contrib.terms.items():
                rows.setdefault((k, c, e), {})[(r, c, mono)] = v
    for k in range(b.m):
        for c in range(a.m):
            for e, v in normal_form(target[k, c], square, order).terms.items():
                rhs[(k, c, e)] = v
                rows.setdefault((k, c, e), {})
    keys = sorted(rows)
    result = solve([rows[k] for k in keys], [rhs.get(k, 0) for k in keys], columns)
    if result.feasible:
        entries = [[Poly.zero(a.n) for _ in range(a.m)] for _ in range(b.n)]
        for (r, c, mono), v in result.values.items():
            if v:
                entries[r][c] = entries[r][c] + Poly(a.n, {mono: v})
        return JoyceStyleResult(True, max_degree, PolyMatrix(a.n, entries, ncols=a.m))
    cert = []
    for idx, w in sorted(result.certificate.items()):
        k, c, e = keys[idx]
        mono = Poly.monomial(e).to_str() if a.n else "1"
        cert.append(((k, c), mono, rational_str(w)))
    return JoyceStyleResult(False, max_degree, None, cert)


def joyce_style_check(h: Homotopy, locus_ideal: Ideal, max_degree: int, order: str = "grevlex") -> bool:
    return joyce_style_solve(h, locus_ideal, max_degree, order).feasible
