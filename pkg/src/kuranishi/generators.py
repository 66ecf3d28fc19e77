"""Seeded random generators of valid charts, atlases, morphisms and 2-morphisms.

Everything is built from closed formulas, never by rejection:

* a *base* section with known rational zeros is pulled back to each chart
  along an affine automorphism and twisted by a unimodular matrix, so the
  exact transitions satisfy every axiom on the nose;
* the exact data are then moved by homotopies (perturbations ``f + L s``),
  and every dependent homotopy is transported along by the star and
  vertical compositions of the chart layer.
"""
from __future__ import annotations

import random
from dataclasses import dataclass
from itertools import combinations_with_replacement

from gmpy2 import mpq

from .atlas import Atlas, build_atlas
from .charts import Chart, ChartMorphism, Homotopy, negate, star_with_morphism, vertical_add
from .errors import PreconditionError
from .localization import Roof, refine_atlas, split_chart_pieces
from .morphisms import StrictMorphism, TwoMorphism, compose_strict
from .poly import Poly, PolyMap, PolyMatrix

NUMERATORS = (-2, -1, 1, 2)
DENOMINATORS = (1, 2)


def coefficient(rng: random.Random, allow_zero: bool = False) -> mpq:
    num = rng.choice((-2, -1, 0, 1, 2) if allow_zero else NUMERATORS)
    return mpq(num, rng.choice(DENOMINATORS))


def random_poly(rng: random.Random, nvars: int, degree: int, density: float = 0.5) -> Poly:
    terms = {}
    for d in range(degree + 1):
        for combo in combinations_with_replacement(range(nvars), d):
            if rng.random() < density:
                exps = [0] * nvars
                for v in combo:
                    exps[v] += 1
                terms[tuple(exps)] = coefficient(rng)
    return Poly(nvars, terms)


def random_polymap(rng: random.Random, n: int, k: int, degree: int) -> PolyMap:
    return PolyMap(n, [random_poly(rng, n, degree) for _ in range(k)])


def _invert(a: list[list[mpq]]) -> list[list[mpq]]:
    n = len(a)
    work = [list(map(mpq, row)) + [mpq(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    for col in range(n):
        piv = next(r for r in range(col, n) if work[r][col])
        work[col], work[piv] = work[piv], work[col]
        inv = 1 / work[col][col]
        work[col] = [v * inv for v in work[col]]
        for r in range(n):
            if r != col and work[r][col]:
                f = work[r][col]
                work[r] = [v - f * w for v, w in zip(work[r], work[col])]
    return [row[n:] for row in work]


def affine_map(n: int, a: list[list[mpq]], b: list[mpq]) -> PolyMap:
    comps = []
    for row, off in zip(a, b):
        terms = {tuple(int(k == j) for k in range(n)): c for j, c in enumerate(row) if c}
        if off:
            terms[(0,) * n] = off
        comps.append(Poly(n, terms))
    return PolyMap(n, comps)


# base sections

@dataclass(frozen=True)
class Base:
    """Section ``s`` on R^n with a list of exact rational zeros."""

    s: PolyMap
    zeros: tuple

    @property
    def n(self) -> int:
        return self.s.domain_dim

    @property
    def m(self) -> int:
        return self.s.codomain_dim


def random_base(rng: random.Random, n: int, m: int, max_degree: int = 2, nzeros: int = 2) -> Base:
    """Components ``c (x_k - a_k)``, ``(x_k - a_k)^2`` or ``(x_k - a_k) r(x)`` for k < m."""
    if m > n:
        raise PreconditionError("obstruction rank exceeds dimension")
    anchor = [coefficient(rng, allow_zero=True) for _ in range(n)]
    comps = []
    for k in range(m):
        lin = Poly.var(n, k) - Poly.const(n, anchor[k])
        kind = rng.choice(("linear", "square", "product")) if max_degree >= 2 else "linear"
        if kind == "linear":
            comps.append(lin.scale(coefficient(rng)))
        elif kind == "square":
            comps.append(lin * lin)
        else:
            comps.append(lin * (random_poly(rng, n, max_degree - 1) + Poly.const(n, coefficient(rng))))
    zeros = {tuple(anchor)}
    if n > m:
        for _ in range(nzeros - 1):
            zeros.add(tuple(anchor[:m]) + tuple(coefficient(rng, allow_zero=True) for _ in range(n - m)))
    return Base(PolyMap(n, comps), tuple(sorted(zeros)))


def stabilize(base: Base, extra: int) -> Base:
    """``s'(x, z) = (s(x), z)`` on R^(n+extra)."""
    n = base.n + extra
    comps = [p.embed(n, range(base.n)) for p in base.s] + [Poly.var(n, base.n + k) for k in range(extra)]
    return Base(PolyMap(n, comps), tuple(z + (mpq(0),) * extra for z in base.zeros))


@dataclass(frozen=True)
class BaseMap:
    """``F: R^n -> R^n'`` with ``Fhat · s = s' ∘ F``."""

    source: Base
    target: Base
    f: PolyMap
    fhat: PolyMatrix


def identity_base_map(base: Base) -> BaseMap:
    return BaseMap(base, base, PolyMap.identity(base.n), PolyMatrix.identity(base.n, base.m))


def stabilization_map(base: Base, extra: int) -> BaseMap:
    top = stabilize(base, extra)
    n = base.n
    f = PolyMap(n, [Poly.var(n, k) for k in range(n)] + [Poly.zero(n)] * extra)
    fhat = PolyMatrix.block(n, [[PolyMatrix.identity(n, base.m)], [PolyMatrix.zeros(n, extra, base.m)]])
    return BaseMap(base, top, f, fhat)


def manifold_base_map(rng: random.Random, base: Base, target: Base, degree: int = 1) -> BaseMap:
    """Any polynomial map into a base without obstruction bundle."""
    if target.m:
        raise PreconditionError("target base has an obstruction bundle")
    f = random_polymap(rng, base.n, target.n, degree)
    return BaseMap(base, target, f, PolyMatrix.zeros(base.n, 0, base.m))


def compose_base_maps(g: BaseMap, f: BaseMap) -> BaseMap:
    return BaseMap(f.source, g.target, g.f.compose(f.f), g.fhat.substitute(f.f) @ f.fhat)


# chart models

@dataclass(frozen=True)
class ChartModel:
    """Chart coordinates ``x = psi(u)`` with ``s_chart(x) = twist(x) · s_base(phi(x))``."""

    phi: PolyMap
    psi: PolyMap
    twist: PolyMatrix
    twist_inv: PolyMatrix


def random_chart_model(rng: random.Random, base: Base, shear: bool = True, twist: bool = True) -> ChartModel:
    n, m = base.n, base.m
    a = [[mpq(0)] * n for _ in range(n)]
    for i in range(n):
        a[i][i] = mpq(rng.choice((1, -1, 2, -2))) / rng.choice((1, 2))
        for j in range(i + 1, n):
            if shear and rng.random() < 0.5:
                a[i][j] = coefficient(rng)
    if rng.random() < 0.5:
        rng.shuffle(a)
    b = [coefficient(rng, allow_zero=True) for _ in range(n)]
    ainv = _invert(a)
    binv = [-sum((ainv[i][j] * b[j] for j in range(n)), mpq(0)) for i in range(n)]
    phi, psi = affine_map(n, a, b), affine_map(n, ainv, binv)
    diag = [mpq(rng.choice((1, -1, 2))) / rng.choice((1, 2)) for _ in range(m)]
    u = PolyMatrix.constant(n, [[diag[i] if i == j else 0 for j in range(m)] for i in range(m)], ncols=m)
    uinv = PolyMatrix.constant(n, [[1 / diag[i] if i == j else 0 for j in range(m)] for i in range(m)], ncols=m)
    if twist and m >= 2 and rng.random() < 0.6:
        r, c = rng.sample(range(m), 2)
        entry = Poly.var(n, rng.randrange(n), coefficient(rng))
        e = [[Poly.one(n) if i == j else Poly.zero(n) for j in range(m)] for i in range(m)]
        einv = [row[:] for row in e]
        e[r][c], einv[r][c] = entry, -entry
        u = PolyMatrix(n, e, ncols=m) @ u
        uinv = uinv @ PolyMatrix(n, einv, ncols=m)
    return ChartModel(phi, psi, u, uinv)


def model_chart(base: Base, model: ChartModel, footprint: str = "U") -> Chart:
    s = model.twist @ base.s.compose(model.phi)
    return Chart(s, footprint, None, tuple(model.psi(z) for z in base.zeros))


def exact_transition(base: Base, mi: ChartModel, mj: ChartModel, ci: Chart, cj: Chart) -> ChartMorphism:
    f = mj.psi.compose(mi.phi)
    return ChartMorphism(ci, cj, f, mj.twist.substitute(f) @ mi.twist_inv)


def bump(f: ChartMorphism, lam: PolyMatrix) -> tuple[ChartMorphism, Homotopy]:
    """Move ``f`` along ``lam``: returns ``f'`` and the homotopy ``f ≅ f'``."""
    a, b = f.source, f.target
    f1 = f.f + lam @ a.s
    dd = b.s.divided_difference().substitute(f1.concat(f.f))
    moved = ChartMorphism(a, b, f1, f.fhat + dd @ lam)
    return moved, Homotopy(lam, f, moved)


def random_perturbation(rng: random.Random, source: Chart, target: Chart, degree: int = 1,
                        density: float = 0.4) -> PolyMatrix:
    n = source.n
    rows = [[random_poly(rng, n, rng.randint(0, degree), density) if rng.random() < density else Poly.zero(n)
             for _ in range(source.m)] for _ in range(target.n)]
    if source.m and target.n and all(not p for r in rows for p in r):
        rows[rng.randrange(target.n)][rng.randrange(source.m)] = Poly.const(n, coefficient(rng))
    return PolyMatrix(n, rows, ncols=source.m)


def syzygy_noise(rng: random.Random, chart: Chart, rows: int) -> PolyMatrix:
    """A matrix ``N`` with ``N · s = 0`` exactly (zero when m < 2)."""
    n, m = chart.n, chart.m
    if m < 2:
        return PolyMatrix.zeros(n, rows, m)
    a, b = rng.sample(range(m), 2)
    out = []
    for _ in range(rows):
        c = coefficient(rng, allow_zero=True)
        row = [Poly.zero(n)] * m
        row[a] = chart.s[b].scale(c)
        row[b] = chart.s[a].scale(-c)
        out.append(row)
    return PolyMatrix(n, out, ncols=m)


# atlases

@dataclass
class GenAtlas:
    atlas: Atlas
    base: Base
    models: dict
    exact: dict                 # (i, j) -> exact transition
    moves: dict                 # (i, j) -> homotopy exact ≅ actual transition


def random_atlas(rng: random.Random, base: Base, ncharts: int = 2, perturb: float = 0.5,
                 perturb_degree: int = 1, name: str = "X", footprint: str = "U",
                 labels: list | None = None) -> GenAtlas:
    labels = labels if labels is not None else list(range(ncharts))
    models = {i: random_chart_model(rng, base) for i in labels}
    charts = {i: model_chart(base, models[i], footprint) for i in labels}
    exact, moves, trans = {}, {}, {}
    for i in labels:
        for j in labels:
            g = exact_transition(base, models[i], models[j], charts[i], charts[j])
            exact[(i, j)] = g
            lam = PolyMatrix.zeros(charts[i].n, charts[j].n, charts[i].m)
            if i != j and base.m and rng.random() < perturb:
                lam = random_perturbation(rng, charts[i], charts[j], perturb_degree)
            f, mv = bump(g, lam) if not lam.is_zero() else (g, Homotopy(lam, g, g))
            trans[(i, j)] = f
            moves[(i, j)] = mv
    cocycles = {}
    for i in labels:
        for j in labels:
            for k in labels:
                # f_ik ≅ g_ik = g_jk ∘ g_ij ≅ f_jk ∘ f_ij
                h = vertical_add(negate(moves[(i, k)]), star_with_morphism(moves[(j, k)], moves[(i, j)]))
                cocycles[(i, j, k)] = h.lam
    atlas = build_atlas(base.n - base.m, charts, trans, cocycles, name=name)
    return GenAtlas(atlas, base, models, exact, moves)


# strict morphisms and 2-morphisms

@dataclass
class GenMorphism:
    morphism: StrictMorphism
    source: GenAtlas
    target: GenAtlas
    base_map: BaseMap
    exact: dict                 # i -> exact local morphism
    moves: dict                 # i -> homotopy exact ≅ actual local morphism


def exact_local(x: GenAtlas, y: GenAtlas, base_map: BaseMap, i, p) -> ChartMorphism:
    mx, my = x.models[i], y.models[p]
    f = my.psi.compose(base_map.f.compose(mx.phi))
    fhat = my.twist.substitute(f) @ base_map.fhat.substitute(mx.phi) @ mx.twist_inv
    return ChartMorphism(x.atlas.charts[i], y.atlas.charts[p], f, fhat)


def _chain(*hs: Homotopy) -> Homotopy:
    out = hs[0]
    for h in hs[1:]:
        out = vertical_add(out, h)
    return out


def random_strict(rng: random.Random, x: GenAtlas, y: GenAtlas, base_map: BaseMap, tau: dict | None = None,
                  perturb: float = 0.5, noise: float = 0.3, name: str = "h") -> GenMorphism:
    if base_map.source != x.base or base_map.target != y.base:
        raise PreconditionError("base map does not connect the atlas bases")
    xa, ya = x.atlas, y.atlas
    tau = tau if tau is not None else {i: rng.choice(list(ya.charts)) for i in xa.charts}
    exact, moves, locals_ = {}, {}, {}
    for i, c in xa.charts.items():
        h0 = exact_local(x, y, base_map, i, tau[i])
        k = PolyMatrix.zeros(c.n, ya.charts[tau[i]].n, c.m)
        if c.m and rng.random() < perturb:
            k = random_perturbation(rng, c, ya.charts[tau[i]])
        h, mv = bump(h0, k) if not k.is_zero() else (h0, Homotopy(k, h0, h0))
        exact[i], moves[i], locals_[i] = h0, mv, h
    deltas = {}
    for pid in xa.overlaps2:
        i, j = xa.pair_charts(pid)
        f_ij = xa.transitions[pid]
        q = (tau[i], tau[j])
        total = _chain(negate(star_with_morphism(moves[j], f_ij)),
                       negate(star_with_morphism(exact[j], x.moves[pid])),
                       star_with_morphism(y.moves[q], exact[i]),
                       star_with_morphism(ya.transitions[q], moves[i]))
        lam = total.lam
        if rng.random() < noise:
            lam = lam + syzygy_noise(rng, xa.charts[i], lam.nrows)
        deltas[pid] = lam
    m = StrictMorphism(xa, ya, tau, locals_, deltas, name=name)
    return GenMorphism(m, x, y, base_map, exact, moves)


def random_two_morphism(rng: random.Random, h1: GenMorphism, h2: GenMorphism, noise: float = 0.3,
                        name: str = "u") -> TwoMorphism:
    """The canonical 2-morphism between two generated morphisms over the same base map."""
    if h1.base_map != h2.base_map or h1.source is not h2.source or h1.target is not h2.target:
        raise PreconditionError("2-morphisms need morphisms over the same base map and atlases")
    y = h1.target
    ups = {}
    for i, c in h1.source.atlas.charts.items():
        q = (h1.morphism.tau[i], h2.morphism.tau[i])
        total = _chain(negate(h2.moves[i]),
                       star_with_morphism(y.moves[q], h1.exact[i]),
                       star_with_morphism(y.atlas.transitions[q], h1.moves[i]))
        lam = total.lam
        if rng.random() < noise:
            lam = lam + syzygy_noise(rng, c, lam.nrows)
        ups[i] = lam
    return TwoMorphism(h1.morphism, h2.morphism, ups, name=name)


def random_dims(rng: random.Random, max_vars: int = 2) -> tuple[int, int]:
    n = rng.randint(1, max_vars)
    return n, rng.randint(0, n)


# refinements, roofs and roof homotopies

def refine_gen(x: GenAtlas, r: StrictMorphism) -> GenAtlas:
    """Generator data for the source of a refinement of ``x.atlas``.

    Homotopies only see chart germs, so the parent's moves are reused as is.
    """
    a = r.source
    models = {k: x.models[r.tau[k]] for k in a.charts}
    exact = {pid: x.exact[r.delta_targets[pid]] for pid in a.overlaps2}
    moves = {pid: x.moves[r.delta_targets[pid]] for pid in a.overlaps2}
    for pid in a.overlaps2:
        exact.setdefault(a.pair_charts(pid), exact[pid])
        moves.setdefault(a.pair_charts(pid), moves[pid])
    return GenAtlas(a, x.base, models, exact, moves)


def pull_gen(h: GenMorphism, leg: StrictMorphism, w: GenAtlas, order: str = "grevlex") -> GenMorphism:
    """``h ∘ leg`` for a leg with identity local data, with generator bookkeeping."""
    m = compose_strict(h.morphism, leg, order=order)
    exact = {k: h.exact[leg.tau[k]] for k in w.atlas.charts}
    moves = {k: h.moves[leg.tau[k]] for k in w.atlas.charts}
    return GenMorphism(m, w, h.target, h.base_map, exact, moves)


def random_refinement(rng: random.Random, x: GenAtlas, split: float = 0.5, name: str | None = None):
    """Split some charts of ``x`` along a coordinate hyperplane through a witness."""
    pieces = {}
    for i, c in x.atlas.charts.items():
        if rng.random() < split and c.n:
            coord = rng.randrange(c.n)
            cut = c.witnesses[0][coord] if c.witnesses else 0
            pieces[i] = split_chart_pieces(x.atlas, i, coord, cut)
    r = refine_atlas(x.atlas, pieces, name=name)
    return r, refine_gen(x, r)


@dataclass
class GenRoof:
    roof: object
    apex: GenAtlas
    h: GenMorphism


def random_roof(rng: random.Random, x: GenAtlas, y: GenAtlas, base_map: BaseMap, split: float = 0.5,
                name: str = "R", **kw) -> GenRoof:
    r, xp = random_refinement(rng, x, split, name=f"{x.atlas.name}/{name}")
    h = random_strict(rng, xp, y, base_map, name=f"h{name}", **kw)
    return GenRoof(Roof(r, h.morphism, name=name), xp, h)


def random_roof_homotopy(rng: random.Random, left: GenRoof, right: GenRoof, noise: float = 0.3,
                         name: str = "chi", order: str = "grevlex"):
    """Cell on the canonical pull-back of the two refinements."""
    from .localization import RoofHomotopy, canonical_pullback
    pb = canonical_pullback(left.roof.r, right.roof.r, name=f"W[{name}]", with_quads=False)
    w = refine_gen(left.apex, pb.r)
    a = pull_gen(left.h, pb.r, w, order)
    b = pull_gen(right.h, pb.h, w, order)
    cell = random_two_morphism(rng, a, b, noise, name=name)
    return RoofHomotopy(left.roof, right.roof, pb.r, pb.h, cell, name=name)


def matched_manifold_maps(rng: random.Random, bx: Base, by: Base, bm: Base, degree: int = 1) -> tuple[BaseMap, BaseMap]:
    """Maps into a manifold base sending the first zeros of ``bx`` and ``by`` to the same point."""
    fx = manifold_base_map(rng, bx, bm, degree)
    fy = manifold_base_map(rng, by, bm, degree)
    a, b = fx.f(bx.zeros[0]), fy.f(by.zeros[0])
    shift = PolyMap(by.n, [Poly.const(by.n, u - v) for u, v in zip(a, b)])
    return fx, BaseMap(by, bm, fy.f + shift, fy.fhat)


def compose_gen(g: GenMorphism, h: GenMorphism, order: str = "grevlex") -> GenMorphism:
    """``g ∘ h`` with exact parts composed and moves combined by the star product."""
    from .charts import compose_morphisms, horizontal_star
    m = compose_strict(g.morphism, h.morphism, order=order)
    exact, moves = {}, {}
    for i in h.source.atlas.charts:
        p = h.morphism.tau[i]
        exact[i] = compose_morphisms(g.exact[p], h.exact[i])
        moves[i] = horizontal_star(g.moves[p], h.moves[i])
    return GenMorphism(m, h.source, g.target, compose_base_maps(g.base_map, h.base_map), exact, moves)


@dataclass
class FiberInstance:
    x: GenAtlas
    y: GenAtlas
    m: GenAtlas
    h: GenMorphism
    g: GenMorphism


def random_fiber_instance(rng: random.Random, max_vars: int = 2, charts: tuple = (1, 2)) -> FiberInstance:
    """X over a random base, Y and M manifold atlases over a common base, h over a
    random manifold map and g over the identity, with every zero of X landing on
    a zero of Y."""
    n, m = random_dims(rng, max_vars)
    bx = random_base(rng, n, m)
    nm = rng.randint(1, max_vars)
    f = random_polymap(rng, n, nm, 1)
    bm = Base(PolyMap(nm, []), tuple(sorted({f(z) for z in bx.zeros})))
    fx = BaseMap(bx, bm, f, PolyMatrix.zeros(n, 0, m))
    gx = random_atlas(rng, bx, ncharts=rng.randint(*charts), name="X")
    gy = random_atlas(rng, bm, ncharts=rng.randint(*charts), name="Y")
    gm = random_atlas(rng, bm, ncharts=rng.randint(*charts), name="M")
    h = random_strict(rng, gx, gm, fx, name="h")
    g = random_strict(rng, gy, gm, identity_base_map(bm), name="g")
    return FiberInstance(gx, gy, gm, h, g)


def random_cone(rng: random.Random, inst: FiberInstance, ncharts: int = 2, name: str = "W"):
    """Another square over the same cospan: legs ``W -> X``, ``W -> Y`` and a 2-cell
    between their composites into M."""
    w = random_atlas(rng, inst.x.base, ncharts=ncharts, name=name)
    k1 = random_strict(rng, w, inst.x, identity_base_map(inst.x.base), name="k1")
    k2 = random_strict(rng, w, inst.y, inst.h.base_map, name="k2")
    a = compose_gen(inst.h, k1)
    b = compose_gen(inst.g, k2)
    chi = random_two_morphism(rng, a, b, name="chi")
    return w, k1, k2, chi
