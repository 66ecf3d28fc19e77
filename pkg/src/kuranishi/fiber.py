"""Fiber products of Kuranishi atlases over an ordinary manifold.

Given strict morphisms ``h: X -> M`` and ``g: Y -> M`` into an atlas with
no obstruction bundles, the product has one chart per pair (i, p) whose
footprints meet over M.  The section on V_i x V_p is
``(s_i(x), s_p(y), g_p(y) - f h_i(x))``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .atlas import Atlas, Overlap2, Overlap3, Overlap4, label_str
from .charts import Chart, ChartMorphism, _along, identity_morphism, is_identity, khom_equal
from .errors import PreconditionError, StructuralError
from .morphisms import (StrictMorphism, TwoMorphism, check_2morphism, check_strict_morphism, compose_strict,
                        identity_2morphism, invert_2morphism, is_identity_class, same_atlas, vertical_compose,
                        whisker_left, whisker_right)
from .atlas import check_atlas
from .poly import PolyMap, PolyMatrix
from .report import FAIL, PASS, CheckItem, VerificationReport


@dataclass
class FiberProductResult:
    z: Atlas
    pi1: StrictMorphism
    pi2: StrictMorphism
    theta: TwoMorphism
    h: StrictMorphism
    g: StrictMorphism
    index_map: dict                     # chart of z -> (chart of X, chart of Y)
    warnings: list = field(default_factory=list)

    @property
    def base(self) -> Atlas:
        return self.h.target


def _lift(n: int, offset: int, width: int, m):
    """Embed a map or matrix in ``width`` variables into ``n`` variables at ``offset``."""
    return m.embed(n, tuple(range(offset, offset + width)))


def _projection(n: int, offset: int, width: int) -> PolyMap:
    return _lift(n, offset, width, PolyMap.identity(width))


def _pair_sections(x: Atlas, y: Atlas, h: StrictMorphism, g: StrictMorphism, m: Atlas, i, p):
    """Pieces of the chart over (i, p): the product section and the M-transition used."""
    ci, cp = x.charts[i], y.charts[p]
    n = ci.n + cp.n
    mpid = m.pair_id(h.tau[i], g.tau[p])
    f = m.transitions[mpid].f
    px, py = _projection(n, 0, ci.n), _projection(n, ci.n, cp.n)
    third = g.locals[p].f.compose(py) - f.compose(h.locals[i].f.compose(px))
    s = PolyMap(n, ci.s.compose(px).components + cp.s.compose(py).components + third.components)
    return s, mpid


def _witness_pairs(x: Atlas, y: Atlas, h: StrictMorphism, g: StrictMorphism, m: Atlas, i, p,
                   pairs: Sequence | None) -> list:
    f = m.transitions[m.pair_id(h.tau[i], g.tau[p])].f
    cands = pairs if pairs is not None else [(a, b) for a in x.charts[i].witnesses for b in y.charts[p].witnesses]
    out = []
    for a, b in cands:
        if a in x.charts[i].witnesses and b in y.charts[p].witnesses:
            if f(h.locals[i].f(a)) == g.locals[p].f(b):
                out.append(tuple(a) + tuple(b))
    return out


def fiber_product(x: Atlas, h: StrictMorphism, y: Atlas, g: StrictMorphism,
                  witness_pairs: Mapping | None = None, name: str = "Z",
                  with_quads: bool = True) -> FiberProductResult:
    """The product atlas, both projections and the 2-cell between the composites.

    ``witness_pairs`` may map (i, p) to a list of (x-witness, y-witness) pairs;
    otherwise all pairs of chart witnesses with equal images in M are used.
    Membership of (i, p) in the index set is decided by those pairs.
    """
    m = h.target
    if not (same_atlas(h.source, x) and same_atlas(g.source, y)):
        raise StructuralError("morphisms do not start at the given atlases")
    if not same_atlas(g.target, m):
        raise StructuralError("the two morphisms land in different atlases")
    for label, c in m.charts.items():
        if c.m != 0:
            raise PreconditionError(f"base chart {label_str(label)} has obstruction rank {c.m}; "
                                    "fiber products are taken over manifolds")
    charts, index, warnings = {}, {}, []
    for i, ci in x.charts.items():
        for p, cp in y.charts.items():
            s, mpid = _pair_sections(x, y, h, g, m, i, p)
            pts = _witness_pairs(x, y, h, g, m, i, p, None if witness_pairs is None else witness_pairs.get((i, p), []))
            if not pts:
                continue
            mt, mq = m.charts[h.tau[i]], m.charts[g.tau[p]]
            dom_x = ci.domain.intersect(mt.domain.pullback(h.locals[i].f))
            dom_x = dom_x.intersect(mq.domain.pullback(m.transitions[mpid].f.compose(h.locals[i].f)))
            dom_y = cp.domain.intersect(mq.domain.pullback(g.locals[p].f))
            dom = dom_x.product(dom_y)
            pts = [w for w in pts if dom.contains(w)]
            if not pts:
                warnings.append(f"chart ({label_str(i)},{label_str(p)}) has witness pairs outside its domain")
                continue
            charts[(i, p)] = Chart(s, f"{ci.footprint}x{cp.footprint}", dom, tuple(pts))
            index[(i, p)] = (i, p)
    uniq = (len(x.pair_lookup) == len(x.overlaps2) and len(y.pair_lookup) == len(y.overlaps2)
            and len(x.triple_lookup) == len(x.overlaps3) and len(y.triple_lookup) == len(y.overlaps3))

    def key(rx, ry, labels):
        return labels if uniq else ((rx, ry),) + labels

    pairs, trans, pmap = {}, {}, {}
    for pa, oa in x.overlaps2.items():
        for pb, ob in y.overlaps2.items():
            d1, d2 = (oa.i, ob.i), (oa.j, ob.j)
            if d1 not in charts or d2 not in charts:
                continue
            k = key(pa, pb, (d1, d2))
            pairs[k] = Overlap2(k, d1, d2)
            if d1 == d2 and is_identity(x.transitions[pa]) and is_identity(y.transitions[pb]):
                # Δ_ii is zero only as a class; keep diagonal transitions exactly the identity
                trans[k] = identity_morphism(charts[d1])
            else:
                trans[k] = _product_transition(x, y, h, g, m, pa, pb, charts[d1], charts[d2])
            pmap[(pa, pb)] = k
    triples, cocy, tmap = {}, {}, {}
    for ta, t1 in x.overlaps3.items():
        for tb, t2 in y.overlaps3.items():
            keys = [(t1.ij, t2.ij), (t1.jk, t2.jk), (t1.ik, t2.ik)]
            if not all(q in pmap for q in keys):
                continue
            members = [pmap[q] for q in keys]
            d1, d2 = pairs[members[0]].i, pairs[members[0]].j
            d3 = pairs[members[1]].j
            k = key(ta, tb, (d1, d2, d3))
            triples[k] = Overlap3(k, *members)
            cocy[k] = _product_cocycle(x, y, charts[d1], ta, tb)
            tmap[(ta, tb)] = k
    quads = {}
    if with_quads:
        for qa, q1 in x.overlaps4.items():
            for qb, q2 in y.overlaps4.items():
                keys = [(q1.ijk, q2.ijk), (q1.ijl, q2.ijl), (q1.ikl, q2.ikl), (q1.jkl, q2.jkl)]
                if not all(q in tmap for q in keys):
                    continue
                labels = tuple(zip(x.quad_charts(qa), y.quad_charts(qb)))
                k = key(qa, qb, labels)
                quads[k] = Overlap4(k, *[tmap[q] for q in keys])
    z = Atlas(x.vdim + y.vdim - _base_dim(m), charts, pairs, triples, quads, trans, cocy, name=name)
    pi1, pi2 = _projections(z, x, y, pmap)
    theta = _theta(z, pi1, pi2, h, g)
    return FiberProductResult(z, pi1, pi2, theta, h, g, index, warnings)


def _base_dim(m: Atlas) -> int:
    return m.vdim


def _product_transition(x, y, h, g, m, pa, pb, c1: Chart, c2: Chart) -> ChartMorphism:
    i1, i2 = x.pair_charts(pa)
    p1, p2 = y.pair_charts(pb)
    fx, fy = x.transitions[pa], y.transitions[pb]
    nx1, ny1 = x.charts[i1].n, y.charts[p1].n
    n = nx1 + ny1
    px, py = _projection(n, 0, nx1), _projection(n, nx1, ny1)
    f = PolyMap(n, fx.f.compose(px).components + fy.f.compose(py).components)
    mx1, my1 = x.charts[i1].m, y.charts[p1].m
    mx2, my2 = x.charts[i2].m, y.charts[p2].m
    nb = m.charts[g.tau[p2]].n
    n_b1 = m.charts[g.tau[p1]].n
    # δf_τ(i2)η(p2) at (f_τ1τ2 h_i1(x), h_i2 f_i1i2(x)) applied to Δ_i1i2
    f_t2e2 = m.transitions[m.pair_id(h.tau[i2], g.tau[p2])]
    f_t1t2 = m.transitions[h.delta_targets[pa]]
    hx1, hx2 = h.locals[i1], h.locals[i2]
    a = _along(f_t2e2.f.divided_difference(), f_t1t2.f.compose(hx1.f), hx2.f.compose(fx.f)) @ h.deltas[pa]
    # δf_η(p1)η(p2) at (g_p1(y), f_τ(i1)η(p1) h_i1(x)), in both variable groups
    f_e1e2 = m.transitions[g.delta_targets[pb]]
    f_t1e1 = m.transitions[m.pair_id(h.tau[i1], g.tau[p1])]
    gy1 = g.locals[p1].f.compose(py)
    fhx = f_t1e1.f.compose(hx1.f.compose(px))
    c = _along(f_e1e2.f.divided_difference(), gy1, fhx)
    fhat = PolyMatrix.block(n, [
        [fx.fhat.substitute(px), PolyMatrix.zeros(n, mx2, my1), PolyMatrix.zeros(n, mx2, n_b1)],
        [PolyMatrix.zeros(n, my2, mx1), fy.fhat.substitute(py), PolyMatrix.zeros(n, my2, n_b1)],
        [a.substitute(px), -g.deltas[pb].substitute(py), c],
    ])
    if fhat.shape != (mx2 + my2 + nb, mx1 + my1 + n_b1):
        raise StructuralError("product transition has an inconsistent block layout")
    return ChartMorphism(c1, c2, f, fhat)


def _product_cocycle(x: Atlas, y: Atlas, c1: Chart, ta, tb) -> PolyMatrix:
    i1, _, i3 = x.triple_charts(ta)
    p1, _, p3 = y.triple_charts(tb)
    nx1, ny1 = x.charts[i1].n, y.charts[p1].n
    n = nx1 + ny1
    px, py = _projection(n, 0, nx1), _projection(n, nx1, ny1)
    lx, ly = x.cocycles[ta], y.cocycles[tb]
    mx1, my1 = x.charts[i1].m, y.charts[p1].m
    nb = c1.m - mx1 - my1
    nx3, ny3 = x.charts[i3].n, y.charts[p3].n
    return PolyMatrix.block(n, [
        [lx.substitute(px), PolyMatrix.zeros(n, nx3, my1), PolyMatrix.zeros(n, nx3, nb)],
        [PolyMatrix.zeros(n, ny3, mx1), ly.substitute(py), PolyMatrix.zeros(n, ny3, nb)],
    ])


def _projections(z: Atlas, x: Atlas, y: Atlas, pmap: Mapping) -> tuple[StrictMorphism, StrictMorphism]:
    loc1, loc2 = {}, {}
    for d, c in z.charts.items():
        i, p = d
        nx, ny = x.charts[i].n, y.charts[p].n
        mx, my = x.charts[i].m, y.charts[p].m
        rest = c.m - mx - my
        n = nx + ny
        loc1[d] = ChartMorphism(c, x.charts[i], _projection(n, 0, nx), PolyMatrix.block(n, [
            [PolyMatrix.identity(n, mx), PolyMatrix.zeros(n, mx, my), PolyMatrix.zeros(n, mx, rest)]]))
        loc2[d] = ChartMorphism(c, y.charts[p], _projection(n, nx, ny), PolyMatrix.block(n, [
            [PolyMatrix.zeros(n, my, mx), PolyMatrix.identity(n, my), PolyMatrix.zeros(n, my, rest)]]))
    d1, d2, t1, t2 = {}, {}, {}, {}
    for (pa, pb), k in pmap.items():
        a, b = z.pair_charts(k)
        c = z.charts[a]
        d1[k] = PolyMatrix.zeros(c.n, x.charts[b[0]].n, c.m)
        d2[k] = PolyMatrix.zeros(c.n, y.charts[b[1]].n, c.m)
        t1[k], t2[k] = pa, pb
    tau1 = {d: d[0] for d in z.charts}
    tau2 = {d: d[1] for d in z.charts}
    return (StrictMorphism(z, x, tau1, loc1, d1, t1, name="pi1"),
            StrictMorphism(z, y, tau2, loc2, d2, t2, name="pi2"))


def _theta(z: Atlas, pi1: StrictMorphism, pi2: StrictMorphism, h: StrictMorphism, g: StrictMorphism) -> TwoMorphism:
    m = h.target
    a = compose_strict(h, pi1, name="h.pi1")
    b = compose_strict(g, pi2, name="g.pi2")
    ups, refs = {}, {}
    for d, c in z.charts.items():
        nb = m.charts[b.tau[d]].n
        lead = c.m - nb
        ups[d] = PolyMatrix.block(c.n, [[PolyMatrix.zeros(c.n, nb, lead), -PolyMatrix.identity(c.n, nb)]])
        refs[d] = m.pair_id(a.tau[d], b.tau[d])
    return TwoMorphism(a, b, ups, refs, name="theta")


def check_fiber_product(fp: FiberProductResult, order: str = "grevlex") -> VerificationReport:
    """Atlas axioms of the product, the projections, θ and dimension additivity."""
    rep = VerificationReport("fiber", fp.z.name)
    rep.extend(check_atlas(fp.z, order).items)
    rep.extend(check_strict_morphism(fp.pi1, order).items)
    rep.extend(check_strict_morphism(fp.pi2, order).items)
    for pi in (fp.pi1, fp.pi2):
        nz = [label_str(p) for p, d in pi.deltas.items() if not d.is_zero()]
        rep.add(CheckItem("fiber.trivial-delta", pi.name, PASS if not nz else FAIL,
                          {} if not nz else {"overlaps": nz}))
    rep.extend(check_2morphism(fp.theta, order).items)
    expect = fp.h.source.vdim + fp.g.source.vdim - fp.base.vdim
    ok = fp.z.vdim == expect and all(c.vdim == expect for c in fp.z.charts.values())
    rep.add(CheckItem("fiber.vdim", fp.z.name, PASS if ok else FAIL,
                      {} if ok else {"expected": expect, "actual": fp.z.vdim}))
    for w in fp.warnings:
        rep.notes.append(w)
    return rep


# universal property

def induced_morphism_u(wprime: Atlas, k1p: StrictMorphism, k2p: StrictMorphism, chi: TwoMorphism,
                       fp: FiberProductResult, name: str = "u") -> StrictMorphism:
    """The morphism into the product determined by two legs and a 2-cell between their composites.

    ``chi`` goes from ``h ∘ k1p`` to ``g ∘ k2p``; its chart homotopies become
    the negated last block of the bundle maps.
    """
    z = fp.z
    if not (same_atlas(k1p.source, wprime) and same_atlas(k2p.source, wprime)):
        raise StructuralError("legs must start at the given atlas")
    if not (same_atlas(chi.source.source, wprime) and chi.source.tau != {} and
            all(chi.source.tau[a] == fp.h.tau[k1p.tau[a]] and chi.target.tau[a] == fp.g.tau[k2p.tau[a]]
                for a in wprime.charts)):
        raise StructuralError("2-cell does not connect the composites of the legs")
    tau, locals_ = {}, {}
    for a, c in wprime.charts.items():
        d = (k1p.tau[a], k2p.tau[a])
        if d not in z.charts:
            raise StructuralError(f"{name}: chart {label_str(a)} maps to {label_str(d)}, which is not a product chart")
        if chi.pair_refs[a] != fp.base.pair_id(fp.h.tau[d[0]], fp.g.tau[d[1]]):
            raise StructuralError(f"{name}: 2-cell on chart {label_str(a)} uses another base overlap record")
        tau[a] = d
        k1, k2 = k1p.locals[a], k2p.locals[a]
        f = k1.f.concat(k2.f)
        fhat = PolyMatrix.block(c.n, [[k1.fhat], [k2.fhat], [-chi.upsilons[a]]])
        locals_[a] = ChartMorphism(c, z.charts[d], f, fhat)
    deltas, dts = {}, {}
    rev = {(fp.pi1.delta_targets[k], fp.pi2.delta_targets[k]): k for k in z.overlaps2}
    for pid in wprime.overlaps2:
        key = (k1p.delta_targets[pid], k2p.delta_targets[pid])
        if key not in rev:
            raise StructuralError(f"{name}: overlap {label_str(pid)} has no product overlap record")
        dts[pid] = rev[key]
        deltas[pid] = PolyMatrix.block(wprime.charts[wprime.pair_charts(pid)[0]].n,
                                       [[k1p.deltas[pid]], [k2p.deltas[pid]]])
    return StrictMorphism(wprime, z, tau, locals_, deltas, dts, name=name)


def theta_restricts_to_chi(fp: FiberProductResult, u: StrictMorphism, chi: TwoMorphism,
                           order: str = "grevlex") -> bool:
    """θ ∘₁ u = χ, chart by chart on the zero loci."""
    lhs = whisker_right(fp.theta, u, order=order)
    if lhs.pair_refs != chi.pair_refs:
        return False
    x = u.source
    return all(khom_equal(lhs.upsilons[a], chi.upsilons[a], c, order) for a, c in x.charts.items())


def comparison_2morphism_lambda(eta1p: TwoMorphism, eta2p: TwoMorphism, fp: FiberProductResult,
                                u: StrictMorphism, uprime: StrictMorphism, name: str = "lambda",
                                order: str = "grevlex") -> TwoMorphism:
    """λ: u => u' with blocks (η'₁, inverse of η'₂).

    ``eta1p`` goes from ``π1 ∘ u`` to ``π1 ∘ u'`` and ``eta2p`` from
    ``π2 ∘ u'`` to ``π2 ∘ u``.  Inverting η'₂ with the cocycle of Y makes
    ``η'₂ ∘₀ (π2 ∘₁ λ)`` an identity class exactly, where the bare negation
    -η'₂ agrees only up to cocycle terms.
    """
    z = fp.z
    inv = invert_2morphism(eta2p, order=order)
    ups, refs = {}, {}
    for a, c in u.source.charts.items():
        d, dp = u.tau[a], uprime.tau[a]
        k = z.pair_lookup.get((d, dp))
        if k is None:
            raise StructuralError(f"{name}: no product overlap between {label_str(d)} and {label_str(dp)}")
        if fp.pi1.delta_targets[k] != eta1p.pair_refs[a] or fp.pi2.delta_targets[k] != inv.pair_refs[a]:
            raise StructuralError(f"{name}: 2-cells on chart {label_str(a)} use other overlap records")
        ups[a] = PolyMatrix.block(c.n, [[eta1p.upsilons[a]], [inv.upsilons[a]]])
        refs[a] = k
    return TwoMorphism(u, uprime, ups, refs, name=name)


def lambda_identities(lam: TwoMorphism, eta1p: TwoMorphism, eta2p: TwoMorphism, fp: FiberProductResult,
                      order: str = "grevlex") -> dict:
    """Both universal-property identities for λ, and that its top block is η'₁."""
    first = whisker_left(fp.pi1, lam, order=order)
    second = vertical_compose(eta2p, whisker_left(fp.pi2, lam, order=order), order=order)
    blocks = True
    for a, c in lam.source.source.charts.items():
        n1 = eta1p.upsilons[a].nrows
        top = PolyMatrix(c.n, lam.upsilons[a].rows[:n1], lam.upsilons[a].ncols)
        if not khom_equal(top, eta1p.upsilons[a], c, order):
            blocks = False
    return {
        "eta1 = pi1 o1 lambda": _cells_equal(first, eta1p, order),
        "eta2 o0 (pi2 o1 lambda) = id": is_identity_class(second, order),
        "lambda blocks determined": blocks,
    }


def _cells_equal(a: TwoMorphism, b: TwoMorphism, order: str) -> bool:
    if a.pair_refs != b.pair_refs:
        return False
    x = a.source.source
    return all(khom_equal(a.upsilons[i], b.upsilons[i], c, order) for i, c in x.charts.items())


def check_2fiber_identity(chi: TwoMorphism, fp: FiberProductResult, u: StrictMorphism,
                          eta1: TwoMorphism | None = None, eta2: TwoMorphism | None = None,
                          order: str = "grevlex") -> bool:
    """χ = (g ∘₁ η₂) ∘₀ (θ ∘₁ u) ∘₀ (h ∘₁ η₁), compared on the zero loci.

    Missing η's are identity cells (the strictly commuting case), where η₁
    runs from the first leg to π1 ∘ u and η₂ from π2 ∘ u to the second leg.
    """
    k1 = compose_strict(fp.pi1, u, order=order)
    k2 = compose_strict(fp.pi2, u, order=order)
    eta1 = eta1 if eta1 is not None else identity_2morphism(k1)
    eta2 = eta2 if eta2 is not None else identity_2morphism(k2)
    a = whisker_left(fp.h, eta1, order=order)
    b = whisker_right(fp.theta, u, order=order)
    c = whisker_left(fp.g, eta2, order=order)
    total = vertical_compose(c, vertical_compose(b, a, order=order), order=order)
    return _cells_equal(total, chi, order)
