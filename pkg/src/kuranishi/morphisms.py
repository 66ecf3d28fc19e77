"""Strict morphisms between atlases and 2-morphisms between strict morphisms.

Every composite is assembled from chart-level homotopies with
:func:`vertical_add` and the star products, so endpoint bookkeeping is
checked as the formulas are evaluated.
"""
from __future__ import annotations

from typing import Mapping

from .atlas import Atlas, label_str
from .charts import (Homotopy, compose_morphisms, homotopy_items, identity_morphism, khom_equal,
                     morphism_items, negate, star_with_morphism, vertical_add)
from .errors import DimensionError, StructuralError
from .groebner import locus_defects
from .poly import PolyMatrix
from .report import FAIL, PASS, CheckItem, VerificationReport, locus_item, point_str


def same_atlas(a: Atlas, b: Atlas) -> bool:
    if a is b:
        return True
    if a.charts.keys() != b.charts.keys() or a.overlaps2.keys() != b.overlaps2.keys():
        return False
    return (all(a.charts[k].same_germ(b.charts[k]) for k in a.charts)
            and all(a.transitions[p].same_data(b.transitions[p]) for p in a.transitions)
            and a.cocycles == b.cocycles)


class StrictMorphism:
    """Index map ``tau``, local chart morphisms ``h_i`` and overlap homotopies Δ_ij.

    Δ_ij (``n_tau(j) x m_i``) is a homotopy from h_j ∘ f_ij to
    f_tau(i)tau(j) ∘ h_i; ``delta_targets[ij]`` names the target overlap
    record hosting f_tau(i)tau(j).
    """

    def __init__(self, source: Atlas, target: Atlas, tau: Mapping, locals_: Mapping, deltas: Mapping,
                 delta_targets: Mapping | None = None, name: str = "h"):
        self.source = source
        self.target = target
        self.tau = dict(tau)
        self.locals = dict(locals_)
        self.deltas = dict(deltas)
        self.name = name
        for i in source.charts:
            if i not in self.tau:
                raise StructuralError(f"{name}: index map undefined on chart {label_str(i)}")
            if self.tau[i] not in target.charts:
                raise StructuralError(f"{name}: chart {label_str(i)} maps to missing chart {label_str(self.tau[i])}")
            if i not in self.locals:
                raise StructuralError(f"{name}: no local morphism for chart {label_str(i)}")
            h = self.locals[i]
            if not (h.source.same_germ(source.charts[i]) and h.target.same_germ(target.charts[self.tau[i]])):
                raise StructuralError(f"{name}: local morphism {label_str(i)} connects the wrong charts")
        dt = dict(delta_targets or {})
        for pid in source.overlaps2:
            i, j = source.pair_charts(pid)
            if pid not in self.deltas:
                raise StructuralError(f"{name}: no homotopy for overlap {label_str(pid)}")
            if pid not in dt:
                dt[pid] = target.pair_id(self.tau[i], self.tau[j])
            elif dt[pid] not in target.overlaps2 or target.pair_charts(dt[pid]) != (self.tau[i], self.tau[j]):
                raise StructuralError(f"{name}: overlap {label_str(pid)} references a wrong target overlap")
            d = self.deltas[pid]
            ci, cj = source.charts[i], target.charts[self.tau[j]]
            if d.shape != (cj.n, ci.m) or d.nvars != ci.n:
                raise DimensionError(f"{name}: homotopy on {label_str(pid)} has shape {d.shape}")
        self.delta_targets = dt
        self._homotopies: dict = {}

    def delta_homotopy(self, pid) -> Homotopy:
        h = self._homotopies.get(pid)
        if h is None:
            i, j = self.source.pair_charts(pid)
            f = self.source.transitions[pid]
            g = self.target.transitions[self.delta_targets[pid]]
            h = Homotopy(self.deltas[pid], compose_morphisms(self.locals[j], f), compose_morphisms(g, self.locals[i]))
            self._homotopies[pid] = h
        return h

    def target_triple(self, tid):
        t = self.source.overlaps3[tid]
        dt = self.delta_targets
        return self.target.triple_for_pairs(dt[t.ij], dt[t.jk], dt[t.ik])

    def __repr__(self) -> str:
        return f"StrictMorphism({self.name!r}: {self.source.name} -> {self.target.name})"


def identity_strict(x: Atlas, name: str = "id") -> StrictMorphism:
    locals_ = {i: identity_morphism(c) for i, c in x.charts.items()}
    deltas = {pid: PolyMatrix.zeros(x.charts[o.i].n, x.charts[o.j].n, x.charts[o.i].m)
              for pid, o in x.overlaps2.items()}
    return StrictMorphism(x, x, {i: i for i in x.charts}, locals_, deltas, {p: p for p in x.overlaps2}, name)


def compatibility_residual(h: StrictMorphism, tid) -> PolyMatrix:
    """Δ_ik − dh_k(f_ik)·Λ_ijk + Λ'_τ(h_i)·ĥ_i − df'_τjτk(h_j f_ij)·Δ_ij − Δ_jk(f_ij)·f̂_ij."""
    x, y = h.source, h.target
    t = x.overlaps3[tid]
    i, j, k = x.triple_charts(tid)
    f_ij, f_ik = x.transitions[t.ij], x.transitions[t.ik]
    hi, hj, hk = h.locals[i], h.locals[j], h.locals[k]
    lam_y = y.cocycles[h.target_triple(tid)]
    g_jk = y.transitions[h.delta_targets[t.jk]]
    return (h.deltas[t.ik]
            - hk.f.jacobian().substitute(f_ik.f) @ x.cocycles[tid]
            + lam_y.substitute(hi.f) @ hi.fhat
            - g_jk.f.jacobian().substitute(hj.f.compose(f_ij.f)) @ h.deltas[t.ij]
            - h.deltas[t.jk].substitute(f_ij.f) @ f_ij.fhat)


def check_strict_morphism(h: StrictMorphism, order: str = "grevlex") -> VerificationReport:
    rep = VerificationReport("strict", h.name)
    x = h.source
    for i, hi in h.locals.items():
        rep.extend(morphism_items(hi, f"local {h.name}[{label_str(i)}]"))
    for pid in x.overlaps2:
        i, j = x.pair_charts(pid)
        subj = f"delta {h.name}[{label_str(pid)}]"
        rep.extend(homotopy_items(h.delta_homotopy(pid), subj, x.pair_witnesses(pid), order))
        if i == j:
            rep.add(locus_item("strict.delta-diagonal", subj,
                               locus_defects(h.deltas[pid], x.charts[i].s, x.pair_witnesses(pid), order)))
    for tid in x.overlaps3:
        i = x.triple_charts(tid)[0]
        rep.add(locus_item("strict.compatibility", f"triple {label_str(tid)}",
                           locus_defects(compatibility_residual(h, tid), x.charts[i].s,
                                         x.triple_witnesses(tid), order)))
    return rep


def _chain(*homotopies: Homotopy, order: str = "grevlex") -> Homotopy:
    out = homotopies[0]
    for h in homotopies[1:]:
        out = vertical_add(out, h, order)
    return out


def compose_strict(g: StrictMorphism, h: StrictMorphism, name: str | None = None,
                   order: str = "grevlex") -> StrictMorphism:
    """``g ∘ h`` with Δ_ij = g_τ(j) * Δ^h_ij  followed by  Δ^g_τ(i)τ(j) * h_i."""
    if not same_atlas(h.target, g.source):
        raise StructuralError("cannot compose: target of h is not the source of g")
    tau = {i: g.tau[h.tau[i]] for i in h.source.charts}
    locals_ = {i: compose_morphisms(g.locals[h.tau[i]], h.locals[i]) for i in h.source.charts}
    deltas, dts = {}, {}
    for pid in h.source.overlaps2:
        i, j = h.source.pair_charts(pid)
        q = h.delta_targets[pid]
        total = _chain(star_with_morphism(g.locals[h.tau[j]], h.delta_homotopy(pid)),
                       star_with_morphism(g.delta_homotopy(q), h.locals[i]), order=order)
        deltas[pid] = total.lam
        dts[pid] = g.delta_targets[q]
    return StrictMorphism(h.source, g.target, tau, locals_, deltas, dts, name or f"{g.name}.{h.name}")


def strict_equal(a: StrictMorphism, b: StrictMorphism, order: str = "grevlex") -> bool:
    """Same index map and local data; overlap homotopies equal on the zero locus."""
    if not (same_atlas(a.source, b.source) and same_atlas(a.target, b.target)):
        return False
    if a.tau != b.tau or a.delta_targets != b.delta_targets:
        return False
    if any(not a.locals[i].same_data(b.locals[i]) for i in a.locals):
        return False
    x = a.source
    return all(khom_equal(a.deltas[p], b.deltas[p], x.charts[x.pair_charts(p)[0]], order, x.pair_witnesses(p))
               for p in x.overlaps2)


class TwoMorphism:
    """Family Υ_i (``n_tau2(i) x m_i``): homotopies h2_i ≅ f_tau1(i)tau2(i) ∘ h1_i."""

    def __init__(self, source: StrictMorphism, target: StrictMorphism, upsilons: Mapping,
                 pair_refs: Mapping | None = None, name: str = "u"):
        if not (same_atlas(source.source, target.source) and same_atlas(source.target, target.target)):
            raise StructuralError(f"{name}: 2-morphism between morphisms with different atlases")
        self.source = source
        self.target = target
        self.upsilons = dict(upsilons)
        self.name = name
        y = source.target
        refs = dict(pair_refs or {})
        for i, c in source.source.charts.items():
            if i not in self.upsilons:
                raise StructuralError(f"{name}: no homotopy for chart {label_str(i)}")
            p1, p2 = source.tau[i], target.tau[i]
            if i not in refs:
                refs[i] = y.pair_id(p1, p2)
            elif y.pair_charts(refs[i]) != (p1, p2):
                raise StructuralError(f"{name}: chart {label_str(i)} references a wrong target overlap")
            u = self.upsilons[i]
            if u.shape != (y.charts[p2].n, c.m) or u.nvars != c.n:
                raise DimensionError(f"{name}: homotopy on chart {label_str(i)} has shape {u.shape}")
        self.pair_refs = refs
        self._homotopies: dict = {}

    @property
    def atlases(self) -> tuple[Atlas, Atlas]:
        return self.source.source, self.source.target

    def upsilon_homotopy(self, i) -> Homotopy:
        h = self._homotopies.get(i)
        if h is None:
            f = self.source.target.transitions[self.pair_refs[i]]
            h = Homotopy(self.upsilons[i], self.target.locals[i], compose_morphisms(f, self.source.locals[i]))
            self._homotopies[i] = h
        return h

    def __repr__(self) -> str:
        return f"TwoMorphism({self.name!r}: {self.source.name} => {self.target.name})"


def identity_2morphism(h: StrictMorphism, name: str | None = None) -> TwoMorphism:
    y = h.target
    ups = {i: PolyMatrix.zeros(c.n, y.charts[h.tau[i]].n, c.m) for i, c in h.source.charts.items()}
    return TwoMorphism(h, h, ups, name=name or f"id[{h.name}]")


def equiv_residual(u: TwoMorphism, pid) -> PolyMatrix:
    """Δ²_ij + df_τ2iτ2j(h²_i)·Υ_i − Υ_j(f_ij)·f̂_ij − df_τ1jτ2j(h¹_j f_ij)·Δ¹_ij
    − [Λ_τ1i τ2i τ2j − Λ_τ1i τ1j τ2j](h¹_i)·ĥ¹_i."""
    h1, h2 = u.source, u.target
    x, y = h1.source, h1.target
    i, j = x.pair_charts(pid)
    f_ij = x.transitions[pid]
    a_i, a_j = h1.locals[i], h1.locals[j]
    b_i = h2.locals[i]
    g22 = y.transitions[h2.delta_targets[pid]]
    g12j = y.transitions[u.pair_refs[j]]
    t1i, t2j = h1.tau[i], h2.tau[j]
    ik = y.pair_id(t1i, t2j)
    lam_a = y.cocycles[y.triple_for_pairs(u.pair_refs[i], h2.delta_targets[pid], ik)]
    lam_b = y.cocycles[y.triple_for_pairs(h1.delta_targets[pid], u.pair_refs[j], ik)]
    return (h2.deltas[pid]
            + g22.f.jacobian().substitute(b_i.f) @ u.upsilons[i]
            - u.upsilons[j].substitute(f_ij.f) @ f_ij.fhat
            - g12j.f.jacobian().substitute(a_j.f.compose(f_ij.f)) @ h1.deltas[pid]
            - (lam_a - lam_b).substitute(a_i.f) @ a_i.fhat)


def check_2morphism(u: TwoMorphism, order: str = "grevlex") -> VerificationReport:
    rep = VerificationReport("2morphism", u.name)
    x, y = u.atlases
    for i, c in x.charts.items():
        subj = f"chart {u.name}[{label_str(i)}]"
        rep.extend(homotopy_items(u.upsilon_homotopy(i), subj, c.witnesses, order))
        f = y.transitions[u.pair_refs[i]]
        bad = next((w for w in c.witnesses
                    if f.f(u.source.locals[i].f(w)) != u.target.locals[i].f(w)), None)
        rep.add(CheckItem("two.underlying-map", subj, PASS if bad is None else FAIL,
                          {} if bad is None else {"point": point_str(bad)}))
    for pid in x.overlaps2:
        i = x.pair_charts(pid)[0]
        rep.add(locus_item("two.compatibility", f"overlap {label_str(pid)}",
                           locus_defects(equiv_residual(u, pid), x.charts[i].s, x.pair_witnesses(pid), order)))
    return rep


def _same_morphism(a: StrictMorphism, b: StrictMorphism) -> bool:
    return a is b or strict_equal(a, b)


def vertical_compose(u23: TwoMorphism, u12: TwoMorphism, name: str | None = None,
                     order: str = "grevlex") -> TwoMorphism:
    """Υ_i = Υ²³_i, then f_τ2τ3 * Υ¹²_i, then the reverse of Λ_τ1τ2τ3 * h¹_i."""
    if not _same_morphism(u12.target, u23.source):
        raise StructuralError("vertical composition: middle morphisms differ")
    y = u12.source.target
    h1 = u12.source
    ups, refs = {}, {}
    for i in h1.source.charts:
        p1, p3 = h1.tau[i], u23.target.tau[i]
        ik = y.pair_id(p1, p3)
        tid = y.triple_for_pairs(u12.pair_refs[i], u23.pair_refs[i], ik)
        f23 = y.transitions[u23.pair_refs[i]]
        total = _chain(u23.upsilon_homotopy(i),
                       star_with_morphism(f23, u12.upsilon_homotopy(i)),
                       negate(star_with_morphism(y.cocycle_homotopy(tid), h1.locals[i])), order=order)
        ups[i] = total.lam
        refs[i] = y.overlaps3[tid].ik
    return TwoMorphism(h1, u23.target, ups, refs, name or f"({u23.name}o0{u12.name})")


def horizontal_compose(gamma: TwoMorphism, upsilon: TwoMorphism, name: str | None = None,
                       order: str = "grevlex") -> TwoMorphism:
    """2-morphism g¹h¹ => g²h² from Γ: g¹ => g² and Υ: h¹ => h²."""
    h1, h2 = upsilon.source, upsilon.target
    g1, g2 = gamma.source, gamma.target
    if not same_atlas(h1.target, g1.source):
        raise StructuralError("horizontal composition: atlases are not composable")
    z = g1.target
    gh1 = compose_strict(g1, h1, order=order)
    gh2 = compose_strict(g2, h2, order=order)
    ups, refs = {}, {}
    for i in h1.source.charts:
        t1, t2 = h1.tau[i], h2.tau[i]
        q = upsilon.pair_refs[i]
        r_mid = g2.delta_targets[q]                   # (σ2τ1, σ2τ2)
        f_mid = z.transitions[r_mid]
        ik = z.pair_id(g1.tau[t1], g2.tau[t2])
        tid = z.triple_for_pairs(gamma.pair_refs[t1], r_mid, ik)
        total = _chain(
            star_with_morphism(g2.locals[t2], upsilon.upsilon_homotopy(i)),
            star_with_morphism(g2.delta_homotopy(q), h1.locals[i]),
            star_with_morphism(f_mid, star_with_morphism(gamma.upsilon_homotopy(t1), h1.locals[i])),
            negate(star_with_morphism(star_with_morphism(z.cocycle_homotopy(tid), g1.locals[t1]), h1.locals[i])),
            order=order)
        ups[i] = total.lam
        refs[i] = z.overlaps3[tid].ik
    return TwoMorphism(gh1, gh2, ups, refs, name or f"({gamma.name}o1{upsilon.name})")


def invert_2morphism(u: TwoMorphism, name: str | None = None, order: str = "grevlex") -> TwoMorphism:
    """Υ²¹_i = Λ_τ1τ2τ1 * h¹_i, then the reverse of f_τ2τ1 * Υ¹²_i."""
    h1, h2 = u.source, u.target
    y = h1.target
    ups, refs = {}, {}
    for i in h1.source.charts:
        p1, p2 = h1.tau[i], h2.tau[i]
        back = y.pair_id(p2, p1)
        tid = y.triple_for_pairs(u.pair_refs[i], back, y.pair_id(p1, p1))
        total = _chain(star_with_morphism(y.cocycle_homotopy(tid), h1.locals[i]),
                       negate(star_with_morphism(y.transitions[back], u.upsilon_homotopy(i))), order=order)
        ups[i] = total.lam
        refs[i] = back
    return TwoMorphism(h2, h1, ups, refs, name or f"{u.name}^-1")


def whisker_left(g: StrictMorphism, u: TwoMorphism, order: str = "grevlex") -> TwoMorphism:
    """g ∘₁ u."""
    return horizontal_compose(identity_2morphism(g), u, name=f"({g.name}o1{u.name})", order=order)


def whisker_right(u: TwoMorphism, h: StrictMorphism, order: str = "grevlex") -> TwoMorphism:
    """u ∘₁ h."""
    return horizontal_compose(u, identity_2morphism(h), name=f"({u.name}o1{h.name})", order=order)


def two_morphisms_equal(a: TwoMorphism, b: TwoMorphism, order: str = "grevlex") -> bool:
    """Componentwise equality of the Υ families on the zero loci."""
    x = a.source.source
    if a.pair_refs != b.pair_refs:
        return False
    for i, c in x.charts.items():
        if not (a.source.locals[i].same_data(b.source.locals[i]) and a.target.locals[i].same_data(b.target.locals[i])):
            return False
        if not khom_equal(a.upsilons[i], b.upsilons[i], c, order):
            return False
    return True


def is_identity_class(u: TwoMorphism, order: str = "grevlex") -> bool:
    """Υ vanishes on the zero loci and the index maps agree."""
    x = u.source.source
    return (u.source.tau == u.target.tau
            and all(khom_equal(u.upsilons[i], PolyMatrix.zeros(c.n, *u.upsilons[i].shape), c, order)
                    for i, c in x.charts.items()))
