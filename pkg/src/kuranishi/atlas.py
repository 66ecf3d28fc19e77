"""Kuranishi atlases with explicit overlap records.

Level-2 records name a pair of charts, level-3 records name three level-2
records (ij, jk, ik) and level-4 records name four level-3 records
(ijk, ijl, ikl, jkl). Record ids are arbitrary hashables; the helpers in this
module use the index tuples themselves.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Hashable, Mapping, Sequence

from .charts import (Chart, ChartMorphism, Homotopy, compose_morphisms, homotopy_items, identity_morphism,
                     is_identity, morphism_items)
from .domain import Box, Domain
from .errors import DimensionError, EmptyRestrictionError, PreconditionError, StructuralError
from .groebner import locus_defects
from .poly import PolyMap, PolyMatrix
from .report import FAIL, PASS, CheckItem, VerificationReport, locus_item


@dataclass(frozen=True)
class Overlap2:
    id: Hashable
    i: Hashable
    j: Hashable
    witnesses: tuple | None = None   # points of chart i over the overlap


@dataclass(frozen=True)
class Overlap3:
    id: Hashable
    ij: Hashable
    jk: Hashable
    ik: Hashable
    witnesses: tuple | None = None


@dataclass(frozen=True)
class Overlap4:
    id: Hashable
    ijk: Hashable
    ijl: Hashable
    ikl: Hashable
    jkl: Hashable
    witnesses: tuple | None = None


def label_str(label) -> str:
    if isinstance(label, tuple):
        return "(" + ",".join(label_str(x) for x in label) + ")"
    return str(label)


class Atlas:
    """Charts, overlap records, transitions f_ij and cocycle matrices Λ_ijk."""

    def __init__(self, vdim: int, charts: Mapping, overlaps2: Mapping, overlaps3: Mapping,
                 overlaps4: Mapping, transitions: Mapping, cocycles: Mapping, name: str = "atlas"):
        self.vdim = vdim
        self.charts = dict(charts)
        self.overlaps2 = dict(overlaps2)
        self.overlaps3 = dict(overlaps3)
        self.overlaps4 = dict(overlaps4)
        self.transitions = dict(transitions)
        self.cocycles = dict(cocycles)
        self.name = name
        self._homotopies: dict = {}
        self._validate()
        self.pair_lookup: dict = {}
        for pid, o in self.overlaps2.items():
            self.pair_lookup.setdefault((o.i, o.j), pid)
        self.triple_lookup: dict = {}
        self.triple_by_pairs: dict = {}
        for tid, t in self.overlaps3.items():
            self.triple_lookup.setdefault(self.triple_charts(tid), tid)
            self.triple_by_pairs.setdefault((t.ij, t.jk, t.ik), tid)

    # structure
    def _validate(self) -> None:
        for label, c in self.charts.items():
            if c.vdim != self.vdim:
                raise DimensionError(f"chart {label_str(label)} has vdim {c.vdim}, atlas has {self.vdim}")
        for pid, o in self.overlaps2.items():
            if o.i not in self.charts or o.j not in self.charts:
                raise StructuralError(f"pair overlap {label_str(pid)} references a missing chart")
            if pid not in self.transitions:
                raise StructuralError(f"pair overlap {label_str(pid)} has no transition")
            t = self.transitions[pid]
            if not (t.source.same_germ(self.charts[o.i]) and t.target.same_germ(self.charts[o.j])):
                raise StructuralError(f"transition {label_str(pid)} does not connect its charts")
        for tid, t in self.overlaps3.items():
            for ref in (t.ij, t.jk, t.ik):
                if ref not in self.overlaps2:
                    raise StructuralError(f"triple overlap {label_str(tid)} references missing pair {label_str(ref)}")
            a, b, c = self.overlaps2[t.ij], self.overlaps2[t.jk], self.overlaps2[t.ik]
            if not (a.j == b.i and a.i == c.i and b.j == c.j):
                raise StructuralError(f"triple overlap {label_str(tid)} has incompatible pair members")
            if tid not in self.cocycles:
                raise StructuralError(f"triple overlap {label_str(tid)} has no cocycle")
            i, k = a.i, b.j
            lam = self.cocycles[tid]
            if lam.shape != (self.charts[k].n, self.charts[i].m) or lam.nvars != self.charts[i].n:
                raise DimensionError(f"cocycle {label_str(tid)} has shape {lam.shape}")
        for qid, q in self.overlaps4.items():
            for ref in (q.ijk, q.ijl, q.ikl, q.jkl):
                if ref not in self.overlaps3:
                    raise StructuralError(f"quadruple overlap {label_str(qid)} "
                                          f"references missing triple {label_str(ref)}")
            ijk, ijl, ikl, jkl = (self.overlaps3[r] for r in (q.ijk, q.ijl, q.ikl, q.jkl))
            if not (ijk.ij == ijl.ij and ijk.ik == ikl.ij and ijk.jk == jkl.ij and ijl.jk == jkl.ik
                    and ijl.ik == ikl.ik and ikl.jk == jkl.jk):
                raise StructuralError(f"quadruple overlap {label_str(qid)} has incompatible triple members")
        for pid in self.transitions:
            if pid not in self.overlaps2:
                raise StructuralError(f"transition {label_str(pid)} has no overlap record")
        for tid in self.cocycles:
            if tid not in self.overlaps3:
                raise StructuralError(f"cocycle {label_str(tid)} has no overlap record")

    def pair_charts(self, pid) -> tuple:
        o = self.overlaps2[pid]
        return o.i, o.j

    def triple_charts(self, tid) -> tuple:
        t = self.overlaps3[tid]
        a, b = self.overlaps2[t.ij], self.overlaps2[t.jk]
        return a.i, a.j, b.j

    def quad_charts(self, qid) -> tuple:
        q = self.overlaps4[qid]
        i, j, k = self.triple_charts(q.ijk)
        return i, j, k, self.triple_charts(q.ijl)[2]

    def pair_id(self, i, j):
        try:
            return self.pair_lookup[(i, j)]
        except KeyError:
            raise StructuralError(f"{self.name}: no overlap record for charts "
                                  f"({label_str(i)}, {label_str(j)})") from None

    def triple_id(self, i, j, k):
        try:
            return self.triple_lookup[(i, j, k)]
        except KeyError:
            raise StructuralError(
                f"{self.name}: no triple overlap for charts ({label_str(i)}, {label_str(j)}, {label_str(k)})") from None

    def triple_for_pairs(self, ij, jk, ik):
        tid = self.triple_by_pairs.get((ij, jk, ik))
        if tid is None:
            i, j = self.pair_charts(ij)
            return self.triple_id(i, j, self.pair_charts(jk)[1])
        return tid

    def transition(self, i, j) -> ChartMorphism:
        return self.transitions[self.pair_id(i, j)]

    def cocycle(self, i, j, k) -> PolyMatrix:
        return self.cocycles[self.triple_id(i, j, k)]

    def cocycle_homotopy(self, tid) -> Homotopy:
        """Λ_ijk as a homotopy from f_ik to f_jk ∘ f_ij."""
        h = self._homotopies.get(tid)
        if h is None:
            t = self.overlaps3[tid]
            fij, fjk, fik = self.transitions[t.ij], self.transitions[t.jk], self.transitions[t.ik]
            h = Homotopy(self.cocycles[tid], fik, compose_morphisms(fjk, fij))
            self._homotopies[tid] = h
        return h

    def pair_witnesses(self, pid) -> tuple:
        o = self.overlaps2[pid]
        if o.witnesses is not None:
            return o.witnesses
        f = self.transitions[pid]
        target = self.charts[o.j]
        return tuple(w for w in self.charts[o.i].witnesses if target.domain.contains(f.f(w)))

    def triple_witnesses(self, tid) -> tuple:
        t = self.overlaps3[tid]
        if t.witnesses is not None:
            return t.witnesses
        good = set(self.pair_witnesses(t.ij)) & set(self.pair_witnesses(t.ik))
        return tuple(w for w in self.pair_witnesses(t.ij) if w in good)

    def quad_witnesses(self, qid) -> tuple:
        q = self.overlaps4[qid]
        if q.witnesses is not None:
            return q.witnesses
        good = set(self.triple_witnesses(q.ijk)) & set(self.triple_witnesses(q.ijl))
        return tuple(w for w in self.triple_witnesses(q.ijk) if w in good)

    def __repr__(self) -> str:
        return (f"Atlas({self.name!r}, vdim={self.vdim}, charts={len(self.charts)}, pairs={len(self.overlaps2)}, "
                f"triples={len(self.overlaps3)}, quads={len(self.overlaps4)})")


def build_atlas(vdim: int, charts: Mapping, transitions: Mapping, cocycles: Mapping | None = None,
                name: str = "atlas", quads: bool = True) -> Atlas:
    """Atlas with one overlap record per index tuple.

    ``transitions`` maps (i, j) to ChartMorphism; identities are added for
    missing (i, i). Triples (and quadruples) are created for every index
    tuple whose pairs all exist. Missing cocycles must be zero-shaped
    (only possible when m_i = 0), otherwise a StructuralError is raised.
    """
    trans = dict(transitions)
    for i, c in charts.items():
        trans.setdefault((i, i), identity_morphism(c))
    cocycles = dict(cocycles or {})
    pairs = {p: Overlap2(p, p[0], p[1]) for p in trans}
    triples = {}
    cocy = {}
    labels = list(charts)
    for i, j, k in product(labels, repeat=3):
        if (i, j) in pairs and (j, k) in pairs and (i, k) in pairs:
            triples[(i, j, k)] = Overlap3((i, j, k), (i, j), (j, k), (i, k))
            if (i, j, k) in cocycles:
                cocy[(i, j, k)] = cocycles[(i, j, k)]
            elif charts[i].m == 0 or (i == j or j == k):
                cocy[(i, j, k)] = PolyMatrix.zeros(charts[i].n, charts[k].n, charts[i].m)
            else:
                raise StructuralError(f"missing cocycle for {label_str((i, j, k))}")
    fours = {}
    if quads:
        for i, j, k, l in product(labels, repeat=4):
            keys = ((i, j, k), (i, j, l), (i, k, l), (j, k, l))
            if all(t in triples for t in keys):
                fours[(i, j, k, l)] = Overlap4((i, j, k, l), *keys)
    return Atlas(vdim, charts, pairs, triples, fours, trans, cocy, name=name)


def check_atlas(a: Atlas, order: str = "grevlex") -> VerificationReport:
    rep = VerificationReport("atlas", a.name)
    for label, c in a.charts.items():
        ok = c.n - c.m == a.vdim
        rep.add(CheckItem("atlas.dimension", f"chart {label_str(label)}", PASS if ok else FAIL,
                          {} if ok else {"n": c.n, "m": c.m, "vdim": a.vdim}))
    for pid, o in a.overlaps2.items():
        f = a.transitions[pid]
        subj = f"transition {label_str(pid)}"
        if o.i == o.j:
            ok = is_identity(f)
            rep.add(CheckItem("atlas.identity-transition", subj, PASS if ok else FAIL,
                              {} if ok else {"f": str(f.f), "fhat": str(f.fhat)}))
        rep.extend(morphism_items(f, subj))
    for tid in a.overlaps3:
        i, j, k = a.triple_charts(tid)
        subj = f"cocycle {label_str(tid)}"
        h = a.cocycle_homotopy(tid)
        rep.extend(homotopy_items(h, subj, a.triple_witnesses(tid), order))
        if i == j or j == k:
            defects = locus_defects(a.cocycles[tid], a.charts[i].s, a.triple_witnesses(tid), order)
            rep.add(locus_item("atlas.degenerate-cocycle", subj, defects))
    for qid in a.overlaps4:
        rep.add(locus_item("atlas.cocycle-equation", f"quadruple {label_str(qid)}",
                           locus_defects(cocycle_residual(a, qid), a.charts[a.quad_charts(qid)[0]].s,
                                         a.quad_witnesses(qid), order)))
    return rep


def cocycle_residual(a: Atlas, qid) -> PolyMatrix:
    """Λ_ikl − Λ_jkl(f_ij)·f̂_ij − Λ_ijl + df_kl(f_ik)·Λ_ijk."""
    q = a.overlaps4[qid]
    t_ijk, t_ikl = a.overlaps3[q.ijk], a.overlaps3[q.ikl]
    f_ij = a.transitions[t_ijk.ij]
    f_ik = a.transitions[t_ijk.ik]
    f_kl = a.transitions[t_ikl.jk]
    lam_ikl, lam_jkl, lam_ijl, lam_ijk = (a.cocycles[r] for r in (q.ikl, q.jkl, q.ijl, q.ijk))
    return (lam_ikl - lam_jkl.substitute(f_ij.f) @ f_ij.fhat - lam_ijl
            + f_kl.f.jacobian().substitute(f_ik.f) @ lam_ijk)


# restriction

def _as_domain(chart: Chart, sub) -> Domain:
    if isinstance(sub, Domain):
        return sub
    if isinstance(sub, Box):
        return Domain(chart.n, sub)
    return Domain(chart.n, Box(tuple(sub)))


def restrict_chart(c: Chart, subdomain) -> Chart:
    """Same polynomial data on the intersection of domains; witnesses filtered."""
    dom = c.domain.intersect(_as_domain(c, subdomain))
    if dom.is_empty():
        raise EmptyRestrictionError("restriction to an empty domain")
    if dom == c.domain:
        return c
    return Chart(c.s, c.footprint, dom, tuple(w for w in c.witnesses if dom.contains(w)))


def _retarget(f: ChartMorphism, source: Chart, target: Chart) -> ChartMorphism:
    if f.source is source and f.target is target:
        return f
    return ChartMorphism(source, target, f.f, f.fhat)


def restrict_atlas(a: Atlas, subdomains: Mapping, name: str | None = None) -> Atlas:
    """Restrict the charts named in ``subdomains``; others are kept."""
    charts = {k: (restrict_chart(c, subdomains[k]) if k in subdomains else c) for k, c in a.charts.items()}
    trans = {}
    pairs = {}
    for pid, o in a.overlaps2.items():
        trans[pid] = _retarget(a.transitions[pid], charts[o.i], charts[o.j])
        if o.witnesses is not None:
            f = a.transitions[pid].f
            kept = tuple(w for w in o.witnesses
                         if charts[o.i].domain.contains(w) and charts[o.j].domain.contains(f(w)))
            pairs[pid] = Overlap2(pid, o.i, o.j, kept)
        else:
            pairs[pid] = o
    return Atlas(a.vdim, charts, pairs, a.overlaps3, a.overlaps4, trans, a.cocycles,
                 name=name or f"{a.name}|restricted")


def manifold_to_atlas(charts: Mapping, transitions: Mapping, name: str = "manifold") -> Atlas:
    """Ordinary manifold atlas: every chart has m = 0 and every Λ is empty.

    ``transitions`` maps (i, j) to a PolyMap or ChartMorphism.
    """
    charts = dict(charts)
    dims = set()
    for label, c in charts.items():
        if c.m != 0:
            raise PreconditionError(f"chart {label_str(label)} has obstruction rank {c.m}, expected 0")
        dims.add(c.n)
    if len(dims) > 1:
        raise DimensionError("manifold charts of different dimensions")
    trans = {}
    for (i, j), f in transitions.items():
        if isinstance(f, PolyMap):
            f = ChartMorphism(charts[i], charts[j], f, PolyMatrix.zeros(charts[i].n, 0, 0))
        trans[(i, j)] = f
    vdim = dims.pop() if dims else 0
    return build_atlas(vdim, charts, trans, name=name)


def line_chart(n: int = 1, witnesses: Sequence | None = None, footprint: str = "M") -> Chart:
    """Chart ``R^n`` with no obstruction bundle (witness: the origin by default)."""
    if witnesses is None:
        witnesses = ((0,) * n,)
    return Chart(PolyMap(n, []), footprint, None, tuple(witnesses))
