"""Refinements, canonical pull-backs, roof diagrams and homotopies between roofs.

Overlap records of constructed atlases are keyed by chart tuples when the
input has at most one record per chart tuple, and by (input record, charts)
otherwise.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Hashable, Mapping

from .atlas import Atlas, Overlap2, Overlap3, Overlap4, _retarget, label_str, restrict_chart
from .charts import ChartMorphism
from .domain import Box, Domain
from .errors import EmptyRestrictionError, StructuralError
from .groebner import locus_defects
from .morphisms import (StrictMorphism, TwoMorphism, check_2morphism, check_strict_morphism, compose_strict,
                        horizontal_compose, identity_2morphism, identity_strict, same_atlas, strict_equal,
                        two_morphisms_equal, vertical_compose, whisker_right)
from .poly import PolyMap, PolyMatrix
from .report import FAIL, PASS, CheckItem, VerificationReport, exact_residual_items, locus_item, point_str


class Refinement(StrictMorphism):
    """A strict morphism meant to be an open-inclusion refinement."""

    @classmethod
    def of(cls, m: StrictMorphism) -> Refinement:
        if isinstance(m, Refinement):
            return m
        return cls(m.source, m.target, m.tau, m.locals, m.deltas, m.delta_targets, m.name)

    def fibre(self, i) -> list:
        return [a for a, b in self.tau.items() if b == i]


def _inclusion(source_chart, target_chart) -> ChartMorphism:
    return ChartMorphism(source_chart, target_chart, PolyMap.identity(source_chart.n),
                         PolyMatrix.identity(source_chart.n, source_chart.m))


def _zero_deltas(apex: Atlas, target: Atlas, tau: Mapping) -> dict:
    out = {}
    for pid, o in apex.overlaps2.items():
        c = apex.charts[o.i]
        out[pid] = PolyMatrix.zeros(c.n, target.charts[tau[o.j]].n, c.m)
    return out


def _unique(a: Atlas) -> bool:
    """At most one overlap record per chart tuple at every level."""
    return (len(a.pair_lookup) == len(a.overlaps2) and len(a.triple_lookup) == len(a.overlaps3)
            and len({a.quad_charts(q) for q in a.overlaps4}) == len(a.overlaps4))


def _key(unique: bool, record, charts: tuple):
    return charts if unique else (record,) + charts


def identity_refinement(x: Atlas) -> Refinement:
    return Refinement.of(identity_strict(x, name=f"id[{x.name}]"))


def refine_atlas(x: Atlas, pieces: Mapping, name: str | None = None) -> Refinement:
    """Refinement whose charts restrict the charts of ``x``.

    ``pieces`` maps a chart of ``x`` to a list of ``(label, subdomain)``;
    charts not listed are kept once under their own label. A ``None``
    subdomain keeps the full chart.
    """
    charts, iota = {}, {}
    for i, c in x.charts.items():
        for label, sub in pieces.get(i, [(i, None)]):
            if label in charts:
                raise StructuralError(f"duplicate refined chart label {label_str(label)}")
            charts[label] = c if sub is None else restrict_chart(c, sub)
            iota[label] = i
    fib: dict = {}
    for label, i in iota.items():
        fib.setdefault(i, []).append(label)
    uniq = _unique(x)
    pairs, trans, pmap = {}, {}, {}
    for pid, o in x.overlaps2.items():
        for a in fib[o.i]:
            for b in fib[o.j]:
                k = _key(uniq, pid, (a, b))
                pairs[k] = Overlap2(k, a, b)
                trans[k] = _retarget(x.transitions[pid], charts[a], charts[b])
                pmap[(pid, a, b)] = k
    triples, cocy, tmap = {}, {}, {}
    for tid, t in x.overlaps3.items():
        i, j, l = x.triple_charts(tid)
        for a in fib[i]:
            for b in fib[j]:
                for c in fib[l]:
                    k = _key(uniq, tid, (a, b, c))
                    triples[k] = Overlap3(k, pmap[(t.ij, a, b)], pmap[(t.jk, b, c)], pmap[(t.ik, a, c)])
                    cocy[k] = x.cocycles[tid]
                    tmap[(tid, a, b, c)] = k
    quads = {}
    for qid, q in x.overlaps4.items():
        i, j, l, m = x.quad_charts(qid)
        for a in fib[i]:
            for b in fib[j]:
                for c in fib[l]:
                    for d in fib[m]:
                        k = _key(uniq, qid, (a, b, c, d))
                        quads[k] = Overlap4(k, tmap[(q.ijk, a, b, c)], tmap[(q.ijl, a, b, d)],
                                            tmap[(q.ikl, a, c, d)], tmap[(q.jkl, b, c, d)])
    apex = Atlas(x.vdim, charts, pairs, triples, quads, trans, cocy, name=name or f"{x.name}'")
    locals_ = {a: _inclusion(charts[a], x.charts[i]) for a, i in iota.items()}
    dts = {k: pid for (pid, a, b), k in pmap.items()}
    return Refinement(apex, x, iota, locals_, _zero_deltas(apex, x, iota), dts, name=f"r[{apex.name}]")


def split_chart_pieces(x: Atlas, i, coordinate: int, cut) -> list:
    """Two closed half-space pieces of chart ``i`` meeting at ``x_coordinate = cut``."""
    n = x.charts[i].n
    lo = [(None, None)] * n
    hi = [(None, None)] * n
    lo[coordinate] = (None, cut)
    hi[coordinate] = (cut, None)
    return [((i, "a"), Domain(n, Box(tuple(lo)))), ((i, "b"), Domain(n, Box(tuple(hi))))]


def check_refinement(r: StrictMorphism, order: str = "grevlex") -> VerificationReport:
    rep = VerificationReport("refinement", r.name)
    x, y = r.source, r.target
    image = set(r.tau.values())
    missing = [label_str(i) for i in y.charts if i not in image]
    rep.add(CheckItem("refinement.surjective", f"index map {r.name}", PASS if not missing else FAIL,
                      {} if not missing else {"uncovered": missing}))
    for a, loc in r.locals.items():
        c, t = x.charts[a], y.charts[r.tau[a]]
        subj = f"chart {label_str(a)}"
        if loc.f != PolyMap.identity(c.n):
            rep.add(exact_residual_items("refinement.open-inclusion", subj, loc.f - PolyMap.identity(c.n),
                                         c.witnesses))
        elif loc.fhat != PolyMatrix.identity(c.n, c.m):
            rep.add(exact_residual_items("refinement.open-inclusion", subj,
                                         loc.fhat - PolyMatrix.identity(c.n, c.m), c.witnesses))
        else:
            outside = [w for w in c.witnesses if not t.domain.contains(w)]
            ok = c.same_germ(t) and not outside
            detail = {} if ok else {"germ": "differs" if not c.same_germ(t) else "same"}
            if outside:
                detail["point"] = point_str(outside[0])
            rep.add(CheckItem("refinement.open-inclusion", subj, PASS if ok else FAIL, detail))
    for pid, d in r.deltas.items():
        a = x.pair_charts(pid)[0]
        rep.add(locus_item("refinement.zero-delta", f"overlap {label_str(pid)}",
                           locus_defects(d, x.charts[a].s, x.pair_witnesses(pid), order)))
    for i, c in y.charts.items():
        covered = set()
        for a in r.fibre(i) if isinstance(r, Refinement) else [a for a, b in r.tau.items() if b == i]:
            covered.update(x.charts[a].witnesses)
        lost = [w for w in c.witnesses if w not in covered]
        rep.add(CheckItem("refinement.covering", f"chart {label_str(i)}", PASS if not lost else FAIL,
                          {} if not lost else {"uncovered witnesses": [list(map(str, w)) for w in lost]}))
    rep.extend(check_strict_morphism(r, order).items)
    return rep


# canonical pull-back

@dataclass
class Pullback:
    apex: Atlas
    r: Refinement              # apex -> source of h
    h: StrictMorphism          # apex -> source of t
    warnings: list = field(default_factory=list)


def canonical_pullback(h: StrictMorphism, t: StrictMorphism, name: str | None = None,
                       with_quads: bool = True, with_triples: bool = True,
                       keep_chart: Callable | None = None, keep_pair: Callable | None = None) -> Pullback:
    """Index set {(i, p') : tau(i) = eps(p')}, charts restricted to h_i^-1(U_p').

    ``keep_chart(i, p)`` and ``keep_pair(pid, qid)`` cut the result down to a
    sub-atlas; skipping triples implies skipping quadruples.
    """
    x, yp = h.source, t.source
    if not same_atlas(t.target, h.target):
        raise StructuralError("pull-back needs a refinement of the target of the morphism")
    warnings = []
    charts = {}
    for i, c in x.charts.items():
        for p, cp in yp.charts.items():
            if t.tau[p] != h.tau[i] or (keep_chart is not None and not keep_chart(i, p)):
                continue
            try:
                charts[(i, p)] = restrict_chart(c, cp.domain.pullback(h.locals[i].f))
            except EmptyRestrictionError:
                warnings.append(f"chart ({label_str(i)},{label_str(p)}) has an empty domain")
                continue
            if c.witnesses and not charts[(i, p)].witnesses:
                warnings.append(f"chart ({label_str(i)},{label_str(p)}) has no witness points")
    uniq = _unique(x) and _unique(yp)
    by_charts: dict = {}
    for q, o in yp.overlaps2.items():
        by_charts.setdefault((o.i, o.j), []).append(q)
    pairs, trans, pmap = {}, {}, {}
    for pid, o in x.overlaps2.items():
        for p in yp.charts:
            if (o.i, p) not in charts:
                continue
            for q in yp.charts:
                if (o.j, q) not in charts:
                    continue
                for qid in by_charts.get((p, q), ()):
                    if t.delta_targets[qid] != h.delta_targets[pid]:
                        continue
                    if keep_pair is not None and not keep_pair(pid, qid):
                        continue
                    k = _key(uniq, (pid, qid), ((o.i, p), (o.j, q)))
                    pairs[k] = Overlap2(k, (o.i, p), (o.j, q))
                    trans[k] = _retarget(x.transitions[pid], charts[(o.i, p)], charts[(o.j, q)])
                    pmap[(pid, qid)] = k
    p_by_x: dict = {}
    for (pid, qid), k in pmap.items():
        p_by_x.setdefault(pid, []).append(qid)
    y_by_ij: dict = {}
    for sid, s in yp.overlaps3.items():
        y_by_ij.setdefault(s.ij, []).append(sid)
    triples, cocy, tmap = {}, {}, {}
    for tid, tr in (x.overlaps3.items() if with_triples else ()):
        try:
            htarget = h.target_triple(tid)
        except StructuralError:
            continue
        for qid in p_by_x.get(tr.ij, ()):
            for sid in y_by_ij.get(qid, ()):
                s = yp.overlaps3[sid]
                keys = [(tr.ij, s.ij), (tr.jk, s.jk), (tr.ik, s.ik)]
                if not all(k in pmap for k in keys):
                    continue
                try:
                    if t.target_triple(sid) != htarget:
                        continue
                except StructuralError:
                    continue
                members = [pmap[k] for k in keys]
                k = _key(uniq, (tid, sid), (pairs[members[0]].i, pairs[members[0]].j, pairs[members[1]].j))
                triples[k] = Overlap3(k, *members)
                cocy[k] = x.cocycles[tid]
                tmap[(tid, sid)] = k
    quads = {}
    if with_quads and with_triples:
        t_by_x: dict = {}
        for (tid, sid) in tmap:
            t_by_x.setdefault(tid, []).append(sid)
        y_by_ijk: dict = {}
        for rid, r4 in yp.overlaps4.items():
            y_by_ijk.setdefault(r4.ijk, []).append(rid)
        for qid, q in x.overlaps4.items():
            for sid in t_by_x.get(q.ijk, ()):
                for rid in y_by_ijk.get(sid, ()):
                    r4 = yp.overlaps4[rid]
                    keys = [(q.ijk, r4.ijk), (q.ijl, r4.ijl), (q.ikl, r4.ikl), (q.jkl, r4.jkl)]
                    if not all(k in tmap for k in keys):
                        continue
                    members = [tmap[k] for k in keys]
                    a, b, c = _triple_charts(pairs, triples[members[0]])
                    d = _triple_charts(pairs, triples[members[1]])[2]
                    k = _key(uniq, (qid, rid), (a, b, c, d))
                    quads[k] = Overlap4(k, *members)
    apex = Atlas(x.vdim, charts, pairs, triples, quads, trans, cocy,
                 name=name or f"{x.name}x{yp.name}")
    rtau = {k: k[0] for k in charts}
    r = Refinement(apex, x, rtau, {k: _inclusion(charts[k], x.charts[k[0]]) for k in charts},
                   _zero_deltas(apex, x, rtau), {v: k[0] for k, v in pmap.items()}, name=f"r[{apex.name}]")
    htau = {k: k[1] for k in charts}
    hp = StrictMorphism(apex, yp, htau,
                        {k: _retarget(h.locals[k[0]], charts[k], yp.charts[k[1]]) for k in charts},
                        {v: h.deltas[k[0]] for k, v in pmap.items()},
                        {v: k[1] for k, v in pmap.items()}, name=f"{h.name}'")
    return Pullback(apex, r, hp, warnings)


def _triple_charts(pairs: Mapping, t: Overlap3) -> tuple:
    a, b = pairs[t.ij], pairs[t.jk]
    return a.i, a.j, b.j


def induced_into_pullback(pb: Pullback, left: StrictMorphism, right: StrictMorphism,
                          name: str = "induced") -> Refinement:
    """The map Q -> apex determined by ``left: Q -> X`` and ``right: Q -> Y'``.

    Both legs must have identity local data; the result has identity locals
    and zero homotopies.
    """
    q, apex = left.source, pb.apex
    tau = {}
    for a in q.charts:
        k = (left.tau[a], right.tau[a])
        if k not in apex.charts:
            raise StructuralError(f"{name}: chart {label_str(a)} has no image in the pull-back")
        tau[a] = k
    rev = {}
    for pk, o in apex.overlaps2.items():
        rev[(pb.r.delta_targets[pk], pb.h.delta_targets[pk])] = pk
    dts = {}
    for pid in q.overlaps2:
        key = (left.delta_targets[pid], right.delta_targets[pid])
        if key not in rev:
            raise StructuralError(f"{name}: overlap {label_str(pid)} has no image in the pull-back")
        dts[pid] = rev[key]
    locals_ = {a: _inclusion(q.charts[a], apex.charts[tau[a]]) for a in q.charts}
    return Refinement(q, apex, tau, locals_, _zero_deltas(q, apex, tau), dts, name=name)


def sub_atlas(a: Atlas, keep: Callable[[Hashable], bool], name: str | None = None) -> Atlas:
    """Charts satisfying ``keep`` and every overlap record among them."""
    charts = {k: c for k, c in a.charts.items() if keep(k)}
    pairs = {p: o for p, o in a.overlaps2.items() if o.i in charts and o.j in charts}
    triples = {t: o for t, o in a.overlaps3.items() if all(r in pairs for r in (o.ij, o.jk, o.ik))}
    quads = {q: o for q, o in a.overlaps4.items() if all(r in triples for r in (o.ijk, o.ijl, o.ikl, o.jkl))}
    return Atlas(a.vdim, charts, pairs, triples, quads, {p: a.transitions[p] for p in pairs},
                 {t: a.cocycles[t] for t in triples}, name=name or a.name)


def restrict_source(m: StrictMorphism, sub: Atlas) -> StrictMorphism:
    cls = Refinement if isinstance(m, Refinement) else StrictMorphism
    return cls(sub, m.target, {i: m.tau[i] for i in sub.charts}, {i: m.locals[i] for i in sub.charts},
               {p: m.deltas[p] for p in sub.overlaps2}, {p: m.delta_targets[p] for p in sub.overlaps2}, m.name)


# roofs

@dataclass
class Roof:
    """``h ∘ r^-1``: a refinement ``r: apex -> source`` and ``h: apex -> target``."""

    r: StrictMorphism
    h: StrictMorphism
    name: str = "roof"

    def __post_init__(self):
        self.r = Refinement.of(self.r)
        if not same_atlas(self.r.source, self.h.source):
            raise StructuralError(f"{self.name}: refinement and morphism have different apexes")

    @property
    def apex(self) -> Atlas:
        return self.r.source

    @property
    def source(self) -> Atlas:
        return self.r.target

    @property
    def target(self) -> Atlas:
        return self.h.target


def identity_roof(x: Atlas) -> Roof:
    return Roof(identity_refinement(x), identity_strict(x), name=f"id[{x.name}]")


def check_roof(roof: Roof, order: str = "grevlex") -> VerificationReport:
    rep = VerificationReport("roof", roof.name)
    rep.extend(check_refinement(roof.r, order).items)
    rep.extend(check_strict_morphism(roof.h, order).items)
    return rep


def compose_roofs(second: Roof, first: Roof, order: str = "grevlex") -> Roof:
    """``(g t^-1) ∘ (h r^-1)`` through the canonical pull-back of h along t."""
    if not same_atlas(first.target, second.source):
        raise StructuralError("roofs are not composable")
    return _compose_through(second, first, canonical_pullback(first.h, second.r), order)


def _compose_through(second: Roof, first: Roof, pb: Pullback, order: str) -> Roof:
    r = Refinement.of(compose_strict(first.r, pb.r, order=order))
    h = compose_strict(second.h, pb.h, order=order)
    return Roof(r, h, name=f"{second.name}.{first.name}")


def roof_apply(roof: Roof, chart, point) -> tuple:
    """Image of a source point under the roof, as (target chart, coordinates)."""
    for a in roof.r.fibre(chart):
        if roof.apex.charts[a].domain.contains(point):
            return roof.h.tau[a], roof.h.locals[a].f(point)
    raise StructuralError(f"no apex chart over {label_str(chart)} contains the point")


# homotopies between roofs

@dataclass
class RoofHomotopy:
    """Legs ``common -> apex1``, ``common -> apex2`` and a 2-morphism
    ``h1 ∘ leg1 => h2 ∘ leg2``."""

    left: Roof
    right: Roof
    leg1: StrictMorphism
    leg2: StrictMorphism
    cell: TwoMorphism
    name: str = "chi"

    def __post_init__(self):
        self.leg1, self.leg2 = Refinement.of(self.leg1), Refinement.of(self.leg2)
        if not (same_atlas(self.left.source, self.right.source) and same_atlas(self.left.target, self.right.target)):
            raise StructuralError(f"{self.name}: roofs have different source or target")
        if not same_atlas(self.leg1.source, self.leg2.source):
            raise StructuralError(f"{self.name}: legs start at different atlases")
        if not (same_atlas(self.leg1.target, self.left.apex) and same_atlas(self.leg2.target, self.right.apex)):
            raise StructuralError(f"{self.name}: legs do not land in the roof apexes")

    @property
    def common(self) -> Atlas:
        return self.leg1.source


def identity_roof_homotopy(roof: Roof) -> RoofHomotopy:
    leg = identity_refinement(roof.apex)
    m = compose_strict(roof.h, leg)
    return RoofHomotopy(roof, roof, leg, leg, identity_2morphism(m), name=f"id[{roof.name}]")


def check_roof_homotopy(x: RoofHomotopy, order: str = "grevlex") -> VerificationReport:
    rep = VerificationReport("roof-homotopy", x.name)
    for leg in (x.leg1, x.leg2):
        rep.extend(check_refinement(leg, order).items)
    a = compose_strict(x.left.r, x.leg1, order=order)
    b = compose_strict(x.right.r, x.leg2, order=order)
    ok = strict_equal(a, b, order)
    rep.add(CheckItem("roof.legs-commute", x.name, PASS if ok else FAIL,
                      {} if ok else {"detail": "r1 . leg1 differs from r2 . leg2"}))
    for which, m, expect in (("source", x.cell.source, compose_strict(x.left.h, x.leg1, order=order)),
                             ("target", x.cell.target, compose_strict(x.right.h, x.leg2, order=order))):
        ok = strict_equal(m, expect, order)
        rep.add(CheckItem("roof.cell-endpoint", f"{x.name} {which}", PASS if ok else FAIL,
                          {} if ok else {"detail": f"cell {which} is not the composite through the leg"}))
    rep.extend(check_2morphism(x.cell, order).items)
    return rep


def restrict_roof_homotopy(x: RoofHomotopy, r: StrictMorphism, order: str = "grevlex") -> RoofHomotopy:
    """The restriction ``x ∘1 r`` along a refinement into the common atlas."""
    if not same_atlas(r.target, x.common):
        raise StructuralError("restriction needs a refinement into the common atlas")
    return RoofHomotopy(x.left, x.right, compose_strict(x.leg1, r, order=order),
                        compose_strict(x.leg2, r, order=order), whisker_right(x.cell, r, order=order),
                        name=f"{x.name}|{r.source.name}")


@dataclass
class CommonRefinement:
    apex: Atlas
    to_first: StrictMorphism
    to_second: StrictMorphism
    dropped: list


def common_refinement(x: RoofHomotopy, y: RoofHomotopy, with_triples: bool = False) -> CommonRefinement:
    """Canonical pull-back of the first legs, cut down to where the second legs agree."""
    dropped = []

    def agree(a, b) -> bool:
        ok = x.leg2.tau[a] == y.leg2.tau[b]
        if not ok:
            dropped.append((a, b))
        return ok

    def agree_pair(p, q) -> bool:
        return x.leg2.delta_targets[p] == y.leg2.delta_targets[q]

    pb = canonical_pullback(x.leg1, y.leg1, name=f"{x.common.name}x{y.common.name}", with_quads=False,
                            with_triples=with_triples, keep_chart=agree, keep_pair=agree_pair)
    return CommonRefinement(pb.apex, pb.r, pb.h, dropped)


def roof_homotopies_equivalent(x: RoofHomotopy, y: RoofHomotopy, order: str = "grevlex",
                               left_relabel: Callable | None = None,
                               right_relabel: Callable | None = None) -> bool:
    """Compare restricted cells over the common refinement of the first legs.

    When the roofs of ``y`` agree with those of ``x`` only after renaming apex
    charts, pass the renamings (y-apex label -> x-apex label).
    """
    if left_relabel is not None or right_relabel is not None:
        y = transport_roof_homotopy(y, x.left, x.right, left_relabel, right_relabel, order)
        if y is None:
            return False
    if x.left is not y.left and not _same_roof(x.left, y.left, order):
        return False
    if x.right is not y.right and not _same_roof(x.right, y.right, order):
        return False
    cr = common_refinement(x, y)
    if not cr.apex.charts:
        return False
    u = whisker_right(x.cell, cr.to_first, order=order)
    v = whisker_right(y.cell, cr.to_second, order=order)
    return two_morphisms_equal(u, v, order)


def _same_roof(a: Roof, b: Roof, order: str) -> bool:
    return strict_equal(a.r, b.r, order) and strict_equal(a.h, b.h, order)


def vertical_compose_roof(x23: RoofHomotopy, x12: RoofHomotopy, order: str = "grevlex") -> RoofHomotopy:
    """Both cells restricted to the pull-back of the shared middle legs, then composed."""
    pb = canonical_pullback(x12.leg2, x23.leg1, name=f"{x12.common.name}x{x23.common.name}",
                            with_quads=False)
    a = restrict_roof_homotopy(x12, pb.r, order)
    b = restrict_roof_homotopy(x23, pb.h, order)
    cell = vertical_compose(b.cell, a.cell, order=order)
    return RoofHomotopy(x12.left, x23.right, a.leg1, b.leg2, cell, name=f"({x23.name}o0{x12.name})")


def _lift(u: TwoMorphism, source: StrictMorphism, target: StrictMorphism, t: StrictMorphism) -> TwoMorphism:
    """Read a 2-morphism into Y as one into a refinement ``t: Y' -> Y``."""
    yp = t.source
    refs = {}
    for i in u.source.source.charts:
        p, q = source.tau[i], target.tau[i]
        cands = [k for k, o in yp.overlaps2.items()
                 if o.i == p and o.j == q and t.delta_targets[k] == u.pair_refs[i]]
        if not cands:
            raise StructuralError(f"no overlap of {yp.name} over {label_str(u.pair_refs[i])}")
        refs[i] = cands[0]
    return TwoMorphism(source, target, u.upsilons, refs, name=f"{u.name}'")


def horizontal_compose_roof(lam: RoofHomotopy, chi: RoofHomotopy, order: str = "grevlex") -> RoofHomotopy:
    """``lam ∘1 (chi restricted to X''')`` over the pull-back lattice."""
    if not same_atlas(chi.left.target, lam.left.source):
        raise StructuralError("roof homotopies are not horizontally composable")
    r1c, r2c = chi.leg1, chi.leg2
    t1l, t2l = lam.leg1, lam.leg2
    h1, h2 = chi.left.h, chi.right.h
    t_lam = compose_strict(lam.left.r, t1l, order=order)          # Y_lam -> Y
    j = canonical_pullback(h1, t_lam, name="J", with_quads=False)
    k = canonical_pullback(h2, t_lam, name="K", with_quads=False)
    l_ = canonical_pullback(r1c, j.r, name="L", with_quads=False)
    o = canonical_pullback(r2c, k.r, name="O", with_quads=False)
    p = canonical_pullback(l_.r, o.r, name="P", with_quads=False)
    rho = compose_strict(l_.r, p.r, order=order)                   # P -> X_chi
    a = compose_strict(j.h, compose_strict(l_.h, p.r, order=order), order=order)
    b = compose_strict(k.h, compose_strict(o.h, p.h, order=order), order=order)
    restricted = whisker_right(chi.cell, rho, order=order)
    lifted = _lift(restricted, a, b, t_lam)
    cell = horizontal_compose(lam.cell, lifted, order=order)
    m1 = canonical_pullback(h1, lam.left.r, with_quads=False)
    m2 = canonical_pullback(h2, lam.right.r, with_quads=False)
    left = _compose_through(lam.left, chi.left, m1, order)
    right = _compose_through(lam.right, chi.right, m2, order)
    leg1 = induced_into_pullback(m1, compose_strict(r1c, rho, order=order),
                                 compose_strict(t1l, a, order=order), name="leg1")
    leg2 = induced_into_pullback(m2, compose_strict(r2c, rho, order=order),
                                 compose_strict(t2l, b, order=order), name="leg2")
    return RoofHomotopy(left, right, leg1, leg2, cell, name=f"({lam.name}o1{chi.name})")


# relabeling isomorphisms

def relabeling_isomorphism(a: Atlas, b: Atlas, relabel: Callable | None = None) -> dict | None:
    """A chart bijection a -> b preserving chart data, transitions and cocycles.

    Chart data means section, footprint and witness set; domain descriptors
    are metadata and are not compared. With ``relabel`` the candidate
    bijection is given; otherwise charts are matched by their data, which
    must then be unambiguous.
    """
    if len(a.charts) != len(b.charts):
        return None
    if relabel is not None:
        mapping = {i: relabel(i) for i in a.charts}
    else:
        sig = {}
        for j, c in b.charts.items():
            sig.setdefault((c.s, c.footprint, frozenset(c.witnesses)), []).append(j)
        mapping = {}
        for i, c in a.charts.items():
            cands = sig.get((c.s, c.footprint, frozenset(c.witnesses)), [])
            if len(cands) != 1:
                return None
            mapping[i] = cands[0]
    if set(mapping.values()) != set(b.charts):
        return None
    for i, j in mapping.items():
        c, d = a.charts[i], b.charts[j]
        if not (c.s == d.s and c.footprint == d.footprint and set(c.witnesses) == set(d.witnesses)):
            return None
    if len(a.overlaps2) != len(b.overlaps2) or len(a.overlaps3) != len(b.overlaps3):
        return None
    for pid, o in a.overlaps2.items():
        q = b.pair_lookup.get((mapping[o.i], mapping[o.j]))
        if q is None or not a.transitions[pid].same_data(b.transitions[q]):
            return None
    for tid in a.overlaps3:
        i, j, k = a.triple_charts(tid)
        s = b.triple_lookup.get((mapping[i], mapping[j], mapping[k]))
        if s is None or a.cocycles[tid] != b.cocycles[s]:
            return None
    return mapping


def roof_relabeling(a: Roof, b: Roof, relabel: Callable, order: str = "grevlex") -> Refinement | None:
    """The chart renaming ``a.apex -> b.apex`` as a refinement, if it carries roof ``a`` onto ``b``."""
    if not (same_atlas(a.source, b.source) and same_atlas(a.target, b.target)):
        return None
    mapping = relabeling_isomorphism(a.apex, b.apex, relabel)
    if mapping is None:
        return None
    x, y = a.apex, b.apex
    for k, l in mapping.items():
        if a.r.tau[k] != b.r.tau[l] or a.h.tau[k] != b.h.tau[l]:
            return None
        if not a.h.locals[k].same_data(b.h.locals[l]):
            return None
    dts = {}
    for pid in x.overlaps2:
        i, j = x.pair_charts(pid)
        q = y.pair_lookup[(mapping[i], mapping[j])]
        if a.h.delta_targets[pid] != b.h.delta_targets[q] or a.r.delta_targets[pid] != b.r.delta_targets[q]:
            return None
        if a.h.deltas[pid] != b.h.deltas[q]:
            return None
        dts[pid] = q
    locals_ = {k: _inclusion(x.charts[k], y.charts[l]) for k, l in mapping.items()}
    return Refinement(x, y, mapping, locals_, _zero_deltas(x, y, mapping), dts, name=f"relabel[{x.name}]")


def transport_roof_homotopy(y: RoofHomotopy, left: Roof, right: Roof, left_relabel: Callable | None,
                            right_relabel: Callable | None, order: str = "grevlex") -> RoofHomotopy | None:
    """Rewrite ``y`` over roofs that agree with its own up to renaming apex charts."""
    legs = []
    for mine, theirs, relabel, leg in ((y.left, left, left_relabel, y.leg1), (y.right, right, right_relabel, y.leg2)):
        if relabel is None:
            if mine is not theirs and not _same_roof(mine, theirs, order):
                return None
            legs.append(leg)
            continue
        iso = roof_relabeling(mine, theirs, relabel, order)
        if iso is None:
            return None
        legs.append(compose_strict(iso, leg, order=order))
    leg1, leg2 = legs
    src = compose_strict(left.h, leg1, order=order)
    tgt = compose_strict(right.h, leg2, order=order)
    cell = TwoMorphism(src, tgt, y.cell.upsilons, y.cell.pair_refs, name=y.cell.name)
    return RoofHomotopy(left, right, leg1, leg2, cell, name=y.name)
