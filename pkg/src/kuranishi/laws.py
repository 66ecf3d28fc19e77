"""Seeded randomized law suites.

Every case draws its data from ``random.Random(f"{suite}:{seed}:{case}")`` and
records one report item per law, so reports are reproducible case by case and
independent of evaluation order.
"""
from __future__ import annotations

import random
import time
from contextlib import contextmanager, nullcontext
from typing import Callable, Iterator

from . import charts as _charts
from .charts import (Homotopy, check_homotopy, compose_morphisms, homotopies_equal, negate,
                     vertical_add, zero_homotopy, identity_morphism)
from .fiber import (check_fiber_product, check_2fiber_identity, comparison_2morphism_lambda, fiber_product,
                    induced_morphism_u, lambda_identities, theta_restricts_to_chi)
from .generators import (bump, compose_base_maps, exact_transition, identity_base_map, manifold_base_map,
                         model_chart, random_atlas, random_base, random_chart_model, random_cone, random_dims,
                         random_fiber_instance, random_perturbation, random_polymap, random_roof,
                         random_roof_homotopy, random_strict, random_two_morphism)
from .localization import (Refinement, canonical_pullback, check_roof_homotopy, compose_roofs,
                           horizontal_compose_roof, identity_refinement, relabeling_isomorphism, roof_apply,
                           roof_homotopies_equivalent, vertical_compose_roof)
from .morphisms import (check_2morphism, check_strict_morphism, compose_strict, horizontal_compose,
                        invert_2morphism, is_identity_class, strict_equal, two_morphisms_equal, vertical_compose,
                        whisker_left)
from .poly import PolyMap
from .report import FAIL, PASS, CheckItem, VerificationReport

SUITES = ("star", "pre2cat", "kur", "fiber", "taylor", "manifold")


def case_rng(suite: str, seed: int, case: int) -> random.Random:
    return random.Random(f"{suite}:{seed}:{case}")


# test-only mutation of the star product

def _doubled_star(hbc: Homotopy, hab: Homotopy) -> Homotopy:
    """The star product with its second term doubled; breaks associativity."""
    f0, f1, g0 = hab.f0, hab.f1, hbc.f0
    lam = hbc.lam.substitute(f1.f) @ f1.fhat
    lam = lam + (g0.f.divided_difference().substitute(f1.f.concat(f0.f)) @ hab.lam).scale(2)
    return Homotopy(lam, compose_morphisms(g0, f0), compose_morphisms(hbc.f1, f1))


@contextmanager
def mutated_star() -> Iterator[None]:
    """Swap in a wrong star product everywhere it is looked up."""
    saved = _charts.horizontal_star
    _charts.horizontal_star = _doubled_star
    try:
        yield
    finally:
        _charts.horizontal_star = saved


def _star(hbc: Homotopy, hab: Homotopy) -> Homotopy:
    return _charts.horizontal_star(hbc, hab)


# star suite: homotopies between chart morphisms

def _chart_chain(rng: random.Random, max_vars: int, max_degree: int, length: int = 4):
    n, m = random_dims(rng, max_vars)
    # the chart twist can add one degree to the base section
    base = random_base(rng, n, m, max_degree=max(1, min(max_degree, 3) - 1))
    models = [random_chart_model(rng, base) for _ in range(length)]
    cs = [model_chart(base, md, footprint="U") for md in models]
    exact = [exact_transition(base, models[k], models[k + 1], cs[k], cs[k + 1]) for k in range(length - 1)]
    return cs, exact


def _homotopy_chain(rng: random.Random, g, steps: int, max_degree: int) -> list[Homotopy]:
    """``steps`` composable homotopies f0 ≅ f1 ≅ ... obtained by bumping ``g``.

    Perturbations are kept small enough that every bumped map has degree at
    most ``max_degree``.
    """
    degree = max(0, max_degree - max(g.source.s.degree(), 1))
    moves = []
    for _ in range(steps + 1):
        lam = random_perturbation(rng, g.source, g.target, degree) if g.source.m else None
        moves.append(bump(g, lam)[1] if lam is not None else zero_homotopy(g))
    return [vertical_add(negate(moves[k]), moves[k + 1]) for k in range(steps)]


def star_case(rng: random.Random, max_degree: int, max_vars: int, order: str) -> list:
    cs, exact = _chart_chain(rng, max_vars, max_degree)
    ab, bc, cd = (_homotopy_chain(rng, g, 2, max_degree) for g in exact)
    out = []
    left = _star(cd[0], _star(bc[0], ab[0]))
    right = _star(_star(cd[0], bc[0]), ab[0])
    out.append(("star.associativity", homotopies_equal(left, right, order)))
    v1 = _star(vertical_add(bc[0], bc[1], order), vertical_add(ab[0], ab[1], order))
    v2 = vertical_add(_star(bc[0], ab[0]), _star(bc[1], ab[1]), order)
    out.append(("star.interchange", homotopies_equal(v1, v2, order)))
    unit = _star(zero_homotopy(identity_morphism(cs[1])), ab[0])
    out.append(("star.unit", homotopies_equal(unit, ab[0], order)))
    out.append(("star.well-defined", check_homotopy(_star(bc[0], ab[0]), order)))
    h = ab[0]
    out.append(("homotopy.reflexive", check_homotopy(zero_homotopy(h.f0), order)))
    out.append(("homotopy.symmetric", check_homotopy(negate(h), order)))
    out.append(("homotopy.transitive", check_homotopy(vertical_add(ab[0], ab[1], order), order)))
    return out


# pre-Kur suite: strict morphisms and 2-morphisms

def pre2cat_case(rng: random.Random, max_degree: int, max_vars: int, order: str) -> list:
    n, m = random_dims(rng, max_vars)
    # composites of three strict morphisms cube the transition degrees, so keep the base linear
    base = random_base(rng, n, m, max_degree=1)
    idb = identity_base_map(base)
    x, y, z, w = (random_atlas(rng, base, rng.randint(2, 3), name=nm) for nm in "XYZW")
    hs = [random_strict(rng, x, y, idb, name=f"h{k}") for k in range(3)]
    gs = [random_strict(rng, y, z, idb, name=f"g{k}") for k in range(2)]
    k0 = random_strict(rng, z, w, idb, name="k0")
    k1 = random_strict(rng, z, w, idb, name="k1")
    us = [random_two_morphism(rng, hs[k], hs[k + 1], name=f"u{k}") for k in range(2)]
    gam = random_two_morphism(rng, gs[0], gs[1], name="gam")
    kap = random_two_morphism(rng, k0, k1, name="kap")
    hs3 = random_strict(rng, x, y, idb, name="h3")
    u2 = random_two_morphism(rng, hs[2], hs3, name="u2")
    out = []
    a = compose_strict(k0.morphism, compose_strict(gs[0].morphism, hs[0].morphism, order=order), order=order)
    b = compose_strict(compose_strict(k0.morphism, gs[0].morphism, order=order), hs[0].morphism, order=order)
    out.append(("pre.composition-associativity", strict_equal(a, b, order)))
    out.append(("pre.composite-valid", check_strict_morphism(a, order).passed))
    v1 = vertical_compose(u2, vertical_compose(us[1], us[0], order=order), order=order)
    v2 = vertical_compose(vertical_compose(u2, us[1], order=order), us[0], order=order)
    out.append(("pre.vertical-associativity", two_morphisms_equal(v1, v2, order)))
    h1 = horizontal_compose(kap, horizontal_compose(gam, us[0], order=order), order=order)
    h2 = horizontal_compose(horizontal_compose(kap, gam, order=order), us[0], order=order)
    out.append(("pre.horizontal-associativity", two_morphisms_equal(h1, h2, order)))
    gam1 = random_two_morphism(rng, gs[1], random_strict(rng, y, z, idb, name="g2"), name="gam1")
    c1 = horizontal_compose(vertical_compose(gam1, gam, order=order), vertical_compose(us[1], us[0], order=order),
                            order=order)
    c2 = vertical_compose(horizontal_compose(gam1, us[1], order=order), horizontal_compose(gam, us[0], order=order),
                          order=order)
    out.append(("pre.interchange", two_morphisms_equal(c1, c2, order)))
    out.append(("pre.composite-2-valid", check_2morphism(c1, order).passed))
    inv = invert_2morphism(us[0], order=order)
    out.append(("pre.inverse", is_identity_class(vertical_compose(inv, us[0], order=order), order)))
    return out


# Kur suite: roofs and roof homotopies

def kur_instance(rng: random.Random, max_vars: int = 2) -> dict:
    """Roofs X -> Y -> Z -> V with one roof family split along a hyperplane.

    Canonical pull-backs multiply chart counts through every nested
    composite, so all four atlases have one chart and only the first roof of
    one family is split.
    """
    n = min(2, max_vars)
    base = random_base(rng, n, 1 if n == 2 else rng.randint(0, 1))
    which = rng.randrange(3)
    split = [0.5 if k == which else 0.0 for k in range(3)]
    gx, gy, gz, gv = (random_atlas(rng, base, ncharts=1, name=nm) for nm in "XYZV")
    idb = identity_base_map(base)

    def family(ga, gb, names, sp, count):
        roofs = [random_roof(rng, ga, gb, idb, split=sp if k == 0 else 0.0, name=nm)
                 for k, nm in enumerate(names[:count])]
        cells = [random_roof_homotopy(rng, roofs[k], roofs[k + 1], name=f"{names[-1]}{k}")
                 for k in range(count - 1)]
        return roofs, cells

    rx, cx = family(gx, gy, "ABCDc", split[0], 4)
    ry, cy = family(gy, gz, "STUl", split[1], 3)
    rz, cz = family(gz, gv, "PQn", split[2], 2)
    return {"roofs": (rx, ry, rz), "cells": (cx, cy, cz), "which": which}


def _assoc_relabel(k):
    return (k[0], k[1][0]), k[1][1]


def kur_case(rng: random.Random, max_degree: int, max_vars: int, order: str) -> list:
    inst = kur_instance(rng, max_vars)
    (rx, ry, rz), (cx, cy, cz) = inst["roofs"], inst["cells"]
    chi, lam, nu = cx[0], cy[0], cz[0]
    out = []
    a = horizontal_compose_roof(nu, horizontal_compose_roof(lam, chi, order), order)
    b = horizontal_compose_roof(horizontal_compose_roof(nu, lam, order), chi, order)
    out.append(("kur.horizontal-associativity",
                roof_homotopies_equivalent(a, b, order, left_relabel=_assoc_relabel, right_relabel=_assoc_relabel)))
    v1 = vertical_compose_roof(cx[2], vertical_compose_roof(cx[1], cx[0], order), order)
    v2 = vertical_compose_roof(vertical_compose_roof(cx[2], cx[1], order), cx[0], order)
    out.append(("kur.vertical-associativity", roof_homotopies_equivalent(v1, v2, order)))
    ly, lx = vertical_compose_roof(cy[1], cy[0], order), vertical_compose_roof(cx[1], cx[0], order)
    i1 = horizontal_compose_roof(ly, lx, order)
    top, bottom = horizontal_compose_roof(cy[1], cx[1], order), horizontal_compose_roof(cy[0], cx[0], order)
    i2 = vertical_compose_roof(top, bottom, order)
    out.append(("kur.interchange", roof_homotopies_equivalent(i1, i2, order)))
    out.append(("kur.composite-valid", check_roof_homotopy(horizontal_compose_roof(lam, chi, order), order).passed))
    out.extend(refine_laws(rx[0], rx[1], ry[0], rz[0]))
    return out


def refine_laws(r1, r2, s1, t1) -> list:
    """Unit, associativity and symmetry of canonical pull-backs as relabelings."""
    out = []
    h = r1.roof.h
    pb = canonical_pullback(h, identity_refinement(h.target))
    ok = relabeling_isomorphism(pb.apex, h.source, lambda k: k[0]) is not None
    ok = ok and all(pb.h.locals[k].same_data(h.locals[k[0]]) for k in pb.apex.charts)
    out.append(("refine.unit", ok))
    ra, rb = r1.roof.r, r2.roof.r
    ab, ba = canonical_pullback(ra, rb), canonical_pullback(rb, ra)
    out.append(("refine.symmetry", relabeling_isomorphism(ab.apex, ba.apex, lambda k: (k[1], k[0])) is not None))
    t, k = s1.roof.r, s1.roof.h
    t2 = t1.roof.r
    first = canonical_pullback(h, t)
    left = canonical_pullback(compose_strict(k, first.h), t2)
    inner = canonical_pullback(k, t2)
    right = canonical_pullback(h, Refinement.of(compose_strict(t, inner.r)))
    out.append(("refine.associativity",
                relabeling_isomorphism(left.apex, right.apex, lambda q: (q[0][0], (q[0][1], q[1]))) is not None))
    return out


# fiber-product suite

def fiber_case(rng: random.Random, max_degree: int, max_vars: int, order: str) -> list:
    inst = random_fiber_instance(rng, max_vars)
    x, y = inst.x.atlas, inst.y.atlas
    fp = fiber_product(x, inst.h.morphism, y, inst.g.morphism)
    rep = check_fiber_product(fp, order)
    out = [("fiber.product-valid", rep.passed),
           ("fiber.vdim", fp.z.vdim == x.vdim + y.vdim - inst.m.atlas.vdim)]
    if not fp.z.charts:
        return out
    w, k1, k2, chi = random_cone(rng, inst)
    u = induced_morphism_u(w.atlas, k1.morphism, k2.morphism, chi, fp)
    out.append(("fiber.u-valid", check_strict_morphism(u, order).passed))
    out.append(("fiber.theta-u-chi", theta_restricts_to_chi(fp, u, chi, order)))
    out.append(("fiber.2-fiber-identity", check_2fiber_identity(chi, fp, u, order=order)))
    idb = identity_base_map(inst.x.base)
    k1b = random_strict(rng, w, inst.x, idb, name="k1b")
    k2b = random_strict(rng, w, inst.y, inst.h.base_map, name="k2b")
    eta1 = random_two_morphism(rng, k1, k1b, name="eta1")
    eta2 = random_two_morphism(rng, k2, k2b, name="eta2")
    chib = vertical_compose(whisker_left(inst.g.morphism, eta2, order),
                            vertical_compose(chi, whisker_left(inst.h.morphism, invert_2morphism(eta1, order=order),
                                                               order), order=order), order=order)
    ub = induced_morphism_u(w.atlas, k1b.morphism, k2b.morphism, chib, fp, name="u'")
    eta2p = invert_2morphism(eta2, order=order)
    lam = comparison_2morphism_lambda(eta1, eta2p, fp, u, ub)
    out.append(("fiber.lambda-valid", check_2morphism(lam, order).passed))
    ids = lambda_identities(lam, eta1, eta2p, fp, order)
    out.append(("fiber.lambda-identities", all(ids.values())))
    return out


# divided differences

def taylor_case(rng: random.Random, max_degree: int, max_vars: int, order: str) -> list:
    n = rng.randint(1, max_vars)
    k = rng.randint(1, max_vars)
    h1 = random_polymap(rng, n, k, max_degree)
    h2 = random_polymap(rng, k, rng.randint(1, max_vars), max_degree)
    return taylor_laws(h1, h2)


def taylor_laws(h1: PolyMap, h2: PolyMap) -> list:
    n = h1.domain_dim
    xs = PolyMap.identity(2 * n).components
    px, py = PolyMap(2 * n, xs[:n]), PolyMap(2 * n, xs[n:])
    diff = (px - py).as_column()
    dd1 = h1.divided_difference()
    lhs = h1.compose(px) - h1.compose(py)
    out = [("taylor.difference", (dd1 @ diff).column(0) == lhs)]
    diag = PolyMap(n, list(PolyMap.identity(n).components) * 2)
    out.append(("taylor.diagonal", dd1.substitute(diag) == h1.jacobian()))
    dd2 = h2.divided_difference().substitute(h1.compose(px).concat(h1.compose(py)))
    chain = dd2 @ dd1 @ diff
    out.append(("taylor.chain", chain == (h2.compose(h1).divided_difference() @ diff)))
    return out


# manifolds as Kuranishi manifolds

def manifold_case(rng: random.Random, max_degree: int, max_vars: int, order: str) -> list:
    bases = [random_base(rng, rng.randint(1, max_vars), 0) for _ in range(3)]
    gx, gy, gz = (random_atlas(rng, b, ncharts=rng.randint(1, 2), name=nm) for b, nm in zip(bases, "XYZ"))
    f = manifold_base_map(rng, bases[0], bases[1], degree=min(max_degree, 2))
    g = manifold_base_map(rng, bases[1], bases[2], degree=min(max_degree, 2))
    rf = random_roof(rng, gx, gy, f, split=0.5, name="F")
    rg = random_roof(rng, gy, gz, g, split=0.5, name="G")
    rf2 = random_roof(rng, gx, gy, f, split=0.5, name="F2")
    cell = random_roof_homotopy(rng, rf, rf2, name="c")
    slots = [d for a in (gx.atlas,) for d in a.cocycles.values()]
    slots += list(rf.roof.h.deltas.values()) + list(cell.cell.upsilons.values())
    out = [("manifold.trivial-slots", all(d.ncols == 0 for d in slots))]
    comp = compose_roofs(rg.roof, rf.roof, order)
    fg = compose_base_maps(g, f)
    ok = True
    for i, c in gx.atlas.charts.items():
        for w in c.witnesses:
            mid_chart, mid = roof_apply(rf.roof, i, w)
            last_chart, via_steps = roof_apply(rg.roof, mid_chart, mid)
            comp_chart, direct = roof_apply(comp, i, w)
            z_model = gz.models[comp_chart]
            expected = z_model.psi(fg.f(gx.models[i].phi(w)))
            ok = ok and comp_chart == last_chart and direct == via_steps == expected
    out.append(("manifold.roof-composition", ok))
    return out


CASES: dict[str, Callable] = {"star": star_case, "pre2cat": pre2cat_case, "kur": kur_case, "fiber": fiber_case,
                              "taylor": taylor_case, "manifold": manifold_case}


def run_suite(suite: str, seed: int = 0, cases: int = 10, max_degree: int = 3, max_vars: int = 2,
              order: str = "grevlex", mutate: bool = False) -> VerificationReport:
    if suite not in CASES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    rep = VerificationReport("laws", f"{suite} seed={seed} cases={cases}")
    start = time.perf_counter()
    body = CASES[suite]
    with mutated_star() if mutate else nullcontext():
        for k in range(cases):
            rng = case_rng(suite, seed, k)
            for law, ok in body(rng, max_degree, max_vars, order):
                rep.add(CheckItem(law, f"case {k}", PASS if ok else FAIL))
    tally: dict = {}
    for item in rep.items:
        t = tally.setdefault(item.check, [0, 0])
        t[0 if item.passed else 1] += 1
    rep.notes.extend(f"{law}: {p}/{p + f} pass" for law, (p, f) in sorted(tally.items()))
    rep.elapsed = time.perf_counter() - start
    return rep
