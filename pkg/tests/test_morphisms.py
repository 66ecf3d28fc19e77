import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kuranishi.atlas import check_atlas
from kuranishi.charts import khom_equal
from kuranishi.errors import StructuralError
from kuranishi.generators import identity_base_map, random_atlas, random_base, random_strict, random_two_morphism
from kuranishi.morphisms import (StrictMorphism, TwoMorphism, check_2morphism, check_strict_morphism, compose_strict,
                                 horizontal_compose, identity_2morphism, identity_strict, invert_2morphism,
                                 is_identity_class, strict_equal, two_morphisms_equal, vertical_compose,
                                 whisker_left)
from kuranishi.poly import PolyMatrix

seeds = st.integers(0, 2 ** 32)


def world(seed, ncharts=2, names="XYZ"):
    """Generated atlases over one linear base with the identity base map between them."""
    rng = random.Random(seed)
    n = rng.randint(1, 2)
    base = random_base(rng, n, rng.randint(0, n), max_degree=1)
    atlases = [random_atlas(rng, base, ncharts, name=nm) for nm in names]
    return rng, atlases, identity_base_map(base)


def bump_constant(lam):
    return lam + PolyMatrix.constant(lam.nvars, [[1] * lam.ncols] * lam.nrows)


def failing_subjects(rep):
    return {i.subject for i in rep.failures()}


def test_identity_morphism_passes():
    _, (gx,), _ = world(1, names="X")
    assert check_strict_morphism(identity_strict(gx.atlas)).passed


def test_identity_is_a_unit_for_composition():
    rng, (gx, gy), idb = world(2, names="XY")
    h = random_strict(rng, gx, gy, idb).morphism
    assert strict_equal(compose_strict(h, identity_strict(gx.atlas)), h)
    assert strict_equal(compose_strict(identity_strict(gy.atlas), h), h)


def test_compose_needs_matching_atlases():
    rng, (gx, gy), idb = world(3, names="XY")
    h = random_strict(rng, gx, gy, idb).morphism
    with pytest.raises(StructuralError):
        compose_strict(h, h)


def test_corrupted_delta_is_localized():
    rng, (gx, gy), idb = world(4, names="XY")
    h = random_strict(rng, gx, gy, idb).morphism
    deltas = dict(h.deltas)
    deltas[(0, 1)] = bump_constant(deltas[(0, 1)])
    bad = StrictMorphism(h.source, h.target, h.tau, h.locals, deltas, h.delta_targets, name="h")
    subjects = failing_subjects(check_strict_morphism(bad))
    assert "delta h[(0,1)]" in subjects
    assert all(s == "delta h[(0,1)]" or s.startswith("triple") for s in subjects)


def test_perturbed_upsilon_is_localized():
    rng, (gx, gy), idb = world(5, names="XY")
    h1, h2 = random_strict(rng, gx, gy, idb), random_strict(rng, gx, gy, idb)
    u = random_two_morphism(rng, h1, h2)
    ups = dict(u.upsilons)
    ups[0] = bump_constant(ups[0])
    bad = TwoMorphism(u.source, u.target, ups, u.pair_refs, name="u")
    rep = check_2morphism(bad)
    assert not rep.passed
    assert "chart u[0]" in failing_subjects(rep)
    assert "chart u[1]" not in failing_subjects(rep)


def test_identity_2morphism_passes_and_is_identity():
    rng, (gx, gy), idb = world(6, names="XY")
    h = random_strict(rng, gx, gy, idb).morphism
    e = identity_2morphism(h)
    assert check_2morphism(e).passed
    assert is_identity_class(e)
    assert is_identity_class(invert_2morphism(e))


def test_vertical_compose_rejects_unrelated_cells():
    rng, (gx, gy), idb = world(7, names="XY")
    hs = [random_strict(rng, gx, gy, idb, tau={0: k, 1: k}, name=f"h{k}") for k in range(2)]
    hs.append(random_strict(rng, gx, gy, idb, name="h2"))
    a = random_two_morphism(rng, hs[0], hs[1])
    b = random_two_morphism(rng, hs[0], hs[2])
    with pytest.raises(StructuralError):
        vertical_compose(b, a)


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_generated_data_passes(seed):
    rng, (gx, gy), idb = world(seed, names="XY")
    h1, h2 = random_strict(rng, gx, gy, idb), random_strict(rng, gx, gy, idb)
    assert check_atlas(gx.atlas).passed
    assert check_strict_morphism(h1.morphism).passed
    assert check_2morphism(random_two_morphism(rng, h1, h2)).passed


@settings(max_examples=8, deadline=None)
@given(seeds)
def test_composition_is_closed_and_associative(seed):
    rng, (gx, gy, gz, gw), idb = world(seed, names="XYZW")
    h, g, k = (random_strict(rng, a, b, idb).morphism for a, b in ((gx, gy), (gy, gz), (gz, gw)))
    gh = compose_strict(g, h)
    assert check_strict_morphism(gh).passed
    assert strict_equal(compose_strict(k, gh), compose_strict(compose_strict(k, g), h))


@settings(max_examples=8, deadline=None)
@given(seeds)
def test_vertical_composition(seed):
    rng, (gx, gy), idb = world(seed, names="XY")
    hs = [random_strict(rng, gx, gy, idb, name=f"h{k}") for k in range(4)]
    u = [random_two_morphism(rng, hs[k], hs[k + 1]) for k in range(3)]
    uv = vertical_compose(u[1], u[0])
    assert check_2morphism(uv).passed
    assert two_morphisms_equal(vertical_compose(u[0], identity_2morphism(hs[0].morphism)), u[0])
    assert two_morphisms_equal(vertical_compose(u[2], uv), vertical_compose(vertical_compose(u[2], u[1]), u[0]))


@settings(max_examples=8, deadline=None)
@given(seeds)
def test_inverse(seed):
    rng, (gx, gy), idb = world(seed, names="XY")
    h1, h2 = random_strict(rng, gx, gy, idb), random_strict(rng, gx, gy, idb)
    u = random_two_morphism(rng, h1, h2)
    inv = invert_2morphism(u)
    assert check_2morphism(inv).passed
    assert is_identity_class(vertical_compose(inv, u))
    assert is_identity_class(vertical_compose(u, inv))
    assert two_morphisms_equal(invert_2morphism(inv), u)


@settings(max_examples=6, deadline=None)
@given(seeds)
def test_horizontal_composition(seed):
    rng, (gx, gy, gz), idb = world(seed)
    h1, h2 = random_strict(rng, gx, gy, idb), random_strict(rng, gx, gy, idb)
    g1, g2 = random_strict(rng, gy, gz, idb), random_strict(rng, gy, gz, idb)
    u, gam = random_two_morphism(rng, h1, h2), random_two_morphism(rng, g1, g2)
    assert check_2morphism(horizontal_compose(gam, u)).passed
    ids = horizontal_compose(identity_2morphism(g1.morphism), identity_2morphism(h1.morphism))
    assert is_identity_class(ids)


@settings(max_examples=6, deadline=None)
@given(seeds)
def test_whiskering_matches_direct_formula(seed):
    rng, (gx, gy, gz), idb = world(seed)
    h1, h2 = random_strict(rng, gx, gy, idb), random_strict(rng, gx, gy, idb)
    g = random_strict(rng, gy, gz, idb).morphism
    u = random_two_morphism(rng, h1, h2)
    out = whisker_left(g, u)
    for i, c in gx.atlas.charts.items():
        # g applied to the cell, plus g's overlap homotopy pulled back along h1
        cell = u.upsilon_homotopy(i)
        loc = h1.morphism.locals[i]
        g_loc = g.locals[h2.morphism.tau[i]]
        expected = g_loc.f.divided_difference().substitute(cell.f1.f.concat(cell.f0.f)) @ cell.lam
        expected = expected + g.deltas[u.pair_refs[i]].substitute(loc.f) @ loc.fhat
        assert khom_equal(out.upsilons[i], expected, c)


@settings(max_examples=4, deadline=None)
@given(seeds)
def test_horizontal_associativity_and_interchange(seed):
    rng, (gx, gy, gz, gw), idb = world(seed, names="XYZW")
    hs = [random_strict(rng, gx, gy, idb) for _ in range(3)]
    gs = [random_strict(rng, gy, gz, idb) for _ in range(3)]
    ks = [random_strict(rng, gz, gw, idb) for _ in range(2)]
    u = [random_two_morphism(rng, hs[k], hs[k + 1]) for k in range(2)]
    gam = [random_two_morphism(rng, gs[k], gs[k + 1]) for k in range(2)]
    kap = random_two_morphism(rng, ks[0], ks[1])
    assert two_morphisms_equal(horizontal_compose(kap, horizontal_compose(gam[0], u[0])),
                               horizontal_compose(horizontal_compose(kap, gam[0]), u[0]))
    lhs = horizontal_compose(vertical_compose(gam[1], gam[0]), vertical_compose(u[1], u[0]))
    rhs = vertical_compose(horizontal_compose(gam[1], u[1]), horizontal_compose(gam[0], u[0]))
    assert two_morphisms_equal(lhs, rhs)
