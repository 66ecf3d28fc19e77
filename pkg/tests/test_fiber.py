import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kuranishi.atlas import build_atlas, check_atlas, line_chart
from kuranishi.charts import Chart, ChartMorphism
from kuranishi.errors import PreconditionError
from kuranishi.fiber import (check_2fiber_identity, check_fiber_product, comparison_2morphism_lambda,
                             fiber_product, induced_morphism_u, lambda_identities, theta_restricts_to_chi)
from kuranishi.generators import random_cone, random_fiber_instance
from kuranishi.laws import fiber_case
from kuranishi.morphisms import (StrictMorphism, check_strict_morphism, compose_strict, identity_2morphism,
                                 identity_strict, is_identity_class, strict_equal)
from kuranishi.poly import Poly, PolyMap, PolyMatrix
from kuranishi.serialize import load_document

seeds = st.integers(0, 2 ** 32)


def one_chart(chart, name):
    return build_atlas(chart.vdim, {0: chart}, {}, name=name)


def one_chart_map(x, y, f, fhat, name="h"):
    c, d = x.charts[0], y.charts[0]
    return StrictMorphism(x, y, {0: 0}, {0: ChartMorphism(c, d, f, fhat)},
                          {(0, 0): PolyMatrix.zeros(c.n, d.n, c.m)}, {(0, 0): (0, 0)}, name=name)


def square_product():
    x = one_chart(Chart(PolyMap(1, [Poly.var(1, 0) ** 2]), witnesses=((0,),)), "X")
    y = one_chart(Chart(PolyMap(0, []), witnesses=((),)), "P")
    m = one_chart(line_chart(1), "M")
    h = one_chart_map(x, m, PolyMap.identity(1), PolyMatrix.zeros(1, 0, 1))
    g = one_chart_map(y, m, PolyMap(0, [Poly.zero(0)]), PolyMatrix.zeros(0, 0, 0), "g")
    return fiber_product(x, h, y, g)


def test_diagonal_from_gallery(gallery):
    req = load_document(gallery / "fiber_diagonal.json").fiber
    fp = fiber_product(req["x"], req["h"], req["y"], req["g"], req["witness_pairs"])
    assert list(fp.z.charts) == [(0, 0)]
    c = fp.z.charts[(0, 0)]
    assert (c.n, c.m, fp.z.vdim) == (2, 1, 1)
    xs, ys = Poly.var(2, 0), Poly.var(2, 1)
    assert c.s == PolyMap(2, [ys - xs])
    assert set(c.witnesses) == {(0, 0), (1, 1)}
    assert check_fiber_product(fp).passed


def test_square_against_a_point():
    fp = square_product()
    c = fp.z.charts[(0, 0)]
    x = Poly.var(1, 0)
    assert c.s == PolyMap(1, [x ** 2, -x])
    assert (c.m, fp.z.vdim) == (2, -1)
    assert check_fiber_product(fp).passed


def test_obstruction_ranks_add_up():
    # m_d = 2 + 1 + 3 over a 3-dimensional base
    v = [Poly.var(3, k) for k in range(3)]
    x = one_chart(Chart(PolyMap(3, v[:2]), witnesses=((0, 0, 0),)), "X")
    y = one_chart(Chart(PolyMap(3, v[:1]), witnesses=((0, 0, 0),)), "Y")
    m = one_chart(line_chart(3), "M")
    h = one_chart_map(x, m, PolyMap.identity(3), PolyMatrix.zeros(3, 0, 2))
    g = one_chart_map(y, m, PolyMap.identity(3), PolyMatrix.zeros(3, 0, 1), "g")
    fp = fiber_product(x, h, y, g)
    c = fp.z.charts[(0, 0)]
    assert (c.n, c.m) == (6, 6)
    assert fp.z.vdim == x.vdim + y.vdim - m.vdim == 0
    assert check_fiber_product(fp).passed


def test_base_must_be_a_manifold():
    x = one_chart(line_chart(1), "X")
    m = one_chart(Chart(PolyMap(1, [Poly.zero(1)]), witnesses=((0,),)), "M")
    h = one_chart_map(x, m, PolyMap.identity(1), PolyMatrix.zeros(1, 1, 0))
    with pytest.raises(PreconditionError):
        fiber_product(x, h, x, h)


def test_unmatched_witnesses_give_no_charts():
    x = one_chart(line_chart(1), "X")
    y = one_chart(line_chart(1, witnesses=((1,),)), "Y")
    m = one_chart(line_chart(1), "M")
    ident = PolyMatrix.zeros(1, 0, 0)
    fp = fiber_product(x, one_chart_map(x, m, PolyMap.identity(1), ident), y,
                       one_chart_map(y, m, PolyMap.identity(1), ident, "g"))
    assert fp.z.charts == {}


def test_projections_and_theta_induce_the_identity():
    fp = square_product()
    u = induced_morphism_u(fp.z, fp.pi1, fp.pi2, fp.theta, fp)
    assert check_strict_morphism(u).passed
    assert all(u.tau[d] == d for d in fp.z.charts)
    assert strict_equal(u, identity_strict(fp.z))


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_generated_products_are_valid(seed):
    inst = random_fiber_instance(random.Random(seed))
    x, y = inst.x.atlas, inst.y.atlas
    fp = fiber_product(x, inst.h.morphism, y, inst.g.morphism)
    assert check_fiber_product(fp).passed
    assert fp.z.vdim == x.vdim + y.vdim - inst.m.atlas.vdim
    assert check_atlas(fp.z).passed


@settings(max_examples=8, deadline=None)
@given(seeds)
def test_universal_morphism(seed):
    rng = random.Random(seed)
    inst = random_fiber_instance(rng)
    fp = fiber_product(inst.x.atlas, inst.h.morphism, inst.y.atlas, inst.g.morphism)
    if not fp.z.charts:
        return
    w, k1, k2, chi = random_cone(rng, inst)
    u = induced_morphism_u(w.atlas, k1.morphism, k2.morphism, chi, fp)
    assert check_strict_morphism(u).passed
    assert strict_equal(compose_strict(fp.pi1, u), k1.morphism)
    assert theta_restricts_to_chi(fp, u, chi)
    assert check_2fiber_identity(chi, fp, u)
    # λ between u and itself with identity cells is an identity class
    eta1 = identity_2morphism(compose_strict(fp.pi1, u))
    eta2 = identity_2morphism(compose_strict(fp.pi2, u))
    lam = comparison_2morphism_lambda(eta1, eta2, fp, u, u)
    assert is_identity_class(lam)
    assert all(lambda_identities(lam, eta1, eta2, fp).values())


@settings(max_examples=6, deadline=None)
@given(seeds)
def test_comparison_cell_laws(seed):
    assert all(ok for _, ok in fiber_case(random.Random(seed), 2, 2, "grevlex"))
