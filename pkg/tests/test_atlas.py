import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kuranishi.atlas import (build_atlas, check_atlas, line_chart, manifold_to_atlas, restrict_atlas,
                             restrict_chart)
from kuranishi.charts import Chart, ChartMorphism
from kuranishi.domain import Box, Domain
from kuranishi.errors import DimensionError, EmptyRestrictionError, PreconditionError, StructuralError
from kuranishi.generators import (identity_base_map, random_atlas, random_base, random_dims, random_strict,
                                  random_two_morphism)
from kuranishi.poly import Poly, PolyMap, PolyMatrix

x = Poly.var(1, 0)
seeds = st.integers(0, 2 ** 32)


def failing(rep):
    return {(i.check, i.subject) for i in rep.failures()}


def test_single_chart_atlas_passes():
    c = Chart(PolyMap(1, [x ** 2 - x]), witnesses=[(0,), (1,)])
    rep = check_atlas(build_atlas(0, {0: c}, {}))
    assert rep.passed
    assert {i.check for i in rep.items} >= {"atlas.dimension", "atlas.identity-transition"}


def test_two_identity_charts_of_the_line():
    a = manifold_to_atlas({0: line_chart(), 1: line_chart()}, {(0, 1): PolyMap.identity(1),
                                                               (1, 0): PolyMap.identity(1)})
    assert check_atlas(a).passed
    assert all(lam.ncols == 0 for lam in a.cocycles.values())


def test_shifted_line_charts():
    a = manifold_to_atlas({0: line_chart(), 1: line_chart(witnesses=[(1,)])},
                          {(0, 1): PolyMap(1, [x + 1]), (1, 0): PolyMap(1, [x - 1])})
    assert check_atlas(a).passed


def test_manifold_charts_need_no_obstruction():
    with pytest.raises(PreconditionError):
        manifold_to_atlas({0: Chart(PolyMap(1, [x]))}, {})


def test_missing_cocycle_is_structural():
    c = Chart(PolyMap(1, [x]))
    f = ChartMorphism(c, c, PolyMap(1, [2 * x]), PolyMatrix.constant(1, [[2]]))
    with pytest.raises(StructuralError):
        build_atlas(0, {0: c, 1: c}, {(0, 1): f, (1, 0): f})


def test_wrong_dimension_is_rejected_on_construction():
    with pytest.raises(DimensionError):
        build_atlas(1, {0: Chart(PolyMap(1, [x]))}, {})


def test_negative_virtual_dimension_is_allowed():
    c = Chart(PolyMap(1, [x ** 2, Poly.zero(1)]), witnesses=[(0,)])
    assert check_atlas(build_atlas(-1, {0: c}, {})).passed


def test_corrupted_bundle_map_is_localized():
    rng = random.Random(5)
    g = random_atlas(rng, random_base(rng, 2, 1), ncharts=2)
    a = g.atlas
    f = a.transitions[(0, 1)]
    bumped = f.fhat + PolyMatrix.constant(f.fhat.nvars, [[1] * f.fhat.ncols] * f.fhat.nrows)
    trans = dict(a.transitions)
    trans[(0, 1)] = ChartMorphism(f.source, f.target, f.f, bumped)
    bad = build_atlas(a.vdim, a.charts, trans, a.cocycles)
    failures = failing(check_atlas(bad))
    assert ("morphism.bundle-identity", "transition (0,1)") in failures
    assert {subj for check, subj in failures if check.startswith("morphism.")} == {"transition (0,1)"}


def test_restrict_to_full_domain_is_the_same_chart():
    c = Chart(PolyMap(1, [x ** 2 - x]), witnesses=[(0,), (1,)])
    assert restrict_chart(c, Domain.full(1)) == c


def test_restriction_filters_witnesses():
    c = Chart(PolyMap(1, [x ** 2 - x, Poly.zero(1)]), witnesses=[(0,), (1,)])
    r = restrict_chart(c, Box(((Fraction(-1, 2), Fraction(1, 2)),)))
    assert r.witnesses == ((0,),)
    assert r.s == c.s


def test_empty_restriction_raises():
    c = line_chart()
    with pytest.raises(EmptyRestrictionError):
        restrict_chart(restrict_chart(c, Box(((0, 1),))), Box(((2, 3),)))


bounds = st.tuples(st.integers(-4, 4), st.integers(0, 4)).map(lambda t: (t[0], t[0] + t[1]))


@given(bounds, bounds)
def test_double_restriction_is_restriction_to_intersection(first, second):
    c = line_chart(witnesses=[(k,) for k in range(-4, 9)])
    lo, hi = max(first[0], second[0]), min(first[1], second[1])
    if lo > hi:
        with pytest.raises(EmptyRestrictionError):
            restrict_chart(restrict_chart(c, Box((first,))), Box((second,)))
        return
    twice = restrict_chart(restrict_chart(c, Box((first,))), Box((second,)))
    once = restrict_chart(c, Box(((lo, hi),)))
    assert twice.domain == once.domain
    assert twice.witnesses == once.witnesses == tuple((k,) for k in range(lo, hi + 1))


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_generated_atlases_pass(seed):
    rng = random.Random(seed)
    n, m = random_dims(rng, 2)
    g = random_atlas(rng, random_base(rng, n, m), ncharts=rng.randint(1, 3))
    assert check_atlas(g.atlas).passed
    assert {c.vdim for c in g.atlas.charts.values()} == {g.atlas.vdim}


@settings(max_examples=15, deadline=None)
@given(seeds)
def test_check_is_restriction_stable(seed):
    rng = random.Random(seed)
    n, m = random_dims(rng, 2)
    g = random_atlas(rng, random_base(rng, n, m), ncharts=2)
    a = g.atlas
    boxes = {i: Box(((-2, 2),) * c.n) for i, c in a.charts.items() if rng.random() < 0.7}
    assert check_atlas(restrict_atlas(a, boxes)).passed


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_manifold_two_morphisms_are_empty(seed):
    rng = random.Random(seed)
    base = random_base(rng, rng.randint(1, 2), 0)
    gx, gy = random_atlas(rng, base, 2, name="X"), random_atlas(rng, base, 2, name="Y")
    idb = identity_base_map(base)
    u = random_two_morphism(rng, random_strict(rng, gx, gy, idb), random_strict(rng, gx, gy, idb))
    for i, lam in u.upsilons.items():
        assert lam.shape == (gy.atlas.charts[0].n, 0)
