import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kuranishi.atlas import build_atlas
from kuranishi.charts import ChartMorphism
from kuranishi.errors import StructuralError
from kuranishi.generators import (identity_base_map, random_atlas, random_base, random_roof, random_roof_homotopy,
                                  random_strict)
from kuranishi.laws import kur_instance, refine_laws
from kuranishi.localization import (Refinement, RoofHomotopy, canonical_pullback, check_refinement, check_roof,
                                    check_roof_homotopy, compose_roofs, horizontal_compose_roof, identity_refinement,
                                    identity_roof, identity_roof_homotopy, refine_atlas, relabeling_isomorphism,
                                    restrict_roof_homotopy, roof_homotopies_equivalent, roof_relabeling,
                                    split_chart_pieces, vertical_compose_roof)
from kuranishi.morphisms import TwoMorphism, identity_strict
from kuranishi.poly import PolyMap, PolyMatrix

seeds = st.integers(0, 2 ** 32)


def world(seed, ncharts=1, names="XY"):
    rng = random.Random(seed)
    base = random_base(rng, 2, 1, max_degree=1)
    atlases = [random_atlas(rng, base, ncharts, name=nm) for nm in names]
    return rng, atlases, identity_base_map(base)


def failing_checks(rep):
    return {i.check for i in rep.failures()}


def test_identity_refinement_passes():
    _, (gx, _), _ = world(1)
    assert check_refinement(identity_refinement(gx.atlas)).passed


def test_split_cover_is_a_refinement():
    _, (gx, _), _ = world(2, ncharts=2)
    a = gx.atlas
    cut = a.charts[0].witnesses[0][0]
    r = refine_atlas(a, {0: split_chart_pieces(a, 0, 0, cut)})
    assert set(r.source.charts) == {(0, "a"), (0, "b"), 1}
    assert check_refinement(r).passed


def test_nonzero_delta_is_not_a_refinement():
    _, (gx, _), _ = world(3, ncharts=2)
    r = identity_refinement(gx.atlas)
    deltas = dict(r.deltas)
    d = deltas[(0, 1)]
    deltas[(0, 1)] = d + PolyMatrix.constant(d.nvars, [[1] * d.ncols] * d.nrows)
    bad = Refinement(r.source, r.target, r.tau, r.locals, deltas, r.delta_targets)
    assert "refinement.zero-delta" in failing_checks(check_refinement(bad))


def test_non_inclusion_is_not_a_refinement():
    _, (gx, _), _ = world(4)
    r = identity_refinement(gx.atlas)
    c = gx.atlas.charts[0]
    shifted = ChartMorphism(c, c, PolyMap.identity(c.n).scale(2), r.locals[0].fhat)
    bad = Refinement(r.source, r.target, r.tau, {0: shifted}, r.deltas, r.delta_targets)
    assert failing_checks(check_refinement(bad)) >= {"refinement.open-inclusion"}


def test_missing_chart_breaks_surjectivity():
    _, (gx, _), _ = world(5, ncharts=2)
    a = gx.atlas
    sub = build_atlas(a.vdim, {0: a.charts[0]}, {}, name="X0")
    inclusion = identity_refinement(sub)
    r = Refinement(sub, a, {0: 0}, inclusion.locals, inclusion.deltas)
    rep = check_refinement(r)
    assert "refinement.surjective" in failing_checks(rep)
    assert "refinement.covering" in failing_checks(rep)


def test_pullback_along_identity_is_unital():
    rng, (gx, gy), idb = world(6)
    h = random_strict(rng, gx, gy, idb).morphism
    pb = canonical_pullback(h, identity_refinement(gy.atlas))
    assert relabeling_isomorphism(pb.apex, gx.atlas, lambda k: k[0]) is not None
    assert all(pb.h.locals[k].same_data(h.locals[k[0]]) for k in pb.apex.charts)


def test_pullback_of_identity_is_the_refinement():
    rng, (gx, _), _ = world(7)
    r = refine_atlas(gx.atlas, {0: split_chart_pieces(gx.atlas, 0, 1, 0)})
    pb = canonical_pullback(identity_strict(gx.atlas), r)
    assert relabeling_isomorphism(pb.apex, r.source, lambda k: k[1]) is not None


def test_pullback_needs_a_refinement_of_the_target():
    rng, (gx, gy), idb = world(8)
    h = random_strict(rng, gx, gy, idb).morphism
    with pytest.raises(StructuralError):
        canonical_pullback(h, identity_refinement(gx.atlas))


def test_identity_roofs_are_units():
    rng, (gx, gy), idb = world(9)
    roof = random_roof(rng, gx, gy, idb, split=1.0).roof
    assert check_roof(roof).passed
    after = compose_roofs(identity_roof(gy.atlas), roof)
    before = compose_roofs(roof, identity_roof(gx.atlas))
    assert check_roof(after).passed and check_roof(before).passed
    assert roof_relabeling(after, roof, lambda q: q[0]) is not None
    assert roof_relabeling(before, roof, lambda q: q[1]) is not None


def test_roofs_compose_only_end_to_start():
    rng, (gx, gy), idb = world(10)
    roof = random_roof(rng, gx, gy, idb).roof
    with pytest.raises(StructuralError):
        compose_roofs(roof, roof)


def test_roof_homotopy_equivalence_basics():
    rng, (gx, gy), idb = world(11)
    left, right = (random_roof(rng, gx, gy, idb, split=0.5, name=nm) for nm in "AB")
    chi = random_roof_homotopy(rng, left, right)
    assert check_roof_homotopy(chi).passed
    assert roof_homotopies_equivalent(chi, chi)
    r = identity_refinement(chi.common)
    assert roof_homotopies_equivalent(chi, restrict_roof_homotopy(chi, r))
    split = refine_atlas(chi.common, {k: split_chart_pieces(chi.common, k, 0, c.witnesses[0][0])
                                      for k, c in chi.common.charts.items()})
    narrow = restrict_roof_homotopy(chi, split)
    assert check_roof_homotopy(narrow).passed
    assert roof_homotopies_equivalent(chi, narrow)
    assert roof_homotopies_equivalent(narrow, chi)


def test_perturbed_cell_is_not_equivalent():
    rng, (gx, gy), idb = world(12)
    left, right = (random_roof(rng, gx, gy, idb, name=nm) for nm in "AB")
    chi = random_roof_homotopy(rng, left, right)
    ups = {i: u + PolyMatrix.constant(u.nvars, [[1] * u.ncols] * u.nrows) for i, u in chi.cell.upsilons.items()}
    cell = TwoMorphism(chi.cell.source, chi.cell.target, ups, chi.cell.pair_refs)
    bumped = RoofHomotopy(chi.left, chi.right, chi.leg1, chi.leg2, cell)
    assert not roof_homotopies_equivalent(chi, bumped)


def test_identity_roof_homotopy_is_neutral():
    rng, (gx, gy), idb = world(13)
    a, b = (random_roof(rng, gx, gy, idb, name=nm) for nm in "AB")
    chi = random_roof_homotopy(rng, a, b)
    assert check_roof_homotopy(identity_roof_homotopy(a.roof)).passed
    assert roof_homotopies_equivalent(vertical_compose_roof(chi, identity_roof_homotopy(a.roof)), chi)


@settings(max_examples=5, deadline=None)
@given(seeds)
def test_roof_compositions_pass(seed):
    rng, (gx, gy, gz), idb = world(seed, names="XYZ")
    # split only one roof: every split doubles the charts of each nested pull-back
    a, b, c = (random_roof(rng, gx, gy, idb, split=0.5 if nm == "A" else 0.0, name=nm) for nm in "ABC")
    s, t = (random_roof(rng, gy, gz, idb, split=0.0, name=nm) for nm in "ST")
    assert check_roof(compose_roofs(s.roof, a.roof)).passed
    ab, bc = random_roof_homotopy(rng, a, b, name="p"), random_roof_homotopy(rng, b, c, name="q")
    assert check_roof_homotopy(vertical_compose_roof(bc, ab)).passed
    st_cell = random_roof_homotopy(rng, s, t, name="l")
    assert check_roof_homotopy(horizontal_compose_roof(st_cell, ab)).passed


@settings(max_examples=3, deadline=None)
@given(seeds)
def test_refinement_pullback_laws(seed):
    inst = kur_instance(random.Random(seed))
    (rx, ry, rz), _ = inst["roofs"], inst["cells"]
    assert all(ok for _, ok in refine_laws(rx[0], rx[1], ry[0], rz[0]))
