import json
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import polymaps, polys
from kuranishi.atlas import check_atlas
from kuranishi.charts import Chart
from kuranishi.domain import Box
from kuranishi.errors import ParseError
from kuranishi.generators import (identity_base_map, random_atlas, random_base, random_dims, random_strict,
                                  random_two_morphism)
from kuranishi.morphisms import same_atlas, strict_equal, two_morphisms_equal
from kuranishi.poly import Poly, PolyMap, PolyMatrix
from kuranishi.serialize import (atlas_from_json, atlas_to_json, chart_from_json, chart_to_json,
                                 document_from_json, label_from_json, label_to_json, load_document,
                                 matrix_from_json, matrix_to_json, poly_from_json, poly_to_json, polymap_from_json,
                                 polymap_to_json, strict_from_json, strict_to_json, two_morphism_from_json,
                                 two_morphism_to_json)

seeds = st.integers(0, 2 ** 32)
labels = st.recursive(st.integers(-5, 5) | st.text("abc", max_size=3),
                      lambda inner: st.lists(inner, max_size=3).map(tuple), max_leaves=6)


def through_text(obj):
    return json.loads(json.dumps(obj))


@given(polys(2))
def test_poly_round_trip(p):
    assert poly_from_json(through_text(poly_to_json(p))) == p


@given(polymaps(2, 3))
def test_polymap_round_trip(m):
    assert polymap_from_json(through_text(polymap_to_json(m))) == m


@given(polymaps(2, 4))
def test_matrix_round_trip(m):
    a = PolyMatrix(2, [m.components[:2], m.components[2:]])
    assert matrix_from_json(through_text(matrix_to_json(a))) == a


def test_empty_matrix_keeps_its_shape():
    a = PolyMatrix.zeros(1, 3, 0)
    assert matrix_from_json(matrix_to_json(a)).shape == (3, 0)


@given(labels)
def test_label_round_trip(label):
    assert label_from_json(through_text(label_to_json(label))) == label


def test_chart_round_trip_keeps_domain_and_witnesses():
    x = Poly.var(1, 0)
    c = Chart(PolyMap(1, [x ** 2 - x]), "U", Box(((Fraction(-1, 2), 2),)), ((0,), (1,)))
    back = chart_from_json(through_text(chart_to_json(c)))
    assert back == c


@settings(max_examples=10, deadline=None)
@given(seeds)
def test_atlas_and_morphism_round_trip(seed):
    rng = random.Random(seed)
    n, m = random_dims(rng, 2)
    base = random_base(rng, n, m)
    gx, gy = random_atlas(rng, base, 2, name="X"), random_atlas(rng, base, 2, name="Y")
    x = atlas_from_json(through_text(atlas_to_json(gx.atlas)))
    assert same_atlas(x, gx.atlas)
    assert check_atlas(x).passed
    idb = identity_base_map(base)
    h1, h2 = random_strict(rng, gx, gy, idb, name="h1"), random_strict(rng, gx, gy, idb, name="h2")
    atlases = {"X": gx.atlas, "Y": gy.atlas}
    back = {k: strict_from_json(through_text(strict_to_json(g.morphism)), atlases, name=k)
            for k, g in (("h1", h1), ("h2", h2))}
    assert strict_equal(back["h1"], h1.morphism)
    u = random_two_morphism(rng, h1, h2)
    ub = two_morphism_from_json(through_text(two_morphism_to_json(u, "h1", "h2")), back)
    assert two_morphisms_equal(ub, u)


def test_gallery_documents_load(gallery):
    for path in sorted(gallery.glob("*.json")):
        doc = load_document(path)
        assert doc.raw


def test_bad_json_reports_line_and_column(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{\n "a": x}')
    with pytest.raises(ParseError) as err:
        load_document(p)
    assert err.value.location == "line 2 column 7"


def test_missing_file_is_a_parse_error(tmp_path):
    with pytest.raises(ParseError, match="cannot read file"):
        load_document(tmp_path / "absent.json")


@pytest.mark.parametrize("obj, location", [
    ({"vars": ["x"], "terms": [{"coef": 0.5, "exps": [1]}]}, "$.terms[0].coef"),
    ({"vars": ["x"], "terms": [{"coef": "1/0", "exps": [1]}]}, "$.terms[0].coef"),
    ({"vars": ["x"], "terms": [{"coef": 1, "exps": [1, 2]}]}, "$.terms[0].exps"),
    ({"vars": ["x"], "terms": [{"coef": 1, "exps": [-1]}]}, "$.terms[0].exps"),
    ({"vars": ["x"], "terms": [{"exps": [1]}]}, "$.terms[0]"),
    ({"terms": []}, "$"),
])
def test_polynomial_errors_point_at_the_field(obj, location):
    with pytest.raises(ParseError) as err:
        poly_from_json(obj)
    assert err.value.location == location


def test_bad_witness_is_a_parse_error():
    obj = chart_to_json(Chart(PolyMap(1, [Poly.var(1, 0)]), witnesses=((0,),)))
    obj["witnesses"] = [["1"]]
    with pytest.raises(ParseError):
        chart_from_json(obj, "$.chart")


def test_unknown_chart_reference():
    c = chart_to_json(Chart(PolyMap(1, [Poly.var(1, 0)]), witnesses=((0,),)))
    doc = {"atlases": {"X": {"vdim": 0, "charts": [{"id": 0, **c}],
                             "transitions": [{"i": 0, "j": 7, "f": {}, "fhat": {}}]}}}
    with pytest.raises(ParseError) as err:
        document_from_json(doc)
    assert err.value.location == "$.atlases.X.transitions[0].j"


def test_top_level_must_be_an_object():
    with pytest.raises(ParseError):
        document_from_json([])
