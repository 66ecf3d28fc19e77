"""Regenerate the bundled example gallery and its mutation fixtures.

Run from the repository root:  python3 scripts/build_gallery.py
Every fixture is rebuilt deterministically; rerunning leaves the files unchanged.
"""
from __future__ import annotations

import copy
import json
import random
from pathlib import Path

from kuranishi.atlas import build_atlas, line_chart, manifold_to_atlas
from kuranishi.charts import Chart, ChartMorphism
from kuranishi.cli import joyce_homotopy
from kuranishi.domain import Box, Domain
from kuranishi.generators import (identity_base_map, random_atlas, random_base, random_strict,
                                  random_two_morphism)
from kuranishi.localization import Refinement
from kuranishi.morphisms import StrictMorphism
from kuranishi.poly import Poly, PolyMap, PolyMatrix
from kuranishi.serialize import (_terms_from_json, _terms_to_json, atlas_to_json, chart_to_json,
                                 homotopy_to_json, morphism_to_json, point_to_json, strict_to_json,
                                 two_morphism_to_json)

ROOT = Path(__file__).resolve().parents[1] / "src" / "kuranishi" / "gallery"
X = Poly.var(1, 0)


def one_chart_strict(x, y, f: PolyMap, fhat: PolyMatrix, name: str) -> StrictMorphism:
    """Strict morphism between one-chart atlases labelled 0 with a zero Δ on the diagonal."""
    c, d = x.charts[0], y.charts[0]
    local = ChartMorphism(c, d, f, fhat)
    return StrictMorphism(x, y, {0: 0}, {0: local}, {(0, 0): PolyMatrix.zeros(c.n, d.n, c.m)},
                          {(0, 0): (0, 0)}, name=name)


def one_chart_atlas(chart: Chart, name: str):
    return build_atlas(chart.vdim, {0: chart}, {}, name=name)


# fixtures

def joyce() -> dict:
    return {"description": "two morphisms (x^2, 0) -> x^3 whose bundle maps differ by (0, x^2 - x)",
            "homotopy": homotopy_to_json(joyce_homotopy())}


def chart() -> dict:
    xy = PolyMap(2, [Poly.var(2, 0) ** 2 - Poly.var(2, 1)])
    c = Chart(xy, "U", None, ((0, 0), (1, 1), (2, 4)))
    return {"description": "the parabola y = x^2 cut out in the plane", "chart": chart_to_json(c)}


def morphism() -> dict:
    h = joyce_homotopy()
    return {"description": "f(x) = x with bundle map (x, x) from (x^2, 0) to x^3",
            "morphism": morphism_to_json(h.f0)}


def line_atlas() -> dict:
    # two overlapping half-lines; the second chart uses the coordinate u = x + 1
    a = Chart(PolyMap(1, []), "M", Domain(1, Box(((None, 1),))), ((0,), (1,)))
    b = Chart(PolyMap(1, []), "M", Domain(1, Box(((1, None),))), ((1,), (2,)))
    atlas = manifold_to_atlas({"a": a, "b": b}, {("a", "b"): PolyMap(1, [X + 1]),
                                                 ("b", "a"): PolyMap(1, [X - 1])}, name="line")
    return {"description": "the real line covered by two half-lines, no obstruction bundle",
            "atlases": {"line": atlas_to_json(atlas)}}


def _generated(seed: int):
    rng = random.Random(seed)
    base = random_base(rng, 2, 1, max_degree=1)
    return rng, base, identity_base_map(base)


def generated_atlas() -> dict:
    rng, base, _ = _generated(11)
    x = random_atlas(rng, base, 2, perturb=1.0, name="X")
    return {"description": "a generated two-chart atlas with perturbed transitions and nonzero cocycles",
            "atlases": {"X": atlas_to_json(x.atlas)}}


def strict() -> dict:
    rng, base, idb = _generated(12)
    x = random_atlas(rng, base, 2, perturb=1.0, name="X")
    y = random_atlas(rng, base, 2, perturb=1.0, name="Y")
    h = random_strict(rng, x, y, idb, perturb=1.0, name="h")
    return {"description": "a generated strict morphism between two-chart atlases",
            "atlases": {"X": atlas_to_json(x.atlas), "Y": atlas_to_json(y.atlas)},
            "morphisms": {"h": strict_to_json(h.morphism)}}


def two_morphism() -> dict:
    rng, base, idb = _generated(13)
    x = random_atlas(rng, base, 2, perturb=1.0, name="X")
    y = random_atlas(rng, base, 2, perturb=1.0, name="Y")
    h1 = random_strict(rng, x, y, idb, perturb=1.0, name="h1")
    h2 = random_strict(rng, x, y, idb, perturb=1.0, name="h2")
    u = random_two_morphism(rng, h1, h2, name="u")
    return {"description": "a generated 2-morphism between two strict morphisms",
            "atlases": {"X": atlas_to_json(x.atlas), "Y": atlas_to_json(y.atlas)},
            "morphisms": {"h1": strict_to_json(h1.morphism), "h2": strict_to_json(h2.morphism)},
            "2morphisms": {"u": two_morphism_to_json(u, "h1", "h2")}}


def roof() -> dict:
    sq = PolyMap(1, [X ** 2])
    x = one_chart_atlas(Chart(sq, "U", None, ((0,),)), "X")
    xr = one_chart_atlas(Chart(sq, "U", Domain(1, Box(((-1, 1),))), ((0,),)), "Xr")
    y = one_chart_atlas(Chart(sq, "V", None, ((0,),)), "Y")
    r = Refinement.of(one_chart_strict(xr, x, PolyMap.identity(1), PolyMatrix.identity(1, 1), "r"))
    h = one_chart_strict(xr, y, PolyMap(1, [X.scale(2)]), PolyMatrix(1, [[Poly.const(1, 4)]]), "h")
    return {"description": "x -> 2x on the closed interval [-1, 1], written as a roof over X",
            "atlases": {nm: atlas_to_json(a) for nm, a in (("X", x), ("Xr", xr), ("Y", y))},
            "morphisms": {"r": strict_to_json(r), "h": strict_to_json(h)},
            "roofs": {"R": {"r": "r", "h": "h"}}}


def _fiber_doc(description: str, x, y, m, h, g, pairs) -> dict:
    return {"description": description,
            "atlases": {a.name: atlas_to_json(a) for a in (x, y, m)},
            "morphisms": {"h": strict_to_json(h), "g": strict_to_json(g)},
            "fiber": {"x": x.name, "y": y.name, "h": "h", "g": "g",
                      "witness_pairs": [{"x_chart": 0, "y_chart": 0, "x_point": point_to_json(a),
                                         "y_point": point_to_json(b)} for a, b in pairs]}}


def fiber_diagonal() -> dict:
    lines = [one_chart_atlas(line_chart(1, witnesses=((0,), (1,)), footprint=nm), nm) for nm in ("L1", "L2", "M")]
    l1, l2, m = lines
    ident = PolyMatrix.zeros(1, 0, 0)
    h = one_chart_strict(l1, m, PolyMap.identity(1), ident, "h")
    g = one_chart_strict(l2, m, PolyMap.identity(1), ident, "g")
    return _fiber_doc("the diagonal: two copies of the line over the line", l1, l2, m, h, g,
                      [((0,), (0,)), ((1,), (1,))])


def fiber_square() -> dict:
    x = one_chart_atlas(Chart(PolyMap(1, [X ** 2]), "U", None, ((0,),)), "X")
    y = one_chart_atlas(Chart(PolyMap(0, []), "P", None, ((),)), "P")
    m = one_chart_atlas(line_chart(1), "M")
    h = one_chart_strict(x, m, PolyMap(1, [X]), PolyMatrix.zeros(1, 0, 1), "h")
    g = one_chart_strict(y, m, PolyMap(0, [Poly.zero(0)]), PolyMatrix.zeros(0, 0, 0), "g")
    return _fiber_doc("a point mapped to 0 against x -> x with section x^2", x, y, m, h, g, [((0,), ())])


FIXTURES = {
    "joyce": joyce, "chart": chart, "morphism": morphism, "line_atlas": line_atlas,
    "generated_atlas": generated_atlas, "strict": strict, "2morphism": two_morphism, "roof": roof,
    "fiber_diagonal": fiber_diagonal, "fiber_square": fiber_square,
}


# mutations: each changes one field of a passing fixture

def _bump(entry: dict, nvars: int, delta: Poly) -> None:
    p = _terms_from_json(entry["terms"], nvars, "$") + delta
    entry["terms"] = _terms_to_json(p)


def _find(records: list, **match) -> dict:
    return next(r for r in records if all(r[k] == v for k, v in match.items()))


def mutations(docs: dict) -> dict:
    out = {}

    def make(name, base, field, meta, edit):
        doc = copy.deepcopy(docs[base])
        edit(doc)
        doc["description"] = f"{docs[base]['description']}; mutated: {field}"
        doc["mutation"] = {"base": f"{base}.json", "field": field, **meta}
        out[name] = doc

    one = Poly.one(1)
    make("morphism_fhat", "morphism", "morphism.fhat[0][0] + 1",
         {"kind": "morphism", "check": "morphism.bundle-identity", "subject": "morphism"},
         lambda d: _bump(d["morphism"]["fhat"]["rows"][0][0], 1, one))
    make("joyce_lambda", "joyce", "homotopy.lam[0][0] + 1",
         {"kind": "homotopy", "check": "homotopy.global-identity", "subject": "homotopy"},
         lambda d: _bump(d["homotopy"]["lam"]["rows"][0][0], 1, one))
    make("joyce_fhat1", "joyce", "homotopy.f1.fhat[0][1] + 1",
         {"kind": "homotopy", "check": "homotopy.lower-triangle", "subject": "homotopy"},
         lambda d: _bump(d["homotopy"]["f1"]["fhat"]["rows"][0][1], 1, one))
    make("line_shift", "line_atlas", "transition (a, b): f + 1",
         {"kind": "atlas", "check": "homotopy.global-identity", "subject": "cocycle (a,b,a)"},
         lambda d: _bump(_find(d["atlases"]["line"]["pairs"], i="a", j="b")["f"]["components"][0], 1, one))
    two = Poly.one(2)
    make("atlas_cocycle", "generated_atlas", "cocycle (0, 1, 0): lam[0][0] + 1",
         {"kind": "atlas", "check": "homotopy.global-identity", "subject": "cocycle (0,1,0)"},
         lambda d: _bump(_find(d["atlases"]["X"]["triples"], id=[0, 1, 0])["lam"]["rows"][0][0], 2, two))
    make("atlas_fhat", "generated_atlas", "transition (0, 1): fhat[0][0] + 1",
         {"kind": "atlas", "check": "morphism.bundle-identity", "subject": "transition (0,1)"},
         lambda d: _bump(_find(d["atlases"]["X"]["pairs"], id=[0, 1])["fhat"]["rows"][0][0], 2, two))
    make("strict_delta", "strict", "h.delta (0, 1): [0][0] + 1",
         {"kind": "strict", "check": "homotopy.global-identity", "subject": "delta h[(0,1)]"},
         lambda d: _bump(_find(d["morphisms"]["h"]["deltas"], pair=[0, 1])["delta"]["rows"][0][0], 2, two))
    make("strict_local", "strict", "h.locals 0: fhat[0][0] + 1",
         {"kind": "strict", "check": "morphism.bundle-identity", "subject": "local h[0]"},
         lambda d: _bump(_find(d["morphisms"]["h"]["locals"], chart=0)["fhat"]["rows"][0][0], 2, two))
    make("two_upsilon", "2morphism", "u.upsilon 0: [0][0] + 1",
         {"kind": "2morphism", "check": "homotopy.global-identity", "subject": "chart u[0]"},
         lambda d: _bump(_find(d["2morphisms"]["u"]["upsilons"], chart=0)["upsilon"]["rows"][0][0], 2, two))

    def flip(d):
        entry = _find(d["morphisms"]["r"]["locals"], chart=0)["f"]["components"][0]
        _bump(entry, 1, X.scale(-2))
    make("roof_flip", "roof", "r.locals 0: f = -x",
         {"kind": "roof", "check": "refinement.open-inclusion", "subject": "chart 0"}, flip)
    return out


def write(path: Path, obj: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def main() -> None:
    docs = {name: build() for name, build in FIXTURES.items()}
    for name, doc in docs.items():
        write(ROOT / f"{name}.json", doc)
    for name, doc in mutations(docs).items():
        write(ROOT / "mutations" / f"{name}.json", doc)


if __name__ == "__main__":
    main()
