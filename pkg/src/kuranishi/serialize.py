"""JSON encoding for polynomials, charts, atlases, morphisms and roofs.

Polynomials use ``{"vars": [...], "terms": [{"coef": "n/d", "exps": [...]}]}``.
Maps and matrices share one ``vars`` list and store each entry as
``{"terms": [...]}``. Record labels may be strings, integers or nested
lists; lists decode to tuples so generated labels round-trip.

Documents bundle named objects::

    {"atlases": {...}, "morphisms": {...}, "2morphisms": {...},
     "roofs": {...}, "roof_homotopies": {...},
     "chart": ..., "morphism": ..., "homotopy": ..., "fiber": ...}

Morphism-level records refer to atlases and to each other by name.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping

from .atlas import Atlas, Overlap2, Overlap3, Overlap4, build_atlas
from .charts import Chart, ChartMorphism, Homotopy
from .domain import Box, Domain
from .errors import KuranishiError, ParseError
from .localization import Roof, RoofHomotopy
from .morphisms import StrictMorphism, TwoMorphism
from .poly import Poly, PolyMap, PolyMatrix, rational_str, to_rational


def var_names(n: int) -> list[str]:
    return [f"x{i + 1}" for i in range(n)]


# labels

def label_to_json(label):
    if isinstance(label, tuple):
        return [label_to_json(x) for x in label]
    return label


def label_from_json(value, path: str = "$"):
    if isinstance(value, list):
        return tuple(label_from_json(v, path) for v in value)
    if isinstance(value, (str, int)) and not isinstance(value, bool):
        return value
    raise ParseError(f"label must be a string, integer or list, got {type(value).__name__}", path)


# rationals and polynomials

def _rational(value, path: str):
    if isinstance(value, bool) or isinstance(value, float):
        raise ParseError("coefficients must be exact: an integer or a 'n/d' string", path)
    try:
        return to_rational(value)
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        raise ParseError(f"not an exact rational: {value!r} ({exc})", path) from None


def _terms_to_json(p: Poly) -> list:
    return [{"coef": rational_str(c), "exps": list(e)} for e, c in sorted(p.terms.items(), reverse=True)]


def poly_to_json(p: Poly, names: list[str] | None = None) -> dict:
    return {"vars": names or var_names(p.nvars), "terms": _terms_to_json(p)}


def _need(obj, key: str, path: str, kind=None):
    if not isinstance(obj, dict):
        raise ParseError(f"expected an object, got {type(obj).__name__}", path)
    if key not in obj:
        raise ParseError(f"missing field {key!r}", path)
    value = obj[key]
    if kind is not None and not isinstance(value, kind):
        raise ParseError(f"field {key!r} has the wrong type ({type(value).__name__})", f"{path}.{key}")
    return value


def _vars(obj, path: str, nvars: int | None = None) -> int:
    names = _need(obj, "vars", path, list)
    if not all(isinstance(v, str) for v in names):
        raise ParseError("variable names must be strings", f"{path}.vars")
    if nvars is not None and len(names) != nvars:
        raise ParseError(f"expected {nvars} variables, got {len(names)}", f"{path}.vars")
    return len(names)


def _terms_from_json(terms, nvars: int, path: str) -> Poly:
    if not isinstance(terms, list):
        raise ParseError("terms must be a list", path)
    out: dict = {}
    for k, t in enumerate(terms):
        tp = f"{path}[{k}]"
        exps = _need(t, "exps", tp, list)
        if len(exps) != nvars:
            raise ParseError(f"exps has length {len(exps)}, expected {nvars}", f"{tp}.exps")
        if not all(isinstance(e, int) and not isinstance(e, bool) and e >= 0 for e in exps):
            raise ParseError("exponents must be nonnegative integers", f"{tp}.exps")
        coef = _rational(_need(t, "coef", tp), f"{tp}.coef")
        key = tuple(exps)
        out[key] = out.get(key, 0) + coef
    return Poly(nvars, out)


def poly_from_json(obj, path: str = "$", nvars: int | None = None) -> Poly:
    n = _vars(obj, path, nvars)
    return _terms_from_json(_need(obj, "terms", path), n, f"{path}.terms")


def _entry(obj, nvars: int, path: str) -> Poly:
    if isinstance(obj, dict) and "vars" in obj:
        return poly_from_json(obj, path, nvars)
    return _terms_from_json(_need(obj, "terms", path), nvars, f"{path}.terms")


def polymap_to_json(m: PolyMap, names: list[str] | None = None) -> dict:
    return {"vars": names or var_names(m.domain_dim),
            "components": [{"terms": _terms_to_json(c)} for c in m.components]}


def polymap_from_json(obj, path: str = "$", nvars: int | None = None, size: int | None = None) -> PolyMap:
    n = _vars(obj, path, nvars)
    comps = _need(obj, "components", path, list)
    if size is not None and len(comps) != size:
        raise ParseError(f"expected {size} components, got {len(comps)}", f"{path}.components")
    return PolyMap(n, [_entry(c, n, f"{path}.components[{k}]") for k, c in enumerate(comps)])


def matrix_to_json(a: PolyMatrix, names: list[str] | None = None) -> dict:
    return {"vars": names or var_names(a.nvars), "shape": list(a.shape),
            "rows": [[{"terms": _terms_to_json(p)} for p in row] for row in a.rows]}


def matrix_from_json(obj, path: str = "$", nvars: int | None = None, shape: tuple | None = None) -> PolyMatrix:
    n = _vars(obj, path, nvars)
    dims = _need(obj, "shape", path, list)
    if len(dims) != 2 or not all(isinstance(d, int) and d >= 0 for d in dims):
        raise ParseError("shape must be two nonnegative integers", f"{path}.shape")
    if shape is not None and tuple(dims) != tuple(shape):
        raise ParseError(f"shape {dims} differs from the expected {list(shape)}", f"{path}.shape")
    rows = _need(obj, "rows", path, list)
    if len(rows) != dims[0]:
        raise ParseError(f"{len(rows)} rows, shape says {dims[0]}", f"{path}.rows")
    out = []
    for r, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dims[1]:
            raise ParseError(f"row must list {dims[1]} entries", f"{path}.rows[{r}]")
        out.append([_entry(e, n, f"{path}.rows[{r}][{c}]") for c, e in enumerate(row)])
    return PolyMatrix(n, out, ncols=dims[1])


# points and domains

def point_to_json(p) -> list:
    return [rational_str(v) for v in p]


def _point(obj, n: int, path: str) -> tuple:
    if not isinstance(obj, list) or len(obj) != n:
        raise ParseError(f"point must be a list of {n} rationals", path)
    return tuple(_rational(v, f"{path}[{k}]") for k, v in enumerate(obj))


def _box(obj, n: int, path: str) -> Box:
    if not isinstance(obj, list) or len(obj) != n:
        raise ParseError(f"box must list {n} intervals", path)
    ivs = []
    for k, iv in enumerate(obj):
        if not isinstance(iv, list) or len(iv) != 2:
            raise ParseError("interval must be [lo, hi] (null for unbounded)", f"{path}[{k}]")
        ivs.append(tuple(None if v is None else _rational(v, f"{path}[{k}]") for v in iv))
    return Box(tuple(ivs))


def domain_from_json(obj, n: int, path: str = "$") -> Domain:
    box = _box(obj["box"], n, f"{path}.box") if isinstance(obj, dict) and "box" in obj else None
    cons = []
    for k, c in enumerate(obj.get("preimages", []) if isinstance(obj, dict) else []):
        cp = f"{path}.preimages[{k}]"
        g = polymap_from_json(_need(c, "map", cp), f"{cp}.map", n)
        cons.append((g, _box(_need(c, "box", cp), g.codomain_dim, f"{cp}.box")))
    return Domain(n, box, tuple(cons))


# charts, morphisms, homotopies

def chart_to_json(c: Chart) -> dict:
    out = {"n": c.n, "m": c.m, "s": polymap_to_json(c.s), "footprint": c.footprint}
    if not c.domain.is_full():
        out["domain"] = c.domain.to_json()
    out["witnesses"] = [point_to_json(w) for w in c.witnesses]
    return out


def chart_from_json(obj, path: str = "$") -> Chart:
    n = _need(obj, "n", path, int)
    m = _need(obj, "m", path, int)
    s = polymap_from_json(_need(obj, "s", path), f"{path}.s", n, m)
    dom = domain_from_json(obj["domain"], n, f"{path}.domain") if "domain" in obj else None
    wits = tuple(_point(w, n, f"{path}.witnesses[{k}]") for k, w in enumerate(obj.get("witnesses", [])))
    try:
        return Chart(s, str(obj.get("footprint", "U")), dom, wits)
    except KuranishiError as exc:
        raise ParseError(str(exc), path) from None


def _map_data(f: ChartMorphism) -> dict:
    return {"f": polymap_to_json(f.f), "fhat": matrix_to_json(f.fhat)}


def _map_from(obj, source: Chart, target: Chart, path: str) -> ChartMorphism:
    f = polymap_from_json(_need(obj, "f", path), f"{path}.f", source.n, target.n)
    fhat = matrix_from_json(_need(obj, "fhat", path), f"{path}.fhat", source.n, (target.m, source.m))
    return ChartMorphism(source, target, f, fhat)


def morphism_to_json(f: ChartMorphism) -> dict:
    return {"source": chart_to_json(f.source), "target": chart_to_json(f.target), **_map_data(f)}


def morphism_from_json(obj, path: str = "$") -> ChartMorphism:
    src = chart_from_json(_need(obj, "source", path), f"{path}.source")
    tgt = chart_from_json(_need(obj, "target", path), f"{path}.target")
    return _map_from(obj, src, tgt, path)


def homotopy_to_json(h: Homotopy) -> dict:
    return {"source": chart_to_json(h.source), "target": chart_to_json(h.target),
            "f0": _map_data(h.f0), "f1": _map_data(h.f1), "lam": matrix_to_json(h.lam)}


def homotopy_from_json(obj, path: str = "$") -> Homotopy:
    src = chart_from_json(_need(obj, "source", path), f"{path}.source")
    tgt = chart_from_json(_need(obj, "target", path), f"{path}.target")
    f0 = _map_from(_need(obj, "f0", path), src, tgt, f"{path}.f0")
    f1 = _map_from(_need(obj, "f1", path), src, tgt, f"{path}.f1")
    lam = matrix_from_json(_need(obj, "lam", path), f"{path}.lam", src.n, (tgt.n, src.m))
    return Homotopy(lam, f0, f1)


# atlases

def atlas_to_json(a: Atlas) -> dict:
    out: dict = {"name": a.name, "vdim": a.vdim, "charts": []}
    for label, c in a.charts.items():
        out["charts"].append({"id": label_to_json(label), **chart_to_json(c)})
    out["pairs"] = []
    for pid, o in a.overlaps2.items():
        rec = {"id": label_to_json(pid), "i": label_to_json(o.i), "j": label_to_json(o.j),
               **_map_data(a.transitions[pid])}
        if o.witnesses is not None:
            rec["witnesses"] = [point_to_json(w) for w in o.witnesses]
        out["pairs"].append(rec)
    out["triples"] = [{"id": label_to_json(tid), "ij": label_to_json(t.ij), "jk": label_to_json(t.jk),
                       "ik": label_to_json(t.ik), "lam": matrix_to_json(a.cocycles[tid])}
                      for tid, t in a.overlaps3.items()]
    out["quads"] = [{"id": label_to_json(qid), "ijk": label_to_json(q.ijk), "ijl": label_to_json(q.ijl),
                     "ikl": label_to_json(q.ikl), "jkl": label_to_json(q.jkl)}
                    for qid, q in a.overlaps4.items()]
    return out


def _ref(obj, key: str, table: Mapping, path: str, what: str):
    label = label_from_json(_need(obj, key, path), f"{path}.{key}")
    if label not in table:
        raise ParseError(f"unknown {what} {label!r}", f"{path}.{key}")
    return label


def atlas_from_json(obj, path: str = "$", name: str | None = None) -> Atlas:
    """Explicit overlap tables (``pairs``/``triples``/``quads``) or the short form
    with ``transitions``/``cocycles`` and generated overlaps."""
    vdim = _need(obj, "vdim", path, int)
    name = str(obj.get("name", name or "atlas"))
    charts = {}
    for k, c in enumerate(_need(obj, "charts", path, list)):
        cp = f"{path}.charts[{k}]"
        label = label_from_json(_need(c, "id", cp), f"{cp}.id")
        if label in charts:
            raise ParseError(f"duplicate chart id {label!r}", f"{cp}.id")
        charts[label] = chart_from_json(c, cp)
    try:
        if "pairs" not in obj:
            return _short_atlas(obj, vdim, charts, name, path)
        pairs, trans = {}, {}
        for k, p in enumerate(_need(obj, "pairs", path, list)):
            pp = f"{path}.pairs[{k}]"
            pid = label_from_json(_need(p, "id", pp), f"{pp}.id")
            i, j = _ref(p, "i", charts, pp, "chart"), _ref(p, "j", charts, pp, "chart")
            wits = p.get("witnesses")
            if wits is not None:
                wits = tuple(_point(w, charts[i].n, f"{pp}.witnesses[{q}]") for q, w in enumerate(wits))
            pairs[pid] = Overlap2(pid, i, j, wits)
            trans[pid] = _map_from(p, charts[i], charts[j], pp)
        triples, cocy = {}, {}
        for k, t in enumerate(obj.get("triples", [])):
            tp = f"{path}.triples[{k}]"
            tid = label_from_json(_need(t, "id", tp), f"{tp}.id")
            refs = [_ref(t, key, pairs, tp, "pair") for key in ("ij", "jk", "ik")]
            triples[tid] = Overlap3(tid, *refs)
            ci, ck = charts[pairs[refs[0]].i], charts[pairs[refs[1]].j]
            cocy[tid] = matrix_from_json(_need(t, "lam", tp), f"{tp}.lam", ci.n, (ck.n, ci.m))
        quads = {}
        for k, q in enumerate(obj.get("quads", [])):
            qp = f"{path}.quads[{k}]"
            qid = label_from_json(_need(q, "id", qp), f"{qp}.id")
            quads[qid] = Overlap4(qid, *[_ref(q, key, triples, qp, "triple") for key in ("ijk", "ijl", "ikl", "jkl")])
        return Atlas(vdim, charts, pairs, triples, quads, trans, cocy, name=name)
    except ParseError:
        raise
    except KuranishiError as exc:
        raise ParseError(str(exc), path) from None


def _short_atlas(obj, vdim: int, charts: dict, name: str, path: str) -> Atlas:
    trans = {}
    for k, t in enumerate(obj.get("transitions", [])):
        tp = f"{path}.transitions[{k}]"
        i, j = _ref(t, "i", charts, tp, "chart"), _ref(t, "j", charts, tp, "chart")
        trans[(i, j)] = _map_from(t, charts[i], charts[j], tp)
    cocy = {}
    for k, c in enumerate(obj.get("cocycles", [])):
        cp = f"{path}.cocycles[{k}]"
        i, j, l = (_ref(c, key, charts, cp, "chart") for key in ("i", "j", "k"))
        cocy[(i, j, l)] = matrix_from_json(_need(c, "lam", cp), f"{cp}.lam", charts[i].n, (charts[l].n, charts[i].m))
    return build_atlas(vdim, charts, trans, cocy, name=name, quads=bool(obj.get("quads", True)))


# strict morphisms and 2-morphisms

def strict_to_json(h: StrictMorphism) -> dict:
    return {
        "source": h.source.name, "target": h.target.name,
        "locals": [{"chart": label_to_json(i), "to": label_to_json(h.tau[i]), **_map_data(h.locals[i])}
                   for i in h.source.charts],
        "deltas": [{"pair": label_to_json(pid), "target_pair": label_to_json(h.delta_targets[pid]),
                    "delta": matrix_to_json(d)} for pid, d in h.deltas.items()],
    }


def strict_from_json(obj, atlases: Mapping, path: str = "$", name: str = "h") -> StrictMorphism:
    x = atlases[_ref(obj, "source", atlases, path, "atlas")]
    y = atlases[_ref(obj, "target", atlases, path, "atlas")]
    tau, locals_ = {}, {}
    for k, rec in enumerate(_need(obj, "locals", path, list)):
        lp = f"{path}.locals[{k}]"
        i = _ref(rec, "chart", x.charts, lp, "source chart")
        p = _ref(rec, "to", y.charts, lp, "target chart")
        tau[i] = p
        locals_[i] = _map_from(rec, x.charts[i], y.charts[p], lp)
    deltas, targets = {}, {}
    for k, rec in enumerate(_need(obj, "deltas", path, list)):
        dp = f"{path}.deltas[{k}]"
        pid = _ref(rec, "pair", x.overlaps2, dp, "source pair")
        if "target_pair" in rec:
            targets[pid] = _ref(rec, "target_pair", y.overlaps2, dp, "target pair")
        i, j = x.pair_charts(pid)
        ci = x.charts[i]
        if j not in tau:
            raise ParseError(f"pair references chart {j!r} without a local morphism", dp)
        deltas[pid] = matrix_from_json(_need(rec, "delta", dp), f"{dp}.delta", ci.n, (y.charts[tau[j]].n, ci.m))
    try:
        return StrictMorphism(x, y, tau, locals_, deltas, targets, name=name)
    except KuranishiError as exc:
        raise ParseError(str(exc), path) from None


def two_morphism_to_json(u: TwoMorphism, source: str, target: str) -> dict:
    return {"source": source, "target": target,
            "upsilons": [{"chart": label_to_json(i), "pair": label_to_json(u.pair_refs[i]),
                          "upsilon": matrix_to_json(m)} for i, m in u.upsilons.items()]}


def two_morphism_from_json(obj, morphisms: Mapping, path: str = "$", name: str = "u") -> TwoMorphism:
    h1 = morphisms[_ref(obj, "source", morphisms, path, "morphism")]
    h2 = morphisms[_ref(obj, "target", morphisms, path, "morphism")]
    x, y = h1.source, h1.target
    ups, refs = {}, {}
    for k, rec in enumerate(_need(obj, "upsilons", path, list)):
        up = f"{path}.upsilons[{k}]"
        i = _ref(rec, "chart", x.charts, up, "source chart")
        if "pair" in rec:
            refs[i] = _ref(rec, "pair", y.overlaps2, up, "target pair")
        c = x.charts[i]
        if i not in h2.tau:
            raise ParseError(f"chart {i!r} is not in the target morphism's domain", up)
        ups[i] = matrix_from_json(_need(rec, "upsilon", up), f"{up}.upsilon", c.n, (y.charts[h2.tau[i]].n, c.m))
    try:
        return TwoMorphism(h1, h2, ups, refs, name=name)
    except KuranishiError as exc:
        raise ParseError(str(exc), path) from None


# documents

@dataclass
class Document:
    atlases: dict = field(default_factory=dict)
    morphisms: dict = field(default_factory=dict)
    two_morphisms: dict = field(default_factory=dict)
    roofs: dict = field(default_factory=dict)
    roof_homotopies: dict = field(default_factory=dict)
    charts: dict = field(default_factory=dict)
    chart_morphisms: dict = field(default_factory=dict)
    homotopies: dict = field(default_factory=dict)
    fiber: dict | None = None
    raw: dict = field(default_factory=dict)


def _named(obj, key: str) -> dict:
    value = obj.get(key, {})
    if not isinstance(value, dict):
        raise ParseError("expected an object keyed by name", f"$.{key}")
    return value


def _single_or_named(obj, single: str, plural: str) -> dict:
    out = dict(_named(obj, plural))
    if single in obj:
        out[single] = obj[single]
    return out


def document_from_json(obj: Any) -> Document:
    if not isinstance(obj, dict):
        raise ParseError("top level must be an object")
    doc = Document(raw=obj)
    for nm, c in _single_or_named(obj, "chart", "charts").items():
        doc.charts[nm] = chart_from_json(c, f"$.charts.{nm}")
    for nm, m in _single_or_named(obj, "morphism", "chart_morphisms").items():
        try:
            doc.chart_morphisms[nm] = morphism_from_json(m, f"$.{nm}")
        except ParseError:
            raise
        except KuranishiError as exc:
            raise ParseError(str(exc), f"$.{nm}") from None
    for nm, h in _single_or_named(obj, "homotopy", "homotopies").items():
        try:
            doc.homotopies[nm] = homotopy_from_json(h, f"$.{nm}")
        except ParseError:
            raise
        except KuranishiError as exc:
            raise ParseError(str(exc), f"$.{nm}") from None
    for nm, a in _single_or_named(obj, "atlas", "atlases").items():
        doc.atlases[nm] = atlas_from_json(a, f"$.atlases.{nm}", name=nm)
    for nm, m in _named(obj, "morphisms").items():
        doc.morphisms[nm] = strict_from_json(m, doc.atlases, f"$.morphisms.{nm}", name=nm)
    for nm, u in _named(obj, "2morphisms").items():
        doc.two_morphisms[nm] = two_morphism_from_json(u, doc.morphisms, f"$.2morphisms.{nm}", name=nm)
    for nm, r in _named(obj, "roofs").items():
        rp = f"$.roofs.{nm}"
        leg = doc.morphisms[_ref(r, "r", doc.morphisms, rp, "morphism")]
        h = doc.morphisms[_ref(r, "h", doc.morphisms, rp, "morphism")]
        try:
            doc.roofs[nm] = Roof(leg, h, name=nm)
        except KuranishiError as exc:
            raise ParseError(str(exc), rp) from None
    for nm, x in _named(obj, "roof_homotopies").items():
        xp = f"$.roof_homotopies.{nm}"
        parts = [doc.roofs[_ref(x, k, doc.roofs, xp, "roof")] for k in ("left", "right")]
        parts += [doc.morphisms[_ref(x, k, doc.morphisms, xp, "morphism")] for k in ("leg1", "leg2")]
        cell = doc.two_morphisms[_ref(x, "cell", doc.two_morphisms, xp, "2-morphism")]
        try:
            doc.roof_homotopies[nm] = RoofHomotopy(*parts, cell, name=nm)
        except KuranishiError as exc:
            raise ParseError(str(exc), xp) from None
    if "fiber" in obj:
        doc.fiber = _fiber_request(obj["fiber"], doc)
    return doc


def _fiber_request(obj, doc: Document) -> dict:
    path = "$.fiber"
    out = {"x": doc.atlases[_ref(obj, "x", doc.atlases, path, "atlas")],
           "y": doc.atlases[_ref(obj, "y", doc.atlases, path, "atlas")],
           "h": doc.morphisms[_ref(obj, "h", doc.morphisms, path, "morphism")],
           "g": doc.morphisms[_ref(obj, "g", doc.morphisms, path, "morphism")],
           "witness_pairs": None}
    if "witness_pairs" in obj:
        pairs: dict = {}
        for k, rec in enumerate(_need(obj, "witness_pairs", path, list)):
            wp = f"{path}.witness_pairs[{k}]"
            i = _ref(rec, "x_chart", out["x"].charts, wp, "chart")
            p = _ref(rec, "y_chart", out["y"].charts, wp, "chart")
            a = _point(_need(rec, "x_point", wp), out["x"].charts[i].n, f"{wp}.x_point")
            b = _point(_need(rec, "y_point", wp), out["y"].charts[p].n, f"{wp}.y_point")
            pairs.setdefault((i, p), []).append((a, b))
        out["witness_pairs"] = pairs
    return out


def load_document(path: str | Path) -> Document:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read file: {exc.strerror}", str(path)) from None
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, f"line {exc.lineno} column {exc.colno}") from None
    return document_from_json(obj)


def dumps(obj: Any) -> str:
    return json.dumps(obj, indent=2, sort_keys=False)
