"""Ideals, reduced Gröbner bases and membership tests.

Buchberger's algorithm with the coprime and chain criteria, normal-strategy
pair selection and a final interreduction. Radical membership uses the
Rabinowitsch trick after a few cheap power tests.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

from .errors import DimensionError, InvalidWitnessError
from .poly import Poly, PolyMap, PolyMatrix, to_rational

ORDERS = ("grevlex", "lex")
# how many powers f^k are tried before falling back to Rabinowitsch
POWER_TRIES = 4


def _grevlex(e: tuple) -> tuple:
    return (sum(e), tuple(-k for k in reversed(e)))


def _lex(e: tuple) -> tuple:
    return e


def order_key(order: str) -> Callable[[tuple], tuple]:
    if order == "grevlex":
        return _grevlex
    if order == "lex":
        return _lex
    raise ValueError(f"unknown monomial order {order!r}")


@dataclass(frozen=True)
class Ideal:
    nvars: int
    generators: tuple[Poly, ...] = ()

    def __post_init__(self):
        gens = tuple(g for g in self.generators if not g.is_zero())
        for g in gens:
            if g.nvars != self.nvars:
                raise DimensionError("generator variable count differs from the ideal's")
        object.__setattr__(self, "generators", gens)

    @classmethod
    def of(cls, polys: Sequence[Poly] | PolyMap, nvars: int | None = None) -> Ideal:
        polys = list(polys)
        if nvars is None:
            if not polys:
                raise DimensionError("cannot infer variable count of an empty generator list")
            nvars = polys[0].nvars
        return cls(nvars, tuple(polys))

    def basis(self, order: str = "grevlex") -> tuple[Poly, ...]:
        return groebner_basis(self, order).generators

    def square(self) -> Ideal:
        gens = self.generators
        return Ideal(self.nvars, tuple(gens[a] * gens[b] for a in range(len(gens)) for b in range(a, len(gens))))

    def __contains__(self, f: Poly) -> bool:
        return ideal_membership(f, self)


# internal polynomial form: (terms dict, leading exponent, leading coefficient)

def _lead(terms: dict, key) -> tuple:
    return max(terms, key=key)


def _divides(a: tuple, b: tuple) -> bool:
    return all(x <= y for x, y in zip(a, b))


def _lcm(a: tuple, b: tuple) -> tuple:
    return tuple(max(x, y) for x, y in zip(a, b))


def _monic(terms: dict, key) -> dict:
    lc = terms[_lead(terms, key)]
    if lc == 1:
        return terms
    inv = 1 / lc
    return {e: c * inv for e, c in terms.items()}


def _reduce(terms: dict, basis: list, key, full: bool = True) -> dict:
    """Normal form of ``terms`` against ``basis`` (list of (lm, terms) monic)."""
    p = dict(terms)
    rem = {}
    while p:
        lm = _lead(p, key)
        lc = p[lm]
        for gm, gt in basis:
            if _divides(gm, lm):
                q = tuple(a - b for a, b in zip(lm, gm))
                for e, c in gt.items():
                    e2 = tuple(a + b for a, b in zip(q, e))
                    v = p.get(e2)
                    nv = -lc * c if v is None else v - lc * c
                    if nv:
                        p[e2] = nv
                    else:
                        del p[e2]
                break
        else:
            if not full:
                rem.update(p)
                return rem
            rem[lm] = lc
            del p[lm]
    return rem


def _spoly(f: tuple, g: tuple) -> dict:
    fm, ft = f
    gm, gt = g
    m = _lcm(fm, gm)
    qf = tuple(a - b for a, b in zip(m, fm))
    qg = tuple(a - b for a, b in zip(m, gm))
    out = {}
    for e, c in ft.items():
        e2 = tuple(a + b for a, b in zip(qf, e))
        out[e2] = c
    for e, c in gt.items():
        e2 = tuple(a + b for a, b in zip(qg, e))
        v = out.get(e2)
        nv = -c if v is None else v - c
        if nv:
            out[e2] = nv
        else:
            out.pop(e2, None)
    return out


def _buchberger(gens: list[dict], nvars: int, key) -> list[tuple]:
    basis: list[tuple] = []
    for t in gens:
        t = _reduce(t, basis, key)
        if t:
            t = _monic(t, key)
            basis.append((_lead(t, key), t))
    if any(not any(lm) for lm, _ in basis):
        return [((0,) * nvars, {(0,) * nvars: to_rational(1)})]
    pairs = {(a, b) for a in range(len(basis)) for b in range(a)}
    while pairs:
        a, b = min(pairs, key=lambda ab: (key(_lcm(basis[ab[0]][0], basis[ab[1]][0])), ab))
        pairs.discard((a, b))
        am, bm = basis[a][0], basis[b][0]
        lcm = _lcm(am, bm)
        # coprime leading monomials: the S-polynomial reduces to zero
        if all(x == 0 or y == 0 for x, y in zip(am, bm)):
            continue
        # chain criterion
        if any(c != a and c != b and _divides(basis[c][0], lcm)
               and (max(a, c), min(a, c)) not in pairs and (max(b, c), min(b, c)) not in pairs
               for c in range(len(basis))):
            continue
        r = _reduce(_spoly(basis[a], basis[b]), basis, key)
        if not r:
            continue
        r = _monic(r, key)
        lm = _lead(r, key)
        if not any(lm):
            return [((0,) * nvars, {(0,) * nvars: to_rational(1)})]
        idx = len(basis)
        basis.append((lm, r))
        pairs.update((idx, c) for c in range(idx))
    # minimalize then interreduce
    minimal = [g for i, g in enumerate(basis)
               if not any(_divides(h[0], g[0]) and (h[0] != g[0] or j < i)
                          for j, h in enumerate(basis) if j != i)]
    reduced = []
    for i, (lm, t) in enumerate(minimal):
        others = [g for j, g in enumerate(minimal) if j != i]
        rest = {e: c for e, c in t.items() if e != lm}
        rest = _reduce(rest, others, key)
        rest[lm] = t[lm]
        reduced.append((lm, rest))
    reduced.sort(key=lambda g: key(g[0]), reverse=True)
    return reduced


@lru_cache(maxsize=4096)
def _cached_basis(nvars: int, gens: tuple[Poly, ...], order: str) -> tuple[Poly, ...]:
    key = order_key(order)
    basis = _buchberger([dict(g.terms) for g in gens], nvars, key)
    return tuple(Poly._raw(nvars, t) for _, t in basis)


def groebner_basis(ideal: Ideal, order: str = "grevlex") -> Ideal:
    """Reduced Gröbner basis (monic, sorted by decreasing leading monomial)."""
    order_key(order)
    return Ideal(ideal.nvars, _cached_basis(ideal.nvars, ideal.generators, order))


def normal_form(f: Poly, ideal: Ideal, order: str = "grevlex") -> Poly:
    if f.nvars != ideal.nvars:
        raise DimensionError("polynomial and ideal live in different rings")
    key = order_key(order)
    basis = [(_lead(g.terms, key), g.terms) for g in ideal.basis(order)]
    return Poly._raw(f.nvars, _reduce(f.terms, basis, key))


def ideal_membership(f: Poly, ideal: Ideal, order: str = "grevlex") -> bool:
    return f.is_zero() or normal_form(f, ideal, order).is_zero()


def radical_membership(f: Poly, ideal: Ideal, order: str = "grevlex") -> bool:
    """Decide f in rad(I) over the rationals.

    Fast path: some power f^k (k <= POWER_TRIES) reduces to zero. Otherwise
    test 1 in I + <1 - t f> with one extra variable t.
    """
    if f.nvars != ideal.nvars:
        raise DimensionError("polynomial and ideal live in different rings")
    if f.is_zero():
        return True
    basis = ideal.basis(order)
    if not basis:
        return False
    if len(basis) == 1 and basis[0].is_constant():
        return True
    r = normal_form(f, ideal, order)
    power = r
    for _ in range(POWER_TRIES):
        if power.is_zero():
            return True
        power = normal_form(power * r, ideal, order)
    if power.is_zero():
        return True
    return _rabinowitsch(f, ideal, order)


def _rabinowitsch(f: Poly, ideal: Ideal, order: str) -> bool:
    n = ideal.nvars
    positions = list(range(n))
    gens = [g.embed(n + 1, positions) for g in ideal.generators]
    t = Poly.var(n + 1, n)
    gens.append(Poly.one(n + 1) - t * f.embed(n + 1, positions))
    basis = groebner_basis(Ideal(n + 1, tuple(gens)), order).generators
    return len(basis) == 1 and basis[0].is_constant()


@dataclass(frozen=True)
class LocusDefect:
    """An entry that does not vanish on the zero locus."""

    row: int
    col: int
    entry: Poly
    point: tuple | None  # a witness where the entry is nonzero, if any


def check_witnesses(s: PolyMap, witnesses: Sequence[Sequence]) -> None:
    for w in witnesses:
        if len(w) != s.domain_dim:
            raise InvalidWitnessError(f"witness {tuple(map(str, w))} has wrong length")
        if any(v != 0 for v in s(w)):
            raise InvalidWitnessError(f"witness {tuple(map(str, w))} is not a zero of the section")


def locus_defects(m: PolyMatrix, s: PolyMap, witnesses: Sequence[Sequence] = (),
                  order: str = "grevlex") -> list[LocusDefect]:
    """Entries of ``m`` that fail radical membership in <s>.

    Witnesses are validated first; an entry accepted by the radical test but
    nonzero at a witness indicates an internal bug and raises AssertionError.
    """
    if m.nvars != s.domain_dim:
        raise DimensionError("matrix and section live in different variables")
    check_witnesses(s, witnesses)
    ideal = Ideal(s.domain_dim, s.components)
    points = [tuple(to_rational(v) for v in w) for w in witnesses]
    defects = []
    for i, j, p in m.entries():
        if p.is_zero():
            continue
        if radical_membership(p, ideal, order):
            for w in points:
                if p.evaluate(w) != 0:
                    raise AssertionError(f"radical test accepted {p} but it is nonzero at {w}")
            continue
        bad = next((w for w in points if p.evaluate(w) != 0), None)
        defects.append(LocusDefect(i, j, p, bad))
    return defects


def vanishes_on_locus(m: PolyMatrix, s: PolyMap, witnesses: Sequence[Sequence] = (),
                      order: str = "grevlex") -> bool:
    return not locus_defects(m, s, witnesses, order)
