"""Exact multivariate polynomials over the rationals.

A :class:`Poly` is a map from exponent tuples to nonzero ``mpq`` coefficients.
:class:`PolyMap` is a vector of polynomials in a shared variable set and
:class:`PolyMatrix` a grid of them. All three are immutable and hashable.
"""
from __future__ import annotations

from functools import reduce
from itertools import product
from math import comb, factorial
from operator import add
from typing import Iterable, Iterator, Sequence

from gmpy2 import mpq

from .errors import DimensionError

ZERO = mpq(0)
ONE = mpq(1)


def to_rational(value) -> mpq:
    """Coerce ints, Fractions, mpq and "p/q" strings to ``mpq``."""
    if isinstance(value, float):
        raise TypeError("floating point values are not accepted")
    if isinstance(value, str):
        return mpq(value.strip())
    return mpq(value)


def rational_str(value: mpq) -> str:
    value = mpq(value)
    return f"{value.numerator}/{value.denominator}"


class Poly:
    """Polynomial in ``nvars`` variables with rational coefficients."""

    __slots__ = ("nvars", "terms", "_hash")

    def __init__(self, nvars: int, terms: dict | None = None):
        if nvars < 0:
            raise DimensionError("negative variable count")
        clean = {}
        for exps, coef in (terms or {}).items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars:
                raise DimensionError(f"exponent {exps} has length != {nvars}")
            if any(e < 0 for e in exps):
                raise DimensionError(f"negative exponent in {exps}")
            coef = to_rational(coef)
            if coef:
                clean[exps] = clean.get(exps, ZERO) + coef
        self.nvars = nvars
        self.terms = {e: c for e, c in clean.items() if c}
        self._hash = None

    @classmethod
    def _raw(cls, nvars: int, terms: dict) -> Poly:
        # caller guarantees canonical terms
        p = object.__new__(cls)
        p.nvars = nvars
        p.terms = terms
        p._hash = None
        return p

    # constructors
    @classmethod
    def zero(cls, nvars: int) -> Poly:
        return cls._raw(nvars, {})

    @classmethod
    def const(cls, nvars: int, value) -> Poly:
        value = to_rational(value)
        return cls._raw(nvars, {(0,) * nvars: value} if value else {})

    @classmethod
    def one(cls, nvars: int) -> Poly:
        return cls.const(nvars, 1)

    @classmethod
    def var(cls, nvars: int, index: int, coef=1) -> Poly:
        if not 0 <= index < nvars:
            raise DimensionError(f"variable {index} out of range for {nvars}")
        exps = [0] * nvars
        exps[index] = 1
        return cls._raw(nvars, {tuple(exps): to_rational(coef)})

    @classmethod
    def monomial(cls, exps: Sequence[int], coef=1) -> Poly:
        return cls(len(exps), {tuple(exps): coef})

    # basic queries
    def is_zero(self) -> bool:
        return not self.terms

    def __bool__(self) -> bool:
        return bool(self.terms)

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and (0,) * self.nvars in self.terms)

    def constant_term(self) -> mpq:
        return self.terms.get((0,) * self.nvars, ZERO)

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        return max((sum(e) for e in self.terms), default=-1)

    def __eq__(self, other) -> bool:
        if isinstance(other, Poly):
            return self.nvars == other.nvars and self.terms == other.terms
        try:
            return self.terms == Poly.const(self.nvars, other).terms
        except (TypeError, ValueError):
            return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, frozenset(self.terms.items())))
        return self._hash

    def _check(self, other: Poly) -> None:
        if self.nvars != other.nvars:
            raise DimensionError(f"variable count mismatch: {self.nvars} vs {other.nvars}")

    def _lift(self, other) -> Poly:
        if isinstance(other, Poly):
            self._check(other)
            return other
        return Poly.const(self.nvars, other)

    # ring operations
    def __add__(self, other) -> Poly:
        other = self._lift(other)
        if not other.terms:
            return self
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e)
            if v is None:
                out[e] = c
            else:
                v = v + c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return Poly._raw(self.nvars, out)

    __radd__ = __add__

    def __neg__(self) -> Poly:
        return Poly._raw(self.nvars, {e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> Poly:
        other = self._lift(other)
        if not other.terms:
            return self
        out = dict(self.terms)
        for e, c in other.terms.items():
            v = out.get(e)
            if v is None:
                out[e] = -c
            else:
                v = v - c
                if v:
                    out[e] = v
                else:
                    del out[e]
        return Poly._raw(self.nvars, out)

    def __rsub__(self, other) -> Poly:
        return self._lift(other) - self

    def scale(self, factor) -> Poly:
        factor = to_rational(factor)
        if not factor:
            return Poly.zero(self.nvars)
        return Poly._raw(self.nvars, {e: c * factor for e, c in self.terms.items()})

    def __mul__(self, other) -> Poly:
        if not isinstance(other, Poly):
            return self.scale(other)
        self._check(other)
        a, b = self.terms, other.terms
        if not a or not b:
            return Poly.zero(self.nvars)
        if len(a) < len(b):
            a, b = b, a
        if len(b) == 1:
            (eb, cb), = b.items()
            if not any(eb):
                return Poly._raw(self.nvars, {e: c * cb for e, c in a.items()})
            return Poly._raw(self.nvars, {tuple(map(add, e, eb)): c * cb for e, c in a.items()})
        out: dict = {}
        get = out.get
        for eb, cb in b.items():
            for ea, ca in a.items():
                e = tuple(map(add, ea, eb))
                v = get(e)
                out[e] = ca * cb if v is None else v + ca * cb
        return Poly._raw(self.nvars, {e: c for e, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, k: int) -> Poly:
        if k < 0:
            raise ValueError("negative power")
        result = Poly.one(self.nvars)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    # calculus and evaluation
    def diff(self, index: int) -> Poly:
        out = {}
        for e, c in self.terms.items():
            k = e[index]
            if k:
                e2 = e[:index] + (k - 1,) + e[index + 1:]
                out[e2] = c * k
        return Poly._raw(self.nvars, out)

    def evaluate(self, point: Sequence) -> mpq:
        if len(point) != self.nvars:
            raise DimensionError(f"point of length {len(point)} for {self.nvars} variables")
        point = [to_rational(v) for v in point]
        total = ZERO
        for e, c in self.terms.items():
            t = c
            for v, k in zip(point, e):
                if k:
                    t = t * v ** k
            total += t
        return total

    def substitute(self, images: Sequence[Poly]) -> Poly:
        """Composition: replace variable ``i`` by ``images[i]``."""
        if len(images) != self.nvars:
            raise DimensionError(f"substitution needs {self.nvars} images, got {len(images)}")
        if not images:
            # constant polynomial in zero variables; target count unknown
            raise DimensionError("use substitute_into for zero-variable polynomials")
        return self.substitute_into(images, images[0].nvars)

    def substitute_into(self, images: Sequence[Poly], nvars: int) -> Poly:
        if len(images) != self.nvars:
            raise DimensionError(f"substitution needs {self.nvars} images, got {len(images)}")
        for q in images:
            if q.nvars != nvars:
                raise DimensionError("substitution images disagree on variable count")
        if not self.terms:
            return Poly.zero(nvars)
        if self.nvars == 0:
            return Poly.const(nvars, self.constant_term())
        powers: list[dict[int, Poly]] = [{0: Poly.one(nvars), 1: q} for q in images]

        def power(i: int, k: int) -> Poly:
            cache = powers[i]
            if k not in cache:
                cache[k] = power(i, k - 1) * images[i]
            return cache[k]

        # accumulate into a dict to avoid repeated Poly allocation
        out: dict = {}
        prefix: dict = {}
        for e, c in sorted(self.terms.items()):
            # reuse the product over all but the last variable
            head = e[:-1]
            mono = prefix.get(head)
            if mono is None:
                mono = Poly.one(nvars)
                for i, k in enumerate(head):
                    if k:
                        mono = mono * power(i, k)
                prefix[head] = mono
            if e[-1]:
                mono = mono * power(len(e) - 1, e[-1])
            for me, mc in mono.terms.items():
                v = out.get(me)
                out[me] = mc * c if v is None else v + mc * c
        return Poly._raw(nvars, {e: c for e, c in out.items() if c})

    def embed(self, nvars: int, positions: Sequence[int]) -> Poly:
        """Rename variable ``i`` to variable ``positions[i]`` of a larger ring."""
        if len(positions) != self.nvars:
            raise DimensionError("embedding needs one position per variable")
        out = {}
        for e, c in self.terms.items():
            new = [0] * nvars
            for p, k in zip(positions, e):
                new[p] += k
            new = tuple(new)
            out[new] = out.get(new, ZERO) + c
        return Poly._raw(nvars, {e: c for e, c in out.items() if c})

    # display
    def to_str(self, names: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        names = names or [f"x{i + 1}" for i in range(self.nvars)]
        pieces = []
        for e in sorted(self.terms, key=lambda e: (-sum(e), tuple(-k for k in e))):
            c = self.terms[e]
            mono = "*".join(n if k == 1 else f"{n}^{k}" for n, k in zip(names, e) if k)
            mag = abs(c)
            if not mono:
                body = str(mag)
            elif mag == 1:
                body = mono
            else:
                body = f"{mag}*{mono}"
            pieces.append(("- " if c < 0 else "+ ") + body)
        text = " ".join(pieces)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    def __str__(self) -> str:
        return self.to_str()

    def __repr__(self) -> str:
        return f"Poly({self.nvars}, {self.to_str()!r})"


class PolyMap:
    """A vector of polynomials ``R^domain_dim -> R^codomain_dim``."""

    __slots__ = ("domain_dim", "components", "_hash", "_jac", "_dd")

    def __init__(self, domain_dim: int, components: Iterable[Poly] = ()):
        comps = tuple(components)
        for c in comps:
            if c.nvars != domain_dim:
                raise DimensionError(f"component in {c.nvars} variables, expected {domain_dim}")
        self.domain_dim = domain_dim
        self.components = comps
        self._hash = None
        self._jac = None
        self._dd = None

    @property
    def codomain_dim(self) -> int:
        return len(self.components)

    @classmethod
    def identity(cls, n: int) -> PolyMap:
        return cls(n, [Poly.var(n, i) for i in range(n)])

    @classmethod
    def zero(cls, n: int, k: int) -> PolyMap:
        return cls(n, [Poly.zero(n)] * k)

    def __len__(self) -> int:
        return len(self.components)

    def __iter__(self) -> Iterator[Poly]:
        return iter(self.components)

    def __getitem__(self, i):
        return self.components[i]

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyMap):
            return NotImplemented
        return self.domain_dim == other.domain_dim and self.components == other.components

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.domain_dim, self.components))
        return self._hash

    def _check(self, other: PolyMap) -> None:
        if self.domain_dim != other.domain_dim or len(self) != len(other):
            raise DimensionError(
                f"map shapes differ: {self.domain_dim}->{len(self)} vs {other.domain_dim}->{len(other)}")

    def __add__(self, other: PolyMap) -> PolyMap:
        self._check(other)
        return PolyMap(self.domain_dim, [a + b for a, b in zip(self, other)])

    def __sub__(self, other: PolyMap) -> PolyMap:
        self._check(other)
        return PolyMap(self.domain_dim, [a - b for a, b in zip(self, other)])

    def __neg__(self) -> PolyMap:
        return PolyMap(self.domain_dim, [-a for a in self])

    def scale(self, factor) -> PolyMap:
        return PolyMap(self.domain_dim, [a.scale(factor) for a in self])

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def __call__(self, point: Sequence) -> tuple:
        return tuple(c.evaluate(point) for c in self.components)

    def compose(self, inner: PolyMap) -> PolyMap:
        """``self ∘ inner``."""
        if inner.codomain_dim != self.domain_dim:
            raise DimensionError(
                f"cannot compose: inner lands in R^{inner.codomain_dim}, outer needs R^{self.domain_dim}")
        images = inner.components
        return PolyMap(inner.domain_dim,
                       [c.substitute_into(images, inner.domain_dim) for c in self.components])

    def embed(self, nvars: int, positions: Sequence[int]) -> PolyMap:
        return PolyMap(nvars, [c.embed(nvars, positions) for c in self.components])

    def concat(self, other: PolyMap) -> PolyMap:
        if self.domain_dim != other.domain_dim:
            raise DimensionError("concatenated maps need a common domain")
        return PolyMap(self.domain_dim, self.components + other.components)

    def as_column(self) -> PolyMatrix:
        return PolyMatrix(self.domain_dim, [[c] for c in self.components], ncols=1)

    def jacobian(self) -> PolyMatrix:
        if self._jac is None:
            self._jac = jacobian(self)
        return self._jac

    def divided_difference(self) -> PolyMatrix:
        if self._dd is None:
            self._dd = divided_difference(self)
        return self._dd

    def degree(self) -> int:
        return max((c.degree() for c in self.components), default=-1)

    def __repr__(self) -> str:
        return f"PolyMap({self.domain_dim}, [{', '.join(map(str, self.components))}])"


class PolyMatrix:
    """An ``nrows x ncols`` matrix of polynomials in ``nvars`` variables."""

    __slots__ = ("nvars", "nrows", "ncols", "rows", "_hash")

    def __init__(self, nvars: int, rows: Iterable[Iterable[Poly]], ncols: int | None = None):
        rows = tuple(tuple(r) for r in rows)
        if ncols is None:
            if not rows:
                raise DimensionError("empty matrix needs an explicit column count")
            ncols = len(rows[0])
        for r in rows:
            if len(r) != ncols:
                raise DimensionError("ragged matrix rows")
            for p in r:
                if p.nvars != nvars:
                    raise DimensionError(f"entry in {p.nvars} variables, expected {nvars}")
        self.nvars = nvars
        self.nrows = len(rows)
        self.ncols = ncols
        self.rows = rows
        self._hash = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.nrows, self.ncols

    @classmethod
    def zeros(cls, nvars: int, nrows: int, ncols: int) -> PolyMatrix:
        z = Poly.zero(nvars)
        return cls(nvars, [[z] * ncols for _ in range(nrows)], ncols=ncols)

    @classmethod
    def identity(cls, nvars: int, size: int) -> PolyMatrix:
        z, o = Poly.zero(nvars), Poly.one(nvars)
        return cls(nvars, [[o if i == j else z for j in range(size)] for i in range(size)], ncols=size)

    @classmethod
    def constant(cls, nvars: int, values: Sequence[Sequence], ncols: int | None = None) -> PolyMatrix:
        return cls(nvars, [[Poly.const(nvars, v) for v in row] for row in values], ncols=ncols)

    @classmethod
    def block(cls, nvars: int, blocks: Sequence[Sequence[PolyMatrix]]) -> PolyMatrix:
        """Assemble from a grid of blocks with consistent row/column sizes."""
        out_rows: list = []
        ncols = sum(b.ncols for b in blocks[0]) if blocks else 0
        for brow in blocks:
            heights = {b.nrows for b in brow}
            if len(heights) != 1:
                raise DimensionError("block row with differing heights")
            if sum(b.ncols for b in brow) != ncols:
                raise DimensionError("block rows with differing widths")
            for r in range(heights.pop()):
                row: list = []
                for b in brow:
                    if b.nvars != nvars:
                        raise DimensionError("block in wrong variable count")
                    row.extend(b.rows[r])
                out_rows.append(row)
        return cls(nvars, out_rows, ncols=ncols)

    def __iter__(self):
        return iter(self.rows)

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def entries(self) -> Iterator[tuple[int, int, Poly]]:
        for i, row in enumerate(self.rows):
            for j, p in enumerate(row):
                yield i, j, p

    def __eq__(self, other) -> bool:
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        return self.shape == other.shape and self.nvars == other.nvars and self.rows == other.rows

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.nvars, self.shape, self.rows))
        return self._hash

    def _check(self, other: PolyMatrix) -> None:
        if self.shape != other.shape or self.nvars != other.nvars:
            raise DimensionError(f"matrix shapes differ: {self.shape} vs {other.shape}")

    def __add__(self, other: PolyMatrix) -> PolyMatrix:
        self._check(other)
        return PolyMatrix(self.nvars, [[a + b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                          ncols=self.ncols)

    def __sub__(self, other: PolyMatrix) -> PolyMatrix:
        self._check(other)
        return PolyMatrix(self.nvars, [[a - b for a, b in zip(r, s)] for r, s in zip(self.rows, other.rows)],
                          ncols=self.ncols)

    def __neg__(self) -> PolyMatrix:
        return PolyMatrix(self.nvars, [[-a for a in r] for r in self.rows], ncols=self.ncols)

    def scale(self, factor) -> PolyMatrix:
        return PolyMatrix(self.nvars, [[a.scale(factor) for a in r] for r in self.rows], ncols=self.ncols)

    def mul_poly(self, p: Poly) -> PolyMatrix:
        return PolyMatrix(self.nvars, [[a * p for a in r] for r in self.rows], ncols=self.ncols)

    def __matmul__(self, other):
        if isinstance(other, PolyMap):
            if other.codomain_dim != self.ncols or other.domain_dim != self.nvars:
                raise DimensionError("matrix-vector shape mismatch")
            return PolyMap(self.nvars, [_dot(r, other.components, self.nvars) for r in self.rows])
        if not isinstance(other, PolyMatrix):
            return NotImplemented
        if self.ncols != other.nrows or self.nvars != other.nvars:
            raise DimensionError(f"cannot multiply {self.shape} by {other.shape}")
        cols = list(zip(*other.rows)) if other.nrows else [()] * other.ncols
        return PolyMatrix(self.nvars, [[_dot(r, c, self.nvars) for c in cols] for r in self.rows],
                          ncols=other.ncols)

    def transpose(self) -> PolyMatrix:
        return PolyMatrix(self.nvars, [[r[j] for r in self.rows] for j in range(self.ncols)], ncols=self.nrows)

    def substitute(self, inner: PolyMap) -> PolyMatrix:
        """Evaluate every entry along ``inner`` (precomposition)."""
        if inner.codomain_dim != self.nvars:
            raise DimensionError("substitution map does not land in the matrix variables")
        images = inner.components
        n = inner.domain_dim
        return PolyMatrix(n, [[p.substitute_into(images, n) for p in r] for r in self.rows], ncols=self.ncols)

    def embed(self, nvars: int, positions: Sequence[int]) -> PolyMatrix:
        return PolyMatrix(nvars, [[p.embed(nvars, positions) for p in r] for r in self.rows], ncols=self.ncols)

    def is_zero(self) -> bool:
        return all(not p for r in self.rows for p in r)

    def evaluate(self, point: Sequence) -> tuple:
        return tuple(tuple(p.evaluate(point) for p in r) for r in self.rows)

    def column(self, j: int) -> PolyMap:
        return PolyMap(self.nvars, [r[j] for r in self.rows])

    def degree(self) -> int:
        return max((p.degree() for r in self.rows for p in r), default=-1)

    def __repr__(self) -> str:
        body = "; ".join(", ".join(map(str, r)) for r in self.rows)
        return f"PolyMatrix({self.nrows}x{self.ncols}, [{body}])"


def _dot(row: Sequence[Poly], col: Sequence[Poly], nvars: int) -> Poly:
    acc = None
    for a, b in zip(row, col):
        if a.terms and b.terms:
            t = a * b
            acc = t if acc is None else acc + t
    return acc if acc is not None else Poly.zero(nvars)


def jacobian(m: PolyMap) -> PolyMatrix:
    """Matrix of partial derivatives, ``codomain_dim x domain_dim``."""
    n = m.domain_dim
    return PolyMatrix(n, [[c.diff(j) for j in range(n)] for c in m.components], ncols=n)


def _segment_integral(exps: tuple) -> dict:
    """Expand the integral over t in [0,1] of prod_i (t x_i + (1-t) y_i)^{e_i}.

    Returns a term dict in the doubled variables (x..., y...).
    """
    total = sum(exps)
    out = {}
    for ks in product(*(range(e + 1) for e in exps)):
        k = sum(ks)
        coef = reduce(lambda acc, pair: acc * comb(pair[0], pair[1]), zip(exps, ks), 1)
        # Beta integral of t^k (1-t)^(total-k)
        weight = mpq(coef * factorial(k) * factorial(total - k), factorial(total + 1))
        key = tuple(ks) + tuple(e - kk for e, kk in zip(exps, ks))
        out[key] = out.get(key, ZERO) + weight
    return out


def divided_difference(h: PolyMap) -> PolyMatrix:
    """Canonical divided difference in the doubled variables (x..., y...).

    Entry (i, j) is the integral over t in [0,1] of the partial derivative of
    component i in variable j, evaluated at t x + (1 - t) y.  It satisfies
    h(x) - h(y) = dd(x, y) (x - y) and dd(x, x) = dh(x).
    """
    n = h.domain_dim
    cache: dict = {}
    rows = []
    for comp in h.components:
        row = []
        for j in range(n):
            out: dict = {}
            for e, c in comp.terms.items():
                if not e[j]:
                    continue
                lowered = e[:j] + (e[j] - 1,) + e[j + 1:]
                expansion = cache.get(lowered)
                if expansion is None:
                    expansion = cache[lowered] = _segment_integral(lowered)
                factor = c * e[j]
                for key, w in expansion.items():
                    out[key] = out.get(key, ZERO) + factor * w
            row.append(Poly._raw(2 * n, {e: c for e, c in out.items() if c}))
        rows.append(row)
    return PolyMatrix(2 * n, rows, ncols=n)


def doubled_point_map(first: PolyMap, second: PolyMap) -> PolyMap:
    """The map x -> (first(x), second(x)) used to evaluate a divided difference."""
    return first.concat(second)


def identity_map(n: int) -> PolyMap:
    return PolyMap.identity(n)
