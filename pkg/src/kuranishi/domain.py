"""Domain descriptors: closed rational boxes plus symbolic preimage constraints.

Domains are metadata only. Polynomial checks never consult them; they filter
witness points and detect restrictions that are visibly empty.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from gmpy2 import mpq

from .errors import DimensionError
from .poly import PolyMap, rational_str, to_rational

Bound = "mpq | None"


@dataclass(frozen=True)
class Box:
    """Product of closed intervals; ``None`` marks an unbounded side."""

    intervals: tuple[tuple, ...]

    def __post_init__(self):
        ivs = []
        for lo, hi in self.intervals:
            lo = None if lo is None else to_rational(lo)
            hi = None if hi is None else to_rational(hi)
            ivs.append((lo, hi))
        object.__setattr__(self, "intervals", tuple(ivs))

    @classmethod
    def full(cls, dim: int) -> Box:
        return cls(((None, None),) * dim)

    @property
    def dim(self) -> int:
        return len(self.intervals)

    def is_full(self) -> bool:
        return all(lo is None and hi is None for lo, hi in self.intervals)

    def is_empty(self) -> bool:
        return any(lo is not None and hi is not None and lo > hi for lo, hi in self.intervals)

    def contains(self, point: Sequence) -> bool:
        if len(point) != self.dim:
            raise DimensionError("point and box dimensions differ")
        for v, (lo, hi) in zip(point, self.intervals):
            if lo is not None and v < lo:
                return False
            if hi is not None and v > hi:
                return False
        return True

    def intersect(self, other: Box) -> Box:
        if self.dim != other.dim:
            raise DimensionError("box dimensions differ")
        out = []
        for (a, b), (c, d) in zip(self.intervals, other.intervals):
            lo = a if c is None else c if a is None else max(a, c)
            hi = b if d is None else d if b is None else min(b, d)
            out.append((lo, hi))
        return Box(tuple(out))

    def to_json(self) -> list:
        return [[None if lo is None else rational_str(lo), None if hi is None else rational_str(hi)]
                for lo, hi in self.intervals]


@dataclass(frozen=True)
class Domain:
    """Points x with x in ``box`` and ``g(x)`` in ``B`` for each (g, B) in ``preimages``."""

    dim: int
    box: Box | None = None
    preimages: tuple[tuple[PolyMap, Box], ...] = ()

    def __post_init__(self):
        box = self.box if self.box is not None else Box.full(self.dim)
        if box.dim != self.dim:
            raise DimensionError("box dimension differs from domain dimension")
        object.__setattr__(self, "box", box)
        for g, b in self.preimages:
            if g.domain_dim != self.dim or g.codomain_dim != b.dim:
                raise DimensionError("preimage constraint has the wrong shape")

    @classmethod
    def full(cls, dim: int) -> Domain:
        return cls(dim)

    def is_full(self) -> bool:
        return self.box.is_full() and not self.preimages

    def is_empty(self) -> bool:
        # only boxes are decided; preimage constraints are taken as satisfiable
        return self.box.is_empty() or any(b.is_empty() for _, b in self.preimages)

    def contains(self, point: Sequence) -> bool:
        if not self.box.contains(point):
            return False
        return all(b.contains(g(point)) for g, b in self.preimages)

    def intersect(self, other: Domain) -> Domain:
        if self.dim != other.dim:
            raise DimensionError("domain dimensions differ")
        extra = tuple(c for c in other.preimages if c not in self.preimages)
        return Domain(self.dim, self.box.intersect(other.box), self.preimages + extra)

    def pullback(self, f: PolyMap) -> Domain:
        """Domain on the source of ``f`` consisting of points mapped into ``self``."""
        if f.codomain_dim != self.dim:
            raise DimensionError("map does not land in the domain's space")
        if self.is_full():
            return Domain.full(f.domain_dim)
        if f == PolyMap.identity(self.dim):
            return self
        cons = []
        if not self.box.is_full():
            cons.append((f, self.box))
        cons.extend((g.compose(f), b) for g, b in self.preimages)
        return Domain(f.domain_dim, None, tuple(cons))

    def product(self, other: Domain) -> Domain:
        """``self x other`` in the concatenated coordinates."""
        n = self.dim + other.dim
        left, right = tuple(range(self.dim)), tuple(range(self.dim, n))
        cons = tuple((g.embed(n, left), b) for g, b in self.preimages)
        cons += tuple((g.embed(n, right), b) for g, b in other.preimages)
        return Domain(n, Box(self.box.intervals + other.box.intervals), cons)

    def to_json(self) -> dict:
        out: dict = {"box": self.box.to_json()}
        if self.preimages:
            from .serialize import polymap_to_json
            out["preimages"] = [{"map": polymap_to_json(g), "box": b.to_json()} for g, b in self.preimages]
        return out


def as_point(values: Sequence) -> tuple[mpq, ...]:
    return tuple(to_rational(v) for v in values)
