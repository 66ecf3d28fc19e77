"""Itemized verification reports."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

from .groebner import LocusDefect
from .poly import Poly, PolyMap, PolyMatrix, rational_str

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


@dataclass
class CheckItem:
    check: str          # which axiom, e.g. "homotopy.lower-triangle"
    subject: str        # which record, e.g. "cocycle (a, b, c)"
    status: str
    detail: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status != FAIL

    def to_json(self) -> dict:
        out = {"check": self.check, "subject": self.subject, "status": self.status}
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class VerificationReport:
    kind: str
    artifact: str = ""
    items: list[CheckItem] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    elapsed: float | None = None

    @property
    def status(self) -> str:
        return FAIL if any(i.status == FAIL for i in self.items) else PASS

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def __bool__(self) -> bool:
        return self.passed

    def failures(self) -> list[CheckItem]:
        return [i for i in self.items if i.status == FAIL]

    def add(self, item: CheckItem) -> None:
        self.items.append(item)

    def extend(self, items: Iterable[CheckItem]) -> None:
        self.items.extend(items)

    def counts(self) -> dict:
        out = {PASS: 0, FAIL: 0, SKIPPED: 0}
        for i in self.items:
            out[i.status] += 1
        return out

    def to_json(self, timing: bool = False) -> dict:
        out = {"kind": self.kind, "artifact": self.artifact, "status": self.status,
               "counts": self.counts(), "items": [i.to_json() for i in self.items]}
        if self.notes:
            out["notes"] = list(self.notes)
        if timing and self.elapsed is not None:
            out["elapsed_seconds"] = round(self.elapsed, 3)
        return out

    def dumps(self, timing: bool = False) -> str:
        return json.dumps(self.to_json(timing), indent=2, sort_keys=True)

    def render_text(self, verbose: bool = False) -> str:
        c = self.counts()
        head = f"{self.kind} {self.artifact}".strip()
        lines = [f"{head}: {self.status.upper()} ({c[PASS]} pass, {c[FAIL]} fail, {c[SKIPPED]} skipped)"]
        for item in self.items:
            if verbose or item.status == FAIL:
                lines.append(f"  [{item.status}] {item.check} @ {item.subject}")
                for k, v in item.detail.items():
                    lines.append(f"      {k}: {v}")
        for note in self.notes:
            lines.append(f"  note: {note}")
        if self.elapsed is not None:
            lines.append(f"  time: {self.elapsed:.3f}s")
        return "\n".join(lines)


def point_str(point: Sequence) -> list[str]:
    return [rational_str(v) for v in point]


def find_nonzero_point(p: Poly, candidates: Sequence[Sequence] = (), radius: int = 2) -> tuple | None:
    """A rational point where ``p`` is nonzero: candidates first, then a small grid."""
    if p.is_zero():
        return None
    for w in candidates:
        if p.evaluate(w) != 0:
            return tuple(w)
    for w in product(range(-radius, radius + 1), repeat=p.nvars):
        if p.evaluate(w) != 0:
            return w
    return None


def exact_residual_items(check: str, subject: str, residual: PolyMap | PolyMatrix,
                         candidates: Sequence[Sequence] = ()) -> CheckItem:
    """PASS iff ``residual`` is identically zero; otherwise localize one bad entry."""
    entries = (
        [((k,), p) for k, p in enumerate(residual.components)]
        if isinstance(residual, PolyMap)
        else [((i, j), p) for i, j, p in residual.entries()]
    )
    for where, p in entries:
        if not p.is_zero():
            detail = {"entry": list(where), "residual": str(p)}
            pt = find_nonzero_point(p, candidates)
            if pt is not None:
                detail["point"] = point_str(pt)
                detail["value"] = rational_str(p.evaluate(pt))
            return CheckItem(check, subject, FAIL, detail)
    return CheckItem(check, subject, PASS)


def locus_item(check: str, subject: str, defects: list[LocusDefect]) -> CheckItem:
    if not defects:
        return CheckItem(check, subject, PASS)
    d = defects[0]
    detail = {"entry": [d.row, d.col], "residual": str(d.entry), "failing_entries": len(defects)}
    if d.point is not None:
        detail["point"] = point_str(d.point)
        detail["value"] = rational_str(d.entry.evaluate(d.point))
    return CheckItem(check, subject, FAIL, detail)
