"""Sparse exact Gaussian elimination with infeasibility certificates."""
from __future__ import annotations

from dataclasses import dataclass

from gmpy2 import mpq


@dataclass
class LinearSolution:
    feasible: bool
    values: dict          # column -> value (free columns set to 0)
    certificate: dict     # row -> multiplier y with y·A = 0 and y·b != 0


def solve(rows: list[dict], rhs: list, columns: list) -> LinearSolution:
    """Solve A u = b where row ``r`` of A is the sparse dict ``rows[r]``."""
    work = []
    for r, (row, b) in enumerate(zip(rows, rhs)):
        work.append(({c: mpq(v) for c, v in row.items() if v}, mpq(b), {r: mpq(1)}))
    pivots = []  # (column, row tuple)
    remaining = work
    for col in columns:
        idx = next((k for k, w in enumerate(remaining) if col in w[0]), None)
        if idx is None:
            continue
        prow, pb, pcombo = remaining.pop(idx)
        inv = 1 / prow[col]
        prow = {c: v * inv for c, v in prow.items()}
        pb = pb * inv
        pcombo = {k: v * inv for k, v in pcombo.items()}
        new_remaining = []
        for row, b, combo in remaining:
            factor = row.get(col)
            if factor:
                row = dict(row)
                for c, v in prow.items():
                    nv = row.get(c, 0) - factor * v
                    if nv:
                        row[c] = nv
                    else:
                        row.pop(c, None)
                b = b - factor * pb
                combo = dict(combo)
                for k, v in pcombo.items():
                    nv = combo.get(k, 0) - factor * v
                    if nv:
                        combo[k] = nv
                    else:
                        combo.pop(k, None)
            new_remaining.append((row, b, combo))
        remaining = new_remaining
        pivots.append((col, prow, pb))
    for row, b, combo in remaining:
        if not row and b:
            return LinearSolution(False, {}, combo)
    values = {c: mpq(0) for c in columns}
    for col, prow, pb in reversed(pivots):
        values[col] = pb - sum((v * values[c] for c, v in prow.items() if c != col), mpq(0))
    return LinearSolution(True, values, {})
