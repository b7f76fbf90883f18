"""Exact two-phase simplex over Fractions with Bland's anti-cycling rule.

Solves ``minimize c.x`` subject to ``A_ub x <= b_ub``, ``A_eq x = b_eq`` and
``x >= 0``.  The tableau is dense; problems here have at most a few hundred
columns, and exactness matters more than speed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

OPTIMAL, INFEASIBLE, UNBOUNDED = "optimal", "infeasible", "unbounded"

_ZERO = Fraction(0)


@dataclass(frozen=True)
class LpResult:
    status: str
    x: tuple[Fraction, ...] = ()
    value: Fraction | None = None


class _Tableau:
    def __init__(self, rows: list[list[Fraction]], basis: list[int]):
        self.rows = rows
        self.basis = basis

    def pivot(self, r: int, col: int, obj: list[Fraction]) -> None:
        row = self.rows[r]
        piv = row[col]
        if piv != 1:
            row[:] = [v / piv for v in row]
        nz = [j for j, v in enumerate(row) if v]
        for other in self.rows + [obj]:
            if other is row:
                continue
            k = other[col]
            if k:
                for j in nz:
                    other[j] -= k * row[j]
        self.basis[r] = col

    def run(self, obj: list[Fraction], allowed: int) -> str:
        """Minimize with Bland's rule over the first ``allowed`` columns."""
        while True:
            col = next((j for j in range(allowed) if obj[j] < 0), None)
            if col is None:
                return OPTIMAL
            best = None
            for i, row in enumerate(self.rows):
                a = row[col]
                if a > 0:
                    key = (row[-1] / a, self.basis[i])
                    if best is None or key < best[0]:
                        best = (key, i)
            if best is None:
                return UNBOUNDED
            self.pivot(best[1], col, obj)


def _objective(tab: _Tableau, cost: list[Fraction]) -> list[Fraction]:
    """Reduced-cost row for ``cost`` given the current basis."""
    obj = list(cost) + [_ZERO]
    for i, b in enumerate(tab.basis):
        k = obj[b]
        if k:
            row = tab.rows[i]
            for j, v in enumerate(row):
                if v:
                    obj[j] -= k * v
    return obj


def linprog(c: Sequence, A_ub: Sequence[Sequence] = (), b_ub: Sequence = (),
            A_eq: Sequence[Sequence] = (), b_eq: Sequence = ()) -> LpResult:
    n = len(c)
    c = [Fraction(v) for v in c]
    n_ub = len(A_ub)
    n_slack = n_ub
    raw = []
    for i, (a, b) in enumerate(zip(A_ub, b_ub)):
        slack = [_ZERO] * n_slack
        slack[i] = Fraction(1)
        raw.append(([Fraction(v) for v in a] + slack, Fraction(b)))
    for a, b in zip(A_eq, b_eq):
        raw.append(([Fraction(v) for v in a] + [_ZERO] * n_slack, Fraction(b)))
    m = len(raw)
    width = n + n_slack
    rows = []
    for i, (a, b) in enumerate(raw):
        if len(a) != width:
            raise ValueError("constraint row has the wrong length")
        if b < 0:
            a, b = [-v for v in a], -b
        art = [_ZERO] * m
        art[i] = Fraction(1)
        rows.append(a + art + [b])
    tab = _Tableau(rows, [width + i for i in range(m)])

    # phase 1: drive the artificial variables to zero
    phase1 = _objective(tab, [_ZERO] * width + [Fraction(1)] * m)
    tab.run(phase1, width + m)
    if -phase1[-1] != 0:
        return LpResult(INFEASIBLE)
    for i in reversed(range(m)):
        if tab.basis[i] < width:
            continue
        col = next((j for j in range(width) if tab.rows[i][j]), None)
        if col is None:  # redundant equality
            del tab.rows[i]
            del tab.basis[i]
        else:
            tab.pivot(i, col, phase1)
    for row in tab.rows:
        del row[width:width + m]

    obj = _objective(tab, c + [_ZERO] * n_slack)
    if tab.run(obj, width) == UNBOUNDED:
        return LpResult(UNBOUNDED)
    x = [_ZERO] * width
    for i, b in enumerate(tab.basis):
        x[b] = tab.rows[i][-1]
    return LpResult(OPTIMAL, tuple(x[:n]), -obj[-1])
