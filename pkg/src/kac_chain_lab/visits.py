"""Hitting-time tables along one generator of a finite system.

For a set E and an axis, every point gets four numbers: the forward and
backward arrival times (first j >= 0 with T^{+-j} w in E) and their strict
versions (first j > 0).  ``math.inf`` marks a cycle that never meets E.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .action import FiniteSystem

INF = math.inf


@dataclass(frozen=True)
class VisitTimes:
    E: frozenset
    xi: tuple            # first j >= 0 with T^j w in E
    xi_inv: tuple        # first j >= 0 with T^-j w in E
    xi_plus: tuple       # first j > 0 with T^j w in E
    xi_inv_plus: tuple   # first j > 0 with T^-j w in E

    def rho(self, w: int):
        return self.xi_plus[w] if w in self.E else 0

    def rho_inv(self, w: int):
        return self.xi_inv_plus[w] if w in self.E else 0


def _scan(cycle: list[int], E: frozenset, xi: list, xi_plus: list) -> None:
    L = len(cycle)
    nxt = INF
    for k in range(2 * L - 1, -1, -1):
        w = cycle[k % L]
        if k < L:
            xi_plus[w] = nxt - k
        if w in E:
            nxt = k
        if k < L:
            xi[w] = nxt - k


def visit_times(system: FiniteSystem, E, axis: int = 0) -> VisitTimes:
    return _visit_times(system, frozenset(E), axis)


@lru_cache(maxsize=256)
def _visit_times(system: FiniteSystem, E: frozenset, axis: int) -> VisitTimes:
    n = system.n_points
    xi, xi_plus = [INF] * n, [INF] * n
    xi_inv, xi_inv_plus = [INF] * n, [INF] * n
    for cycle in system.cycles(axis):
        _scan(cycle, E, xi, xi_plus)
        _scan(cycle[::-1], E, xi_inv, xi_inv_plus)
    as_int = lambda v: v if v == INF else int(v)  # noqa: E731
    return VisitTimes(
        E,
        tuple(map(as_int, xi)),
        tuple(map(as_int, xi_inv)),
        tuple(map(as_int, xi_plus)),
        tuple(map(as_int, xi_inv_plus)),
    )
