"""Equidecomposition of functions on finite systems, solved as exact LPs.

``f`` and ``g`` are equidecomposable over a window X of group elements when
there are nonnegative ``f_x`` with ``sum_x f_x = f`` and
``sum_x f_x(T^-x w) = g(w)``.  Invariant probability measures on a finite
system are mixtures of uniform orbit measures, so feasibility with the full
quotient window is the same as ``f`` and ``g`` having equal sums on every
orbit.  That fact is the oracle for the LP; the LP itself never uses it.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .action import FiniteSystem, GroupElement, act, neg, zero
from .errors import KacLabError, WindowTooSmall
from .lp import OPTIMAL, linprog
from .rational import fmt, parse_rational, total


@dataclass(frozen=True)
class DecompositionWitness:
    window: tuple[GroupElement, ...]
    family: dict  # group element -> tuple of Fractions, one per point

    def check(self, system: FiniteSystem, f: Sequence[Fraction], g: Sequence[Fraction]) -> bool:
        """Plug the family into both constraint systems."""
        n = system.n_points
        if any(v < 0 for fx in self.family.values() for v in fx):
            return False
        split = [total(fx[w] for fx in self.family.values()) for w in range(n)]
        moved = [Fraction(0)] * n
        for x, fx in self.family.items():
            for w in range(n):
                if fx[w]:
                    moved[act(system, x, w)] += fx[w]
        return split == list(f) and moved == list(g)


@dataclass(frozen=True)
class SeparatingCertificate:
    nu: tuple[Fraction, ...]
    f_mass: Fraction
    g_mass: Fraction

    def check(self, system: FiniteSystem, f, g) -> bool:
        nu = self.nu
        invariant = all(nu[m[w]] == nu[w] for m in system.maps for w in system.points())
        return (all(v >= 0 for v in nu) and total(nu) == 1 and invariant
                and total(a * b for a, b in zip(nu, f)) == self.f_mass
                and total(a * b for a, b in zip(nu, g)) == self.g_mass
                and self.f_mass != self.g_mass)


def _vector(system: FiniteSystem, values, name: str, signed: bool = False) -> tuple[Fraction, ...]:
    vec = tuple(parse_rational(v) for v in values)
    if len(vec) != system.n_points:
        raise KacLabError(f"{name} needs one value per point ({system.n_points})")
    if not signed and any(v < 0 for v in vec):
        raise KacLabError(f"{name} must be nonnegative")
    return vec


def quotient_window(system: FiniteSystem) -> tuple[GroupElement, ...]:
    """One group element per distinct permutation of the points, found breadth first."""
    d = system.d
    start = zero(d)
    seen = {tuple(system.points()): start}
    queue = deque([start])
    while queue:
        x = queue.popleft()
        for axis in range(d):
            for step in (1, -1):
                y = tuple(c + (step if i == axis else 0) for i, c in enumerate(x))
                key = tuple(act(system, y, w) for w in system.points())
                if key not in seen:
                    seen[key] = y
                    queue.append(y)
    return tuple(seen.values())


def _window(system: FiniteSystem, window) -> tuple[GroupElement, ...]:
    if window is None:
        return quotient_window(system)
    out = tuple(tuple(int(c) for c in x) for x in window)
    if not out or any(len(x) != system.d for x in out):
        raise KacLabError("window must be a nonempty list of group elements of length d")
    return out


def _columns(system: FiniteSystem, f, X) -> list[tuple[GroupElement, int, int]]:
    """Distinct (x, source, image) triples; equal columns of the LP are merged."""
    cols, seen = [], set()
    for x in X:
        for w in system.points():
            if f[w] == 0:
                continue
            key = (w, act(system, x, w))
            if key not in seen:
                seen.add(key)
                cols.append((x, w, key[1]))
    return cols


def _family(system, cols, values) -> dict:
    n = system.n_points
    fam = {}
    for (x, w, _), v in zip(cols, values):
        if v:
            fam.setdefault(x, [Fraction(0)] * n)[w] += v
    return {x: tuple(fx) for x, fx in sorted(fam.items())}


def _separating_measure(system: FiniteSystem, f, g) -> SeparatingCertificate | None:
    n = system.n_points
    A_eq = [[Fraction(1)] * n]
    b_eq = [Fraction(1)]
    for m in system.maps:
        for w in system.points():
            if m[w] != w:
                row = [Fraction(0)] * n
                row[w] += 1
                row[m[w]] -= 1
                A_eq.append(row)
                b_eq.append(Fraction(0))
    for sign in (1, -1):
        diff = [sign * (b - a) for a, b in zip(f, g)]
        res = linprog(diff, A_eq=A_eq, b_eq=b_eq)
        if res.status == OPTIMAL and res.value < 0:
            nu = res.x
            return SeparatingCertificate(nu, total(a * b for a, b in zip(nu, f)),
                                         total(a * b for a, b in zip(nu, g)))
    return None


def find_equidecomposition(system: FiniteSystem, f, g, window=None):
    """Return a :class:`DecompositionWitness` or a :class:`SeparatingCertificate`."""
    f = _vector(system, f, "f")
    g = _vector(system, g, "g")
    X = _window(system, window)
    cols = _columns(system, f, X)
    A_eq, b_eq = [], []
    for w in system.points():
        A_eq.append([Fraction(1 if c[1] == w else 0) for c in cols])
        b_eq.append(f[w])
    for w in system.points():
        A_eq.append([Fraction(1 if c[2] == w else 0) for c in cols])
        b_eq.append(g[w])
    if cols:
        res = linprog([0] * len(cols), A_eq=A_eq, b_eq=b_eq)
        feasible = res.status == OPTIMAL
    else:  # f vanishes, so only g = 0 decomposes
        res, feasible = None, not any(g)
    if feasible:
        fam = _family(system, cols, res.x) if res else {}
        witness = DecompositionWitness(X, fam)
        assert witness.check(system, f, g)
        return witness
    cert = _separating_measure(system, f, g)
    if cert is None:
        raise WindowTooSmall(f"orbit sums agree but the {len(X)}-element window admits no decomposition")
    return cert


def orbit_sums_agree(system: FiniteSystem, f, g) -> bool:
    """The oracle: equidecomposable over the full quotient iff orbit sums match."""
    f = _vector(system, f, "f")
    g = _vector(system, g, "g")
    return all(total(f[w] for w in orb) == total(g[w] for w in orb) for orb in system.orbits)


def explicit_witness(system: FiniteSystem, f, g) -> DecompositionWitness:
    """``f_x(w) = f(w) g(T^x w) / (|stabilizer| * orbit sum)`` over the full quotient window."""
    f = _vector(system, f, "f")
    g = _vector(system, g, "g")
    if not orbit_sums_agree(system, f, g):
        raise KacLabError("orbit sums differ, so no decomposition exists")
    X = quotient_window(system)
    sums = {}
    for orb in system.orbits:
        s = total(g[w] for w in orb)
        for w in orb:
            sums[w] = (s, Fraction(len(X), len(orb)))
    fam = {}
    for x in X:
        fx = []
        for w in system.points():
            s, stab = sums[w]
            fx.append(f[w] * g[act(system, x, w)] / (stab * s) if s else Fraction(0))
        fam[x] = tuple(fx)
    return DecompositionWitness(X, fam)


def sup_invariant_integral(system: FiniteSystem, f) -> Fraction:
    """Largest integral of f against an invariant probability: the best orbit average."""
    f = _vector(system, f, "f", signed=True)
    return max(total(f[w] for w in orb) / len(orb) for orb in system.orbits)


def min_equi_max(system: FiniteSystem, f, window=None) -> Fraction:
    """Smallest possible maximum of a function equidecomposable with f over the window.

    With the full quotient window this equals :func:`sup_invariant_integral`;
    a strictly larger value means the window is too small.
    """
    f = _vector(system, f, "f")
    X = _window(system, window)
    cols = _columns(system, f, X)
    if not cols:
        return Fraction(0)
    k = len(cols)
    A_eq = [[Fraction(1 if c[1] == w else 0) for c in cols] + [Fraction(0)] for w in system.points()]
    A_ub = [[Fraction(1 if c[2] == w else 0) for c in cols] + [Fraction(-1)] for w in system.points()]
    res = linprog([0] * k + [1], A_ub=A_ub, b_ub=[0] * system.n_points, A_eq=A_eq, b_eq=list(f))
    if res.status != OPTIMAL:
        raise KacLabError(f"equidecomposition LP ended as {res.status}")
    if res.value > sup_invariant_integral(system, f):
        raise WindowTooSmall(f"best maximum {res.value} over a {len(X)}-element window exceeds the invariant bound")
    return res.value


def average_norm_A(system: FiniteSystem, v, window=None) -> Fraction:
    """``min over averages sum_x lam_x v(T^-x .)`` of the pointwise maximum."""
    v = _vector(system, v, "v", signed=True)
    X = _window(system, window)
    rows = {}
    for x in X:
        col = tuple(v[act(system, neg(x), w)] for w in system.points())
        rows.setdefault(col, x)
    cols = list(rows)
    floor = min(v)
    k = len(cols)
    # the maximum is written as floor + s with s >= 0
    A_ub = [[c[w] for c in cols] + [Fraction(-1)] for w in system.points()]
    A_eq = [[Fraction(1)] * k + [Fraction(0)]]
    res = linprog([0] * k + [1], A_ub=A_ub, b_ub=[floor] * system.n_points, A_eq=A_eq, b_eq=[1])
    if res.status != OPTIMAL:
        raise KacLabError(f"averaging LP ended as {res.status}")
    return floor + res.value


def max_orbit_average(system: FiniteSystem, v) -> Fraction:
    return sup_invariant_integral(system, v)


def certificate_to_json(result) -> dict:
    if isinstance(result, DecompositionWitness):
        return {"kind": "witness",
                "window": [list(x) for x in result.window],
                "family": [{"x": list(x), "f_x": [fmt(v) for v in fx]} for x, fx in result.family.items()]}
    return {"kind": "certificate", "nu": [fmt(v) for v in result.nu],
            "f_mass": fmt(result.f_mass), "g_mass": fmt(result.g_mass)}
