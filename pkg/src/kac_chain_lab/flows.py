"""Continuous-time Kac identities on the circle and the two-torus.

Circle quantities are exact rationals computed from arc endpoints; only the
Monte-Carlo estimators and the irrational-slope torus flow use floats.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import GapTooSmall, KacLabError
from .mc import McEstimate, run_blocks
from .rational import parse_rational


@dataclass(frozen=True)
class ArcUnion:
    """Disjoint closed arcs ``[a, b]`` on R/Z, sorted by ``a``; ``a`` in [0,1), ``a < b < a + 1``."""

    arcs: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        norm = []
        for a, b in self.arcs:
            a, b = parse_rational(a), parse_rational(b)
            if not a < b:
                raise KacLabError(f"arc [{a}, {b}] must have positive length")
            shift = math.floor(a)
            norm.append((a - shift, b - shift))
        norm.sort()
        for (a1, b1), (a2, _) in zip(norm, norm[1:]):
            if not b1 < a2:
                raise KacLabError("arcs overlap or touch")
        if norm and not norm[-1][1] < norm[0][0] + 1:
            raise KacLabError("arcs overlap or touch across 0")
        object.__setattr__(self, "arcs", tuple(norm))

    @classmethod
    def of(cls, *arcs) -> "ArcUnion":
        return cls(tuple(arcs))

    @property
    def k(self) -> int:
        return len(self.arcs)

    @property
    def measure(self) -> Fraction:
        return sum((b - a for a, b in self.arcs), Fraction(0))

    def gaps(self) -> list[Fraction]:
        """Gap after each arc's upper end to the start of the next arc."""
        out = []
        for i, (_, b) in enumerate(self.arcs):
            nxt = self.arcs[(i + 1) % self.k][0] + (1 if i + 1 == self.k else 0)
            out.append(nxt - b)
        return out

    def lengths(self) -> list[Fraction]:
        return [b - a for a, b in self.arcs]

    def contains(self, p: float) -> bool:
        p = p % 1.0
        return any(a <= p <= b or a <= p + 1 <= b for a, b in ((float(x), float(y)) for x, y in self.arcs))


def random_arc_union(rng, max_arcs: int = 4, denominator: int = 60) -> ArcUnion:
    """Random rational arc union with 1..max_arcs arcs and total measure below 1."""
    k = rng.randint(1, max_arcs)
    cuts = sorted(rng.sample(range(denominator), 2 * k))
    shift = Fraction(rng.randrange(denominator), denominator)
    arcs = [(Fraction(cuts[2 * i], denominator) + shift, Fraction(cuts[2 * i + 1], denominator) + shift)
            for i in range(k)]
    return ArcUnion(tuple(arcs))


def circle_enhanced_return(E: ArcUnion) -> Fraction:
    """Sum over exit points of the return time (the gap to the next arc).

    An empty union has no exit points, so the sum is 0.
    """
    return sum(E.gaps(), Fraction(0))


def circle_window_mc(E: ArcUnion, T, samples: int, seed: int, jobs: int = 1) -> McEstimate:
    """Estimate the enhancement constant with the window ``h = 1_[0,T)``.

    For a uniform starting point, add up the return times at the exits met
    during ``[0, T)`` and divide by T.
    """
    T = float(T)
    if T <= 0:
        raise KacLabError("window length must be positive")
    ends = np.array([float(b) for _, b in E.arcs])
    gaps = np.array([float(g) for g in E.gaps()])

    def draw(rng, n):
        if not len(ends):
            return np.zeros(n)
        w = rng.random(n)
        first = np.mod(ends[None, :] - w[:, None], 1.0)
        counts = np.ceil(np.maximum(T - first, 0.0))
        return (counts * gaps[None, :]).sum(axis=1) / T

    return run_blocks(draw, samples, seed, jobs)


def helmberg_functional(E: ArcUnion, s, side: str = "post_exit") -> Fraction:
    """``(1/s) * integral over E_s of r_E`` in closed form.

    ``post_exit``: E_s is the strip of length s just after each exit and r_E
    the remaining wait before re-entering, giving ``(1 - mu(E)) - k s / 2``
    for s below the smallest gap.  ``pre_exit``: E_s is the strip of length s
    inside E just before each exit and r_E the wait until the next entry,
    giving ``(1 - mu(E)) + k s / 2`` for s below the shortest arc.
    """
    s = parse_rational(s)
    if s <= 0:
        raise KacLabError("s must be positive")
    if side == "post_exit":
        if s >= min(E.gaps()):
            raise GapTooSmall(f"s={s} is not below the smallest gap {min(E.gaps())}")
        return sum(((g * s - s * s / 2) for g in E.gaps()), Fraction(0)) / s
    if side == "pre_exit":
        if s >= min(E.lengths()):
            raise GapTooSmall(f"s={s} is not below the shortest arc {min(E.lengths())}")
        return sum(((g * s + s * s / 2) for g in E.gaps()), Fraction(0)) / s
    raise KacLabError(f"side must be 'post_exit' or 'pre_exit', not {side!r}")


def _wait_to_enter(E: ArcUnion, p: np.ndarray) -> np.ndarray:
    """Time until the rotation started at p is next inside E (0 when already inside)."""
    starts = np.array([float(a) for a, _ in E.arcs])
    ends = np.array([float(b) for _, b in E.arcs])
    inside = np.zeros(p.shape, dtype=bool)
    for a, b in zip(starts, ends):
        inside |= (np.mod(p - a, 1.0) <= b - a)
    wait = np.mod(starts[None, :] - p[:, None], 1.0).min(axis=1)
    return np.where(inside, 0.0, wait)


def _dist_to_exit(E: ArcUnion, p: np.ndarray) -> np.ndarray:
    """For p inside an arc, time until it leaves; ``inf`` outside E."""
    out = np.full(p.shape, np.inf)
    for a, b in E.arcs:
        a, b = float(a), float(b)
        off = np.mod(p - a, 1.0)
        hit = off <= b - a
        out = np.where(hit, (b - a) - off, out)
    return out


def helmberg_quadrature(E: ArcUnion, s: float, side: str = "post_exit", nodes: int = 200_000) -> float:
    """Midpoint-rule evaluation of the same functional from pointwise definitions."""
    p = (np.arange(nodes) + 0.5) / nodes
    wait = _wait_to_enter(E, p)
    if side == "post_exit":
        ends = np.array([float(b) for _, b in E.arcs])
        since_exit = np.mod(p[:, None] - ends[None, :], 1.0).min(axis=1)
        in_strip = (wait > 0) & (since_exit < s)
        values = np.where(in_strip, wait, 0.0)
    else:
        to_exit = _dist_to_exit(E, p)
        in_strip = to_exit < s
        leave = np.where(in_strip, to_exit, 0.0)
        after = _wait_to_enter(E, np.mod(p + leave + 1e-12, 1.0))
        values = np.where(in_strip, leave + after, 0.0)
    return float(values.sum() / nodes / s)


def helmberg_limit(E: ArcUnion, j_max: int = 40, side: str = "post_exit") -> list[tuple[Fraction, Fraction]]:
    """Values along the dyadic sequence ``s = 2^-j`` that lie in the admissible range."""
    out = []
    for j in range(1, j_max + 1):
        s = Fraction(1, 2 ** j)
        try:
            out.append((s, helmberg_functional(E, s, side)))
        except GapTooSmall:
            continue
    return out


# ---------------------------------------------------------------------------
# linear flow on the two-torus


def crossing_rate(a: float, b: float, p0: Sequence, p1: Sequence) -> float:
    """Expected crossings per unit time of the segment p0 -> p1 by the flow with velocity (a, b)."""
    ds, dt = float(p1[0]) - float(p0[0]), float(p1[1]) - float(p0[1])
    return abs(a * dt - b * ds)


def _crossings(a, b, p0, delta, T, u: np.ndarray) -> np.ndarray:
    """Exact crossing counts for starting points ``u`` (shape ``(n, 2)``).

    A crossing is a solution of ``u + t v = p0 + lam * delta + k`` with
    ``t`` in [0, T), ``lam`` in [0, 1) and ``k`` in Z^2, so the count is the
    number of lattice points in a half-open parallelogram.
    """
    v = np.array([a, b], dtype=float)
    M = np.column_stack([v, -delta])
    det = float(np.linalg.det(M))
    if abs(det) < 1e-15:
        return np.zeros(len(u))
    Minv = np.linalg.inv(M)
    corners = np.array([[0, 0], T * v, -delta, T * v - delta])
    base = p0[None, :] - u  # p0 + k - u must lie in the parallelogram P
    lo = np.floor(corners.min(axis=0) - 1).astype(int)
    hi = np.ceil(corners.max(axis=0) + 1).astype(int)
    ks = np.stack(np.meshgrid(np.arange(lo[0], hi[0] + 1), np.arange(lo[1], hi[1] + 1),
                              indexing="ij"), -1).reshape(-1, 2)
    rhs = base[:, None, :] + ks[None, :, :]
    sol = rhs @ Minv.T
    t, lam = sol[..., 0], sol[..., 1]
    ok = (t >= 0) & (t < T) & (lam >= 0) & (lam < 1)
    return ok.sum(axis=1).astype(float)


def torus_flow_crossings(a: float, b: float, p0, p1, T: float, samples: int, seed: int,
                         jobs: int = 1) -> McEstimate:
    """Monte-Carlo crossing rate of a straight segment by the linear flow, over time T."""
    if a == 0 and b == 0:
        raise KacLabError("flow direction must be nonzero")
    p0v = np.array([float(c) for c in p0])
    delta = np.array([float(c) for c in p1]) - p0v
    T = float(T)

    def draw(rng, n):
        u = rng.random((n, 2))
        return _crossings(a, b, p0v, delta, T, u) / T

    return run_blocks(draw, samples, seed, jobs)
