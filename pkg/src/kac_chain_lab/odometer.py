"""Aaronson-Weiss Kac functions on a finite-depth dyadic odometer.

The product system pairs a finite Z^d-system with ``alpha`` in (Z/2^D)^d, and
Z^d acts on the second factor by addition mod 2^D.  ``alpha`` defines a
hierarchy of dyadic partitions: the level-n cube of ``x`` is indexed by
``floor((x + alpha) / 2^n)``.  Every ``x`` is sent to the lexicographically
first visit to E inside the smallest cube of the hierarchy that contains
both ``x`` and some visit.  ``S(w, alpha)`` collects the points sent to the
origin; by the hypergraph theorem ``E[card S] = 1`` exactly.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .action import FiniteSystem, GroupElement, act, act_many, sup_norm
from .errors import DepthInsufficient, KacLabError


@dataclass(frozen=True)
class DyadicParameter:
    d: int
    D: int
    alpha: tuple[int, ...]

    def __post_init__(self):
        if len(self.alpha) != self.d:
            raise KacLabError("alpha must have d coordinates")
        object.__setattr__(self, "alpha", tuple(int(a) % (1 << self.D) for a in self.alpha))

    @property
    def digits(self) -> tuple[tuple[int, ...], ...]:
        """Binary digits of each coordinate, least significant first."""
        return tuple(tuple((a >> k) & 1 for k in range(self.D)) for a in self.alpha)

    def shifted(self, y: GroupElement) -> "DyadicParameter":
        return DyadicParameter(self.d, self.D, tuple(a + b for a, b in zip(self.alpha, y)))


@dataclass(frozen=True)
class DyadicCube:
    level: int
    index: tuple[int, ...]
    lo: tuple[int, ...]

    @property
    def side(self) -> int:
        return 1 << self.level

    def contains(self, x: GroupElement) -> bool:
        return all(lo <= c < lo + self.side for lo, c in zip(self.lo, x))


@dataclass(frozen=True)
class AwSample:
    point: int
    alpha: DyadicParameter
    S: frozenset
    phi: int
    target0: GroupElement = ()

    @property
    def diameter(self) -> int:
        pts = list(self.S | {(0,) * self.alpha.d})
        return max(max(p[i] for p in pts) - min(p[i] for p in pts) for i in range(self.alpha.d))

    def thick(self) -> bool:
        """``card(S) >= 2^-d (diam(S + {0}) + 1)^d``; vacuous for empty S."""
        if not self.S:
            return True
        d = self.alpha.d
        return len(self.S) * (1 << d) >= (self.diameter + 1) ** d


def cube_of(x: GroupElement, alpha: DyadicParameter, n: int) -> DyadicCube:
    if not 1 <= n <= alpha.D:
        raise KacLabError(f"level must be in 1..{alpha.D}")
    idx = tuple((c + a) >> n for c, a in zip(x, alpha.alpha))
    return DyadicCube(n, idx, tuple((i << n) - a for i, a in zip(idx, alpha.alpha)))


def _levels(d: int, D: int) -> list[np.ndarray]:
    """Block id of every cell of the window ``[0, 2^D)^d`` at levels 1..D."""
    side = 1 << D
    grid = np.indices((side,) * d)
    out = []
    for n in range(1, D + 1):
        k = side >> n
        blk = np.zeros((side,) * d, dtype=np.int64)
        for i in range(d):
            blk = blk * k + (grid[i] >> n)
        out.append(blk.ravel())
    return out


def _window_targets(occ: np.ndarray, levels: list[np.ndarray]) -> np.ndarray:
    """Flat target index for every cell of a window given its visit mask (C order = lex order)."""
    flat = occ.ravel()
    size = flat.size
    big = size
    idx = np.arange(size)
    tgt = np.full(size, -1, dtype=np.int64)
    cand = np.where(flat, idx, big)
    for blk in levels:
        first = np.full(int(blk.max()) + 1, big, dtype=np.int64)
        np.minimum.at(first, blk, cand)
        fb = first[blk]
        upd = (tgt < 0) & (fb < big)
        tgt[upd] = fb[upd]
    return tgt


class _Odometer:
    """Shared tables for one (system, E, D)."""

    def __init__(self, system: FiniteSystem, E, D: int):
        if D < 1:
            raise KacLabError("depth must be at least 1")
        self.system, self.D, self.d = system, D, system.d
        self.E = frozenset(E)
        if not self.E:
            raise DepthInsufficient("E is empty, so no cube ever meets the orbit")
        self.mask = np.zeros(system.n_points, dtype=bool)
        self.mask[list(self.E)] = True
        self.side = 1 << D
        self.levels = _levels(self.d, D)
        self.cells = np.indices((self.side,) * self.d).reshape(self.d, -1).T

    def occupancy(self, w: int, origin: GroupElement) -> np.ndarray:
        pts = act_many(self.system, self.cells + np.asarray(origin, dtype=np.int64), w)
        return self.mask[pts].reshape((self.side,) * self.d)

    def big_occupancy(self, w: int) -> np.ndarray:
        """Visit mask over ``[-2^D, 2^D)^d`` so every window of this point is a slice."""
        side2 = 2 * self.side
        cells = np.indices((side2,) * self.d).reshape(self.d, -1).T - self.side
        return self.mask[act_many(self.system, cells, w)].reshape((side2,) * self.d)

    def window(self, alpha: DyadicParameter, x: GroupElement):
        c = tuple((xi + a) >> self.D for xi, a in zip(x, alpha.alpha))
        origin = tuple((ci << self.D) - a for ci, a in zip(c, alpha.alpha))
        return origin

    def targets(self, occ: np.ndarray, w: int) -> np.ndarray:
        if not occ.any():
            raise DepthInsufficient(
                f"a {self.side}-cube misses the orbit of point {w} in E; increase the depth")
        return _window_targets(occ, self.levels)

    def sample(self, w: int, alpha: DyadicParameter, occ: np.ndarray | None = None) -> AwSample:
        origin = tuple(-a for a in alpha.alpha)  # window of the origin starts at -alpha
        if occ is None:
            occ = self.occupancy(w, origin)
        tgt = self.targets(occ, w)
        zero_idx = int(np.ravel_multi_index(alpha.alpha, occ.shape))
        hits = np.nonzero(tgt == zero_idx)[0]
        S = frozenset(tuple(int(u) - a for u, a in zip(np.unravel_index(h, occ.shape), alpha.alpha))
                      for h in hits)
        phi = max((sup_norm(x) for x in S), default=0)
        t0 = np.unravel_index(int(tgt[zero_idx]), occ.shape)
        target0 = tuple(int(u) - a for u, a in zip(t0, alpha.alpha))
        return AwSample(w, alpha, S, phi, target0)


def aw_target(system: FiniteSystem, E, w: int, alpha: DyadicParameter, x: GroupElement,
              D: int | None = None) -> GroupElement:
    od = _Odometer(system, E, D if D is not None else alpha.D)
    origin = od.window(alpha, x)
    tgt = od.targets(od.occupancy(w, origin), w)
    local = tuple(c - o for c, o in zip(x, origin))
    t = np.unravel_index(int(tgt[np.ravel_multi_index(local, (od.side,) * od.d)]), (od.side,) * od.d)
    return tuple(int(u) + o for u, o in zip(t, origin))


def aw_sample(system: FiniteSystem, E, w: int, alpha: DyadicParameter, D: int | None = None) -> AwSample:
    return _Odometer(system, E, D if D is not None else alpha.D).sample(w, alpha)


def _all_samples(od: _Odometer):
    """Yield every (point, alpha, sample) of the product system with its weight."""
    for w in od.system.points():
        big = od.big_occupancy(w)
        for alpha_t in itertools.product(range(od.side), repeat=od.d):
            alpha = DyadicParameter(od.d, od.D, alpha_t)
            sl = tuple(slice(od.side - a, 2 * od.side - a) for a in alpha_t)
            yield w, alpha, od.sample(w, alpha, big[sl])


def aw_expect_cardS(system: FiniteSystem, E, D: int) -> Fraction:
    """Exact ``E[card S]`` over the measure times uniform alpha."""
    od = _Odometer(system, E, D)
    scale = Fraction(1, od.side ** od.d)
    total = Fraction(0)
    for w, _, smp in _all_samples(od):
        if smp.S:
            total += system.weights[w] * scale * len(smp.S)
    return total


@dataclass(frozen=True)
class AwReport:
    expect_card_S: Fraction
    expect_phi_d: Fraction
    coverage: bool
    thick: bool
    moment_bound: bool
    configurations: int
    first_failure: str | None = None

    @property
    def ok(self) -> bool:
        return self.expect_card_S == 1 and self.coverage and self.thick and self.moment_bound


def aw_kac_conditions(system: FiniteSystem, E, D: int) -> AwReport:
    """Exhaustive check of the Kac-function conditions on the product system.

    Coverage: for every configuration ``(w, alpha)`` with the origin sent to
    ``t``, the configuration seen from ``t`` has ``-t`` in its S and a radius
    ``phi >= max(1, |t|)``, so ``(w, alpha)`` is a translate by at most phi of
    a point with that phi.  The moment bound is ``E[phi^d] <= 2^d E[card S]``.
    """
    od = _Odometer(system, E, D)
    d = od.d
    scale = Fraction(1, od.side ** d)
    samples = {}
    card = Fraction(0)
    phid = Fraction(0)
    thick = True
    failure = None
    for w, alpha, smp in _all_samples(od):
        samples[(w, alpha.alpha)] = smp
        if smp.S:
            card += system.weights[w] * scale * len(smp.S)
            phid += system.weights[w] * scale * smp.phi ** d
        if not smp.thick():
            thick = False
            failure = failure or f"thickness fails at point {w}, alpha {alpha.alpha}"
    coverage = True
    for (w, alpha_t), smp in samples.items():
        alpha = smp.alpha
        t = smp.target0
        other = samples[(act(system, t, w), alpha.shifted(t).alpha)]
        need = max(1, sup_norm(t))
        if tuple(-c for c in t) not in other.S or other.phi < need:
            coverage = False
            failure = failure or f"coverage fails at point {w}, alpha {alpha_t}"
    return AwReport(card, phid, coverage, thick, phid <= (1 << d) * card, len(samples), failure)


def random_samples(system: FiniteSystem, E, D: int, k: int, seed: int) -> list[AwSample]:
    """``k`` samples with the point drawn from the measure and alpha uniform."""
    rng = random.Random(seed)
    od = _Odometer(system, E, D)
    pts = list(system.points())
    wts = [float(x) for x in system.weights]
    out = []
    for _ in range(k):
        w = rng.choices(pts, wts)[0]
        alpha = DyadicParameter(od.d, D, tuple(rng.randrange(od.side) for _ in range(od.d)))
        out.append(od.sample(w, alpha))
    return out
