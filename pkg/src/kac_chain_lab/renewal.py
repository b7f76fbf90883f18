"""Renewal processes on R and Z seen through their Palm measure.

A path under the Palm convention has an epoch at 0 and i.i.d. gaps on both
sides.  The stationary path is built from the Palm law by length-biasing the
gap that straddles 0 and placing the origin uniformly inside it.

All Monte-Carlo routines draw with Palm origin.  The renewal identity
``E #(epochs in [a, a + X_1)) = 1`` holds for every ``a``, while the count in
``[a, a + c)`` only converges to ``c / E X`` as ``a`` grows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

import numpy as np

from .errors import KacLabError, PeriodicDistribution
from .mc import McEstimate, run_blocks, run_blocks_multi, stream
from .rational import parse_rational


class RenewalDistribution:
    """Common interface of the gap laws."""

    kind = "abstract"

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError

    def sample_biased(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Draw from the length-biased law ``x P(dx) / E X``."""
        raise NotImplementedError

    @property
    def mean(self):
        raise NotImplementedError

    @property
    def span(self) -> int:
        """Lattice span for discrete laws, 0 for laws with a density."""
        return 0

    @property
    def nonperiodic(self) -> bool:
        return self.span <= 1


@dataclass(frozen=True)
class Exponential(RenewalDistribution):
    rate: float = 1.0
    kind = "exponential"

    def __post_init__(self):
        if not self.rate > 0:
            raise KacLabError("rate must be positive")

    def sample(self, rng, n):
        return rng.exponential(1.0 / self.rate, n)

    def sample_biased(self, rng, n):
        return rng.gamma(2.0, 1.0 / self.rate, n)

    @property
    def mean(self) -> float:
        return 1.0 / self.rate


@dataclass(frozen=True)
class UniformCont(RenewalDistribution):
    a: float
    b: float
    kind = "uniform"

    def __post_init__(self):
        if not (0 <= self.a < self.b):
            raise KacLabError("uniform gaps need 0 <= a < b")

    def sample(self, rng, n):
        return rng.uniform(self.a, self.b, n)

    def sample_biased(self, rng, n):
        # the biased density is proportional to x on [a, b]; invert its CDF
        u = rng.random(n)
        return np.sqrt(self.a ** 2 + u * (self.b ** 2 - self.a ** 2))

    @property
    def mean(self) -> float:
        return (self.a + self.b) / 2


@dataclass(frozen=True)
class DiscreteLattice(RenewalDistribution):
    """Gaps on the positive integers with exact rational probabilities."""

    support: tuple[int, ...]
    probs: tuple[Fraction, ...]
    kind = "discrete"

    def __post_init__(self):
        support = tuple(int(k) for k in self.support)
        probs = tuple(parse_rational(p) for p in self.probs)
        if len(support) != len(probs) or not support:
            raise KacLabError("support and probabilities must be nonempty and of equal length")
        if min(support) < 1 or len(set(support)) != len(support):
            raise KacLabError("support must be distinct positive integers")
        if any(p < 0 for p in probs) or sum(probs) != 1:
            raise KacLabError("probabilities must be nonnegative and sum to 1")
        keep = sorted((k, p) for k, p in zip(support, probs) if p > 0)
        object.__setattr__(self, "support", tuple(k for k, _ in keep))
        object.__setattr__(self, "probs", tuple(p for _, p in keep))

    @classmethod
    def of(cls, table: dict) -> "DiscreteLattice":
        return cls(tuple(table), tuple(table.values()))

    def _draw(self, rng, n, weights):
        w = np.array([float(x) for x in weights])
        return rng.choice(np.array(self.support, dtype=np.int64), size=n, p=w / w.sum())

    def sample(self, rng, n):
        return self._draw(rng, n, self.probs)

    def sample_biased(self, rng, n):
        return self._draw(rng, n, [p * k for k, p in zip(self.support, self.probs)])

    @property
    def mean(self) -> Fraction:
        return sum((k * p for k, p in zip(self.support, self.probs)), Fraction(0))

    @property
    def span(self) -> int:
        return reduce(math.gcd, self.support)


def distribution_from_dict(spec: dict) -> RenewalDistribution:
    """Build a gap law from ``{"kind": ..., ...}`` as used in CLI configs."""
    kind = spec.get("kind")
    if kind == "exponential":
        return Exponential(float(spec.get("rate", 1.0)))
    if kind == "uniform":
        return UniformCont(float(spec["a"]), float(spec["b"]))
    if kind == "discrete":
        table = spec["probs"]
        return DiscreteLattice(tuple(int(k) for k in table), tuple(parse_rational(v) for v in table.values()))
    raise KacLabError(f"unknown renewal distribution kind {kind!r}")


# ---------------------------------------------------------------------------
# paths


@dataclass(frozen=True)
class PointProcessPath:
    epochs: np.ndarray
    window: float
    origin: str

    def __post_init__(self):
        if len(self.epochs) > 1 and not np.all(np.diff(self.epochs) > 0):
            raise KacLabError("epochs must be strictly increasing")

    def count(self, lo: float, hi: float) -> int:
        """Number of epochs in ``[lo, hi)``."""
        return int(np.searchsorted(self.epochs, hi, "left") - np.searchsorted(self.epochs, lo, "left"))


def _walk(dist: RenewalDistribution, rng, start, limit: float, sign: int) -> list:
    out = []
    pos = start
    while abs(pos) <= limit:
        out.append(pos)
        pos = pos + sign * dist.sample(rng, 1)[0]
    return out


def sample_path(dist: RenewalDistribution, origin: str, W: float, seed: int) -> PointProcessPath:
    """Epochs in ``[-W, W]`` of a Palm or stationary renewal path."""
    if W < 0:
        raise KacLabError("window half-width must be nonnegative")
    rng = stream(seed, 0)
    if origin == "palm":
        left = right = 0
    elif origin == "stationary":
        length = dist.sample_biased(rng, 1)[0]
        if isinstance(dist, DiscreteLattice):
            left = -int(rng.integers(0, length))
        else:
            left = -float(rng.random() * length)
        right = left + length
    else:
        raise KacLabError("origin must be 'palm' or 'stationary'")
    back = _walk(dist, rng, left, W, -1)
    fwd = _walk(dist, rng, right, W, +1)
    if origin == "palm":
        fwd = fwd[1:]  # 0 was already collected walking backwards
    epochs = np.array(back[::-1] + fwd)
    if not isinstance(dist, DiscreteLattice):
        epochs = epochs.astype(float)
    return PointProcessPath(epochs, float(W), origin)


def straddle_length(dist: RenewalDistribution, samples: int, seed: int, jobs: int = 1) -> McEstimate:
    """Mean length of the stationary gap that covers 0."""
    return run_blocks(lambda rng, n: np.asarray(dist.sample_biased(rng, n), dtype=float),
                      samples, seed, jobs)


# ---------------------------------------------------------------------------
# Palm identities


def _palm_count(dist, rng, n, lo: np.ndarray, hi: np.ndarray, start: np.ndarray) -> np.ndarray:
    """Count forward epochs, beginning at ``start``, that fall in ``[lo, hi)``."""
    pos = start.astype(float)
    count = np.zeros(n)
    active = np.arange(n)
    while active.size:
        p = pos[active]
        count[active] += (p >= lo[active]) & (p < hi[active])
        active = active[p < hi[active]]
        pos[active] += dist.sample(rng, active.size)
    return count


def check_rnwlT(dist: RenewalDistribution, a: float, samples: int, seed: int, jobs: int = 1) -> McEstimate:
    """Mean number of Palm epochs in ``[a, a + X_1)``; the identity says it is 1."""
    if a < 0:
        raise KacLabError("a must be nonnegative")

    def draw(rng, n):
        x1 = np.asarray(dist.sample(rng, n), dtype=float)
        lo = np.full(n, float(a))
        hi = lo + x1
        first = (0.0 >= lo) & (0.0 < hi)
        return first + _palm_count(dist, rng, n, lo, hi, x1)

    return run_blocks(draw, samples, seed, jobs)


def check_rnwlK(dist: RenewalDistribution, samples: int, seed: int, jobs: int = 1) -> McEstimate:
    """Sample mean of the first gap, the Palm mass of one renewal cycle."""
    return run_blocks(lambda rng, n: np.asarray(dist.sample(rng, n), dtype=float), samples, seed, jobs)


def renewal_limit_target(dist: RenewalDistribution, a: float, c: float):
    """Limit of the expected epoch count in ``[a, a + c)``.

    A lattice law with span h puts epochs on hZ, where each site is eventually
    hit with probability ``h / E X``; the count then depends on how many sites
    the window holds.
    """
    if isinstance(dist, DiscreteLattice):
        h = dist.span
        sites = math.ceil((a + c) / h) - math.ceil(a / h)
        return Fraction(sites * h) / dist.mean
    return c / float(dist.mean)


def renewal_limit(dist: RenewalDistribution, a: float, c: float, samples: int, seed: int,
                  jobs: int = 1, negative_control: bool = False) -> McEstimate:
    """Mean Palm epoch count in ``[a, a + c)`` for comparison with ``c / E X``.

    A span h > 1 with c not a multiple of h has no limit; this raises
    :class:`PeriodicDistribution` unless ``negative_control`` is set, in which
    case the estimate is returned so the oscillation can be displayed.
    """
    if c <= 0:
        raise KacLabError("c must be positive")
    h = dist.span
    if h > 1 and Fraction(c).limit_denominator(10 ** 9) % h != 0 and not negative_control:
        raise PeriodicDistribution(f"lattice span {h} does not divide window length {c}")

    def draw(rng, n):
        lo = np.full(n, float(a))
        return _palm_count(dist, rng, n, lo, lo + c, np.zeros(n))

    return run_blocks(draw, samples, seed, jobs)


def renewal_sequence(dist: DiscreteLattice, n_max: int) -> list[Fraction]:
    """``u_n = P(n is an epoch)`` from ``u_n = sum_k p_k u_{n-k}``, ``u_0 = 1``."""
    u = [Fraction(1)]
    for n in range(1, n_max + 1):
        u.append(sum((p * u[n - k] for k, p in zip(dist.support, dist.probs) if k <= n), Fraction(0)))
    return u


def discrete_renewal_mc(dist: DiscreteLattice, n_max: int, samples: int, seed: int,
                        jobs: int = 1) -> list[McEstimate]:
    """Monte-Carlo estimate of every ``u_n`` for ``n <= n_max`` from Palm paths."""

    def draw(rng, n):
        hits = np.zeros((n, n_max + 1))
        pos = np.zeros(n, dtype=np.int64)
        active = np.arange(n)
        while active.size:
            hits[active, pos[active]] = 1.0
            pos[active] += dist.sample(rng, active.size)
            active = active[pos[active] <= n_max]
        return hits

    return run_blocks_multi(draw, samples, seed, jobs)

