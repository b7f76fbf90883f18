"""Reproducible Monte-Carlo plumbing.

Samples are drawn in fixed-size blocks; block ``b`` of a run with seed ``s``
uses a Philox counter-based generator keyed by ``(s, b)``.  Because the
blocks and their merge order are fixed, serial and threaded runs produce
bit-identical estimates.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

BLOCK = 8192
_MASK64 = (1 << 64) - 1


def stream(seed: int, block: int) -> np.random.Generator:
    key = (int(seed) & _MASK64) | ((int(block) & _MASK64) << 64)
    return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class Moments:
    count: int
    total: float
    total_sq: float

    @classmethod
    def of(cls, values: np.ndarray) -> "Moments":
        values = np.asarray(values, dtype=np.float64)
        return cls(int(values.size), math.fsum(values.tolist()), math.fsum((values * values).tolist()))

    @staticmethod
    def merge(parts) -> "Moments":
        parts = list(parts)
        return Moments(sum(p.count for p in parts),
                       math.fsum(p.total for p in parts),
                       math.fsum(p.total_sq for p in parts))


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    n: int
    seed: int

    @classmethod
    def from_moments(cls, m: Moments, seed: int) -> "McEstimate":
        mean = m.total / m.count
        var = max(m.total_sq / m.count - mean * mean, 0.0) * m.count / max(m.count - 1, 1)
        return cls(mean, math.sqrt(var / m.count), m.count, seed)

    def within(self, target: float, k: float = 3.0, floor: float = 1e-12) -> bool:
        """``|mean - target| <= k * stderr`` (a tiny absolute floor covers zero-variance runs)."""
        return abs(self.mean - float(target)) <= k * self.stderr + floor


def run_blocks(draw: Callable[[np.random.Generator, int], np.ndarray], samples: int, seed: int,
               jobs: int = 1, block: int = BLOCK) -> McEstimate:
    """Estimate the mean of ``draw(rng, k)`` values over ``samples`` draws."""
    if samples < 1:
        raise ValueError("need at least one sample")
    sizes = [min(block, samples - start) for start in range(0, samples, block)]

    def one(b: int) -> Moments:
        return Moments.of(draw(stream(seed, b), sizes[b]))

    if jobs > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(one, range(len(sizes))))
    else:
        parts = [one(b) for b in range(len(sizes))]
    return McEstimate.from_moments(Moments.merge(parts), seed)


def run_blocks_multi(draw: Callable[[np.random.Generator, int], np.ndarray], samples: int, seed: int,
                     jobs: int = 1, block: int = BLOCK) -> list[McEstimate]:
    """Like :func:`run_blocks` for draws returning a ``(k, m)`` array; one estimate per column."""
    sizes = [min(block, samples - start) for start in range(0, samples, block)]
    cols: list[list[Moments]] = []

    def one(b: int) -> list[Moments]:
        arr = np.asarray(draw(stream(seed, b), sizes[b]), dtype=np.float64)
        return [Moments.of(arr[:, j]) for j in range(arr.shape[1])]

    if jobs > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            per_block = list(pool.map(one, range(len(sizes))))
    else:
        per_block = [one(b) for b in range(len(sizes))]
    cols = list(zip(*per_block))
    return [McEstimate.from_moments(Moments.merge(c), seed) for c in cols]
