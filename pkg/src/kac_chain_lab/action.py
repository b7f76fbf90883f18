"""Finite measure-preserving Z^d-systems.

A system is a set of dense point indices ``0..N-1`` carrying exact rational
weights and ``d`` commuting permutations, one per generator of Z^d.  Group
elements are plain tuples of Python ints; they are never reduced modulo the
periods of the action.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import InvalidSystem
from .rational import fmt, parse_rational

GroupElement = tuple[int, ...]
PointSet = frozenset


def zero(d: int) -> GroupElement:
    return (0,) * d


def add(x: GroupElement, y: GroupElement) -> GroupElement:
    return tuple(a + b for a, b in zip(x, y))


def neg(x: GroupElement) -> GroupElement:
    return tuple(-a for a in x)


def sup_norm(x: GroupElement) -> int:
    return max((abs(a) for a in x), default=0)


@dataclass(frozen=True)
class FiniteSystem:
    """Z^d acting on ``len(weights)`` points through the permutations ``maps``.

    ``maps[i][w]`` is the image of point ``w`` under the i-th generator.  The
    constructor checks the structural and measure invariants; use
    :meth:`unchecked` to build deliberately broken systems for negative tests.
    """

    d: int
    weights: tuple[Fraction, ...]
    maps: tuple[tuple[int, ...], ...]
    shape: tuple[int, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "weights", tuple(Fraction(w) for w in self.weights))
        object.__setattr__(self, "maps", tuple(tuple(int(v) for v in m) for m in self.maps))
        problem = _structural_problem(self)
        if problem is None:
            problem = _measure_problem(self)
        if problem is not None:
            raise InvalidSystem(problem)

    @classmethod
    def unchecked(cls, d, weights, maps, shape=None) -> "FiniteSystem":
        obj = object.__new__(cls)
        object.__setattr__(obj, "d", d)
        object.__setattr__(obj, "weights", tuple(Fraction(w) for w in weights))
        object.__setattr__(obj, "maps", tuple(tuple(m) for m in maps))
        object.__setattr__(obj, "shape", shape)
        return obj

    @property
    def n_points(self) -> int:
        return len(self.weights)

    def points(self) -> range:
        return range(len(self.weights))

    def measure(self, points: Iterable[int]) -> Fraction:
        return sum((self.weights[p] for p in points), Fraction(0))

    @cached_property
    def inverses(self) -> tuple[tuple[int, ...], ...]:
        out = []
        for m in self.maps:
            inv = [0] * len(m)
            for w, v in enumerate(m):
                inv[v] = w
            out.append(tuple(inv))
        return tuple(out)

    @cached_property
    def _cycles(self):
        # per generator: (flat cycle array, start of each point's cycle,
        # cycle length of each point, position of each point in its cycle)
        tables = []
        n = self.n_points
        for m in self.maps:
            flat = np.empty(n, dtype=np.int64)
            start = np.empty(n, dtype=np.int64)
            length = np.empty(n, dtype=np.int64)
            pos = np.empty(n, dtype=np.int64)
            seen = [False] * n
            cursor = 0
            for w0 in range(n):
                if seen[w0]:
                    continue
                cyc = [w0]
                seen[w0] = True
                w = m[w0]
                while w != w0:
                    cyc.append(w)
                    seen[w] = True
                    w = m[w]
                for k, w in enumerate(cyc):
                    flat[cursor + k] = w
                    start[w] = cursor
                    length[w] = len(cyc)
                    pos[w] = k
                cursor += len(cyc)
            tables.append((flat, start, length, pos))
        return tuple(tables)

    def cycles(self, axis: int) -> list[list[int]]:
        """Cycles of one generator, each listed in the order the generator walks it."""
        flat, start, length, _ = self._cycles[axis]
        out, seen = [], set()
        for w in range(self.n_points):
            s = int(start[w])
            if s not in seen:
                seen.add(s)
                out.append(flat[s:s + int(length[w])].tolist())
        return out

    @cached_property
    def generator_orders(self) -> tuple[int, ...]:
        """Order of each generator as a permutation (lcm of its cycle lengths)."""
        return tuple(
            math.lcm(*(int(v) for v in set(length.tolist()))) if self.n_points else 1
            for _, _, length, _ in self._cycles
        )

    @cached_property
    def orbit_ids(self) -> tuple[int, ...]:
        n = self.n_points
        ids = [-1] * n
        label = 0
        for w0 in range(n):
            if ids[w0] >= 0:
                continue
            stack = [w0]
            ids[w0] = label
            while stack:
                w = stack.pop()
                for m, inv in zip(self.maps, self.inverses):
                    for v in (m[w], inv[w]):
                        if ids[v] < 0:
                            ids[v] = label
                            stack.append(v)
            label += 1
        return tuple(ids)

    @cached_property
    def orbits(self) -> tuple[frozenset, ...]:
        groups: dict[int, list[int]] = {}
        for w, k in enumerate(self.orbit_ids):
            groups.setdefault(k, []).append(w)
        return tuple(frozenset(groups[k]) for k in sorted(groups))

    def power(self, axis: int, k: int, w: int) -> int:
        flat, start, length, pos = self._cycles[axis]
        n = int(length[w])
        return int(flat[start[w] + (pos[w] + k) % n])

    def power_many(self, axis: int, k, w):
        """Vectorised :meth:`power` over numpy arrays ``k`` and ``w``."""
        flat, start, length, pos = self._cycles[axis]
        w = np.asarray(w, dtype=np.int64)
        return flat[start[w] + np.mod(pos[w] + np.asarray(k, dtype=np.int64), length[w])]

    def index_of(self, coords: Sequence[int]) -> int:
        """Point index of torus coordinates (only for systems built by :func:`torus`)."""
        if self.shape is None:
            raise InvalidSystem("system has no coordinate shape")
        return int(np.ravel_multi_index(tuple(c % s for c, s in zip(coords, self.shape)), self.shape))

    def coords_of(self, w: int) -> tuple[int, ...]:
        if self.shape is None:
            raise InvalidSystem("system has no coordinate shape")
        return tuple(int(c) for c in np.unravel_index(w, self.shape))

    def with_weights(self, weights: Sequence) -> "FiniteSystem":
        return FiniteSystem(self.d, tuple(weights), self.maps, self.shape)

    def restrict_axis(self, axis: int) -> "FiniteSystem":
        """The Z-action generated by one coordinate direction."""
        return FiniteSystem(1, self.weights, (self.maps[axis],), None)


def _structural_problem(system: FiniteSystem) -> str | None:
    n = len(system.weights)
    if system.d < 1:
        return "dimension d must be >= 1"
    if len(system.maps) != system.d:
        return f"expected {system.d} generator maps, got {len(system.maps)}"
    for i, m in enumerate(system.maps):
        if len(m) != n:
            return f"generator {i} has length {len(m)}, expected {n}"
        if sorted(m) != list(range(n)):
            return f"generator {i} is not a bijection of the point set"
    for i, j in itertools.combinations(range(system.d), 2):
        a, b = system.maps[i], system.maps[j]
        for w in range(n):
            if a[b[w]] != b[a[w]]:
                return f"generators {i} and {j} do not commute at point {w}"
    return None


def _measure_problem(system: FiniteSystem) -> str | None:
    if any(w < 0 for w in system.weights):
        return "weights must be nonnegative"
    s = sum(system.weights, Fraction(0))
    if s != 1:
        return f"weights sum to {fmt(s)}, expected 1"
    for i, m in enumerate(system.maps):
        for w in range(len(m)):
            if system.weights[m[w]] != system.weights[w]:
                return f"generator {i} does not preserve the weight of point {w}"
    return None


def first_violation(system: FiniteSystem) -> str | None:
    """The first violated :class:`FiniteSystem` invariant, or ``None``."""
    return _structural_problem(system) or _measure_problem(system)


def invariant_measure_check(system: FiniteSystem) -> bool:
    return first_violation(system) is None


def act(system: FiniteSystem, x: GroupElement, w: int) -> int:
    """``T^x w``."""
    for axis, k in enumerate(x):
        if k:
            w = system.power(axis, k, w)
    return w


def act_many(system: FiniteSystem, xs, w):
    """``T^x w`` for every row ``x`` of the integer array ``xs`` (shape ``(k, d)``)."""
    xs = np.asarray(xs, dtype=np.int64)
    pts = np.broadcast_to(np.asarray(w, dtype=np.int64), xs.shape[:1]).copy()
    for axis in range(system.d):
        pts = system.power_many(axis, xs[:, axis], pts)
    return pts


def orbit(system: FiniteSystem, w: int) -> frozenset:
    return system.orbits[system.orbit_ids[w]]


def saturation(system: FiniteSystem, E: Iterable[int]) -> frozenset:
    hit = {system.orbit_ids[w] for w in E}
    return frozenset(w for w in system.points() if system.orbit_ids[w] in hit)


def uniform_weights(n: int) -> tuple[Fraction, ...]:
    return tuple(Fraction(1, n) for _ in range(n))


def rotation(n: int, step: int = 1, weights: Sequence | None = None) -> FiniteSystem:
    """Z acting on Z/n by ``k -> k + step``."""
    m = tuple((k + step) % n for k in range(n))
    return FiniteSystem(1, tuple(weights) if weights is not None else uniform_weights(n), (m,), (n,))


def torus(sizes: Sequence[int], weights: Sequence | None = None) -> FiniteSystem:
    """Z^d acting on Z/n1 x ... x Z/nd by coordinatewise unit translations."""
    sizes = tuple(int(s) for s in sizes)
    n = math.prod(sizes)
    grid = np.arange(n).reshape(sizes)
    maps = tuple(tuple(np.roll(grid, -1, axis=i).ravel().tolist()) for i in range(len(sizes)))
    return FiniteSystem(len(sizes), tuple(weights) if weights is not None else uniform_weights(n), maps, sizes)


def disjoint_union(systems: Sequence[FiniteSystem], masses: Sequence | None = None) -> FiniteSystem:
    """Disjoint union; component k gets total mass ``masses[k]`` (default: proportional to size)."""
    d = systems[0].d
    if any(s.d != d for s in systems):
        raise InvalidSystem("all components must have the same dimension")
    total = sum(s.n_points for s in systems)
    if masses is None:
        masses = [Fraction(s.n_points, total) for s in systems]
    weights: list[Fraction] = []
    maps: list[list[int]] = [[] for _ in range(d)]
    offset = 0
    for s, mass in zip(systems, masses):
        weights.extend(parse_rational(mass) * w for w in s.weights)
        for i in range(d):
            maps[i].extend(v + offset for v in s.maps[i])
        offset += s.n_points
    return FiniteSystem(d, tuple(weights), tuple(tuple(m) for m in maps))


def from_permutations(maps: Sequence[Sequence[int]], weights: Sequence | None = None) -> FiniteSystem:
    n = len(maps[0])
    return FiniteSystem(len(maps), tuple(weights) if weights is not None else uniform_weights(n),
                        tuple(tuple(m) for m in maps))


def from_descriptor(desc: dict) -> FiniteSystem:
    """Build a system from the JSON descriptor ``{d, sizes | permutations, weights?}``."""
    if not isinstance(desc, dict):
        raise InvalidSystem("system descriptor must be a JSON object")
    weights = desc.get("weights")
    if weights is not None:
        try:
            weights = [parse_rational(w) for w in weights]
        except (TypeError, ValueError, ZeroDivisionError) as exc:
            raise InvalidSystem(f"bad weight: {exc}") from exc
    if "sizes" in desc:
        system = torus(desc["sizes"], weights)
    elif "permutations" in desc:
        system = from_permutations(desc["permutations"], weights)
    else:
        raise InvalidSystem("descriptor needs 'sizes' or 'permutations'")
    if "d" in desc and int(desc["d"]) != system.d:
        raise InvalidSystem(f"descriptor says d={desc['d']} but defines {system.d} generators")
    return system


def to_descriptor(system: FiniteSystem) -> dict:
    return {
        "d": system.d,
        "permutations": [list(m) for m in system.maps],
        "weights": [fmt(w) for w in system.weights],
    }


def _random_orbit_weights(maps, n, rng: random.Random) -> tuple[Fraction, ...]:
    probe = FiniteSystem.unchecked(len(maps), [Fraction(1, n)] * n, maps)
    masses = [Fraction(rng.randint(1, 6)) for _ in probe.orbits]
    norm = sum(masses)
    weights = [Fraction(0)] * n
    for orb, mass in zip(probe.orbits, masses):
        for w in orb:
            weights[w] = mass / norm / len(orb)
    return tuple(weights)


def random_system(rng: random.Random, d: int = 1, max_points: int = 24) -> FiniteSystem:
    """A random finite Z^d-system with per-orbit-uniform random weights.

    Components are cycles (d=1), or small tori and cyclic groups rotated by
    random commuting steps (d=2); point labels are shuffled afterwards.
    """
    n = 0
    comps: list[list[list[int]]] = []
    target = rng.randint(2, max_points)
    while n < target:
        room = target - n
        if d == 1:
            size = rng.randint(1, min(room, 8))
            comps.append([[(k + 1) % size for k in range(size)]])
            n += size
            continue
        if room >= 4 and rng.random() < 0.5:
            a = rng.randint(2, min(4, room // 2))
            b = rng.randint(1, min(4, room // a))
            grid = np.arange(a * b).reshape(a, b)
            comps.append([np.roll(grid, -1, axis=0).ravel().tolist(),
                          np.roll(grid, -1, axis=1).ravel().tolist()][:d]
                         + [list(range(a * b))] * max(0, d - 2))
            n += a * b
        else:
            size = rng.randint(1, min(room, 8))
            steps = [rng.randint(0, size - 1) for _ in range(d)]
            comps.append([[(k + s) % size for k in range(size)] for s in steps])
            n += size
    maps: list[list[int]] = [[] for _ in range(d)]
    offset = 0
    for comp in comps:
        for i in range(d):
            maps[i].extend(v + offset for v in comp[i])
        offset += len(comp[0])
    relabel = list(range(n))
    rng.shuffle(relabel)
    shuffled = [[0] * n for _ in range(d)]
    for i in range(d):
        for w in range(n):
            shuffled[i][relabel[w]] = relabel[maps[i][w]]
    weights = _random_orbit_weights(shuffled, n, rng)
    return FiniteSystem(d, weights, tuple(tuple(m) for m in shuffled))


def random_hitting_set(rng: random.Random, system: FiniteSystem, axis: int | None = None,
                       density: float = 0.3) -> frozenset:
    """A random subset meeting every orbit (every ``axis``-orbit if ``axis`` is given)."""
    base = system if axis is None else system.restrict_axis(axis)
    E = {w for w in base.points() if rng.random() < density}
    for orb in base.orbits:
        if not orb & E:
            E.add(rng.choice(sorted(orb)))
    return frozenset(E)
