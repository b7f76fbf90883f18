"""Invariant chains represented by anchored offset kernels.

A :class:`ChainKernel` assigns to each point ``p`` a finite list of entries
``(offsets, weight)`` with ``offsets = (g_1, ..., g_m)`` in (Z^d)^m.  The chain
of a point ``w`` contains, for every ``x`` in Z^d, the simplex
``(x, x + g_1, ..., x + g_m)`` with weight ``weight`` for each entry of
``kernel(T^x w)``.  Invariance under right shifts therefore holds by
construction, and the vertex-expectation theorem says that the expected total
weight of simplices whose i-th vertex is the origin does not depend on i.

Offsets are elements of Z^d and are never reduced modulo the periods of the
finite system; reducing them would merge distinct simplices.

The kernels built here for Z-actions run along one coordinate axis of the
system (``axis=0`` by default), so they also apply to Z^d-systems.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .action import FiniteSystem, GroupElement, act, sup_norm
from .errors import HorizonExceeded, KacLabError, OrbitMissesE
from .rational import fmt, parse_rational
from .visits import INF, visit_times

Entry = tuple[tuple[GroupElement, ...], Fraction]


@dataclass(frozen=True)
class ChainKernel:
    m: int
    d: int
    table: tuple[tuple[Entry, ...], ...]
    bound: int

    def __call__(self, point: int) -> tuple[Entry, ...]:
        return self.table[point]

    @classmethod
    def build(cls, m: int, d: int, n_points: int, entries: Mapping[int, Iterable] | Iterable,
              cap: int | None = None) -> "ChainKernel":
        """Validate and freeze a kernel.

        ``entries`` maps points to iterables of ``(offsets, weight)``, or is an
        iterable of ``(point, offsets, weight)`` triples.  Zero-weight entries
        are dropped.  ``cap`` bounds the offsets; exceeding it raises
        :class:`HorizonExceeded`.
        """
        rows: list[list[Entry]] = [[] for _ in range(n_points)]
        items = entries.items() if isinstance(entries, Mapping) else None
        if items is not None:
            triples = ((p, g, w) for p, lst in items for g, w in lst)
        else:
            triples = entries
        bound = 0
        for p, offsets, weight in triples:
            weight = Fraction(weight)
            if weight < 0:
                raise KacLabError(f"negative kernel weight at point {p}")
            offsets = tuple(tuple(int(c) for c in g) for g in offsets)
            if len(offsets) != m or any(len(g) != d for g in offsets):
                raise KacLabError(f"entry at point {p} is not an {m}-tuple of Z^{d} offsets")
            if weight == 0:
                continue
            bound = max(bound, max((sup_norm(g) for g in offsets), default=0))
            rows[p].append((offsets, weight))
        if cap is not None and bound > cap:
            raise HorizonExceeded(f"kernel offsets reach {bound}, beyond the cap {cap}")
        return cls(m, d, tuple(tuple(r) for r in rows), bound)

    def scaled(self, c) -> "ChainKernel":
        c = Fraction(c)
        return ChainKernel.build(self.m, self.d, len(self.table),
                                 ((p, g, w * c) for p, row in enumerate(self.table) for g, w in row))

    def entry_count(self) -> int:
        return sum(len(r) for r in self.table)


@dataclass(frozen=True)
class VertexReport:
    expectations: tuple[Fraction, ...]
    equal: bool
    per_point: tuple[tuple[Fraction, ...], ...] | None = field(default=None, compare=False)


def kernel_sum(kernels: Sequence[ChainKernel], coefficients: Sequence | None = None) -> ChainKernel:
    """Nonnegative linear combination of kernels with the same shape."""
    if coefficients is None:
        coefficients = [1] * len(kernels)
    first = kernels[0]
    triples = []
    for k, c in zip(kernels, coefficients):
        if (k.m, k.d, len(k.table)) != (first.m, first.d, len(first.table)):
            raise KacLabError("kernels must share m, d and point count")
        c = Fraction(c)
        triples.extend((p, g, w * c) for p, row in enumerate(k.table) for g, w in row)
    return ChainKernel.build(first.m, first.d, len(first.table), triples)


def _vertex_offset(offsets: tuple[GroupElement, ...], i: int, d: int) -> GroupElement:
    return (0,) * d if i == 0 else offsets[i - 1]


def vertex_coefficient(kernel: ChainKernel, system: FiniteSystem, w: int, i: int) -> Fraction:
    """Total weight of simplices in the chain of ``w`` whose i-th vertex is the origin.

    Evaluated literally: scan every ``h`` in the cube ``[-B, B]^d`` and collect
    the entries of ``kernel(T^-h w)`` whose i-th offset is ``h``.
    """
    if i == 0:
        return sum((wt for _, wt in kernel(w)), Fraction(0))
    B = kernel.bound
    total = Fraction(0)
    for h in itertools.product(range(-B, B + 1), repeat=kernel.d):
        src = act(system, tuple(-c for c in h), w)
        for offsets, wt in kernel(src):
            if offsets[i - 1] == h:
                total += wt
    return total


def brute_vertex_coefficient(kernel: ChainKernel, system: FiniteSystem, w: int, i: int) -> Fraction:
    """Enumerate all simplices with base point ``x``, ``|x| <= B``, and count those with vertex i at 0."""
    B = kernel.bound
    total = Fraction(0)
    for x in itertools.product(range(-B, B + 1), repeat=kernel.d):
        for offsets, wt in kernel(act(system, x, w)):
            g = _vertex_offset(offsets, i, kernel.d)
            if all(a + b == 0 for a, b in zip(x, g)):
                total += wt
    return total


def vertex_table(kernel: ChainKernel, system: FiniteSystem, i: int) -> list[Fraction]:
    """Vertex-i coefficients at every point, by pushing each entry to the point that sees it.

    Entry ``(g, wt)`` of ``kernel(p)`` is the simplex based at ``x = -g_i`` in
    the chain of ``T^{g_i} p``, so it contributes ``wt`` there.
    """
    out = [Fraction(0)] * system.n_points
    for p, row in enumerate(kernel.table):
        for offsets, wt in row:
            target = p if i == 0 else act(system, offsets[i - 1], p)
            out[target] += wt
    return out


def vertex_expectation(kernel: ChainKernel, system: FiniteSystem, i: int) -> Fraction:
    coeffs = vertex_table(kernel, system, i)
    return sum((system.weights[w] * c for w, c in enumerate(coeffs) if c), Fraction(0))


def verify_ve(kernel: ChainKernel, system: FiniteSystem, per_point: bool = False) -> VertexReport:
    tables = [vertex_table(kernel, system, i) for i in range(kernel.m + 1)]
    exps = tuple(
        sum((system.weights[w] * c for w, c in enumerate(t) if c), Fraction(0)) for t in tables
    )
    rows = tuple(tuple(t[w] for t in tables) for w in system.points()) if per_point else None
    return VertexReport(exps, len(set(exps)) == 1, rows)


# ---------------------------------------------------------------------------
# kernel constructors


def _unit(d: int, axis: int, k: int) -> GroupElement:
    e = [0] * d
    e[axis] = k
    return tuple(e)


def _lookup(f, p, default=Fraction(1)) -> Fraction:
    if f is None:
        return default
    if callable(f):
        return parse_rational(f(p))
    if isinstance(f, Mapping):
        return parse_rational(f.get(p, 0))
    return parse_rational(f[p])


def _s_value(s, j: int) -> Fraction:
    if callable(s):
        return parse_rational(s(j))
    if j >= len(s):
        raise HorizonExceeded(f"s-table has {len(s)} entries but offset {j} is needed")
    return parse_rational(s[j])


def _check_hits(system: FiniteSystem, times, strict: bool, which: str = "xi_inv") -> None:
    if not strict:
        return
    col = getattr(times, which)
    for w in system.points():
        if col[w] == INF:
            raise OrbitMissesE(w)


def kac_kernel(system: FiniteSystem, E, axis: int = 0, strict: bool = True,
               cap: int | None = None) -> ChainKernel:
    """One arrow from every point to its most recent visit to E (at or before now)."""
    return weighted_kac_kernel(system, E, None, None, "source", axis, strict, cap)


def weighted_kac_kernel(system: FiniteSystem, E, f=None, s=None, anchor: str = "source",
                        axis: int = 0, strict: bool = True, cap: int | None = None) -> ChainKernel:
    """Kac arrows ``k -> l`` weighted ``f(T^k w) s(k-l)`` (source) or ``f(T^l w) s(k-l)`` (target).

    ``f`` is a per-point table (sequence, mapping or callable) and ``s`` a table
    indexed by the arrow length; ``None`` means the constant 1.
    """
    if anchor not in ("source", "target"):
        raise KacLabError(f"anchor must be 'source' or 'target', not {anchor!r}")
    E = frozenset(E)
    vt = visit_times(system, E, axis)
    _check_hits(system, vt, strict)
    triples = []
    for p in system.points():
        j = vt.xi_inv[p]
        if j == INF:
            continue
        g = _unit(system.d, axis, -j)
        fp = _lookup(f, p if anchor == "source" else act(system, g, p))
        sj = Fraction(1) if s is None else _s_value(s, j)
        triples.append((p, (g,), fp * sj))
    return ChainKernel.build(1, system.d, system.n_points, triples, cap)


def induced_kernel(system: FiniteSystem, E, f=None, axis: int = 0) -> ChainKernel:
    """Arrows from each visit to E back to the previous visit, weighted ``f`` at the source."""
    E = frozenset(E)
    vt = visit_times(system, E, axis)
    triples = [
        (p, (_unit(system.d, axis, -vt.xi_inv_plus[p]),), _lookup(f, p))
        for p in sorted(E) if vt.xi_inv_plus[p] != INF
    ]
    return ChainKernel.build(1, system.d, system.n_points, triples)


WINDOW_VARIANTS = ("F'", "F''", "F'''")


def window_kernel(system: FiniteSystem, E, n: int, variant: str, axis: int = 0) -> ChainKernel:
    """Arrows ``k -> k - n`` selected by where the orbit visits E.

    ``F'``: both ends in E and nothing in between (n >= 1);
    ``F''``: no visit anywhere on ``[k - n, k]``;
    ``F'''``: the far end ``k - n`` is in E and ``]k - n, k]`` is free of E.
    """
    if variant not in WINDOW_VARIANTS:
        raise KacLabError(f"unknown window variant {variant!r}")
    if n < 0:
        raise KacLabError("window length must be nonnegative")
    E = frozenset(E)
    vt = visit_times(system, E, axis)
    g = (_unit(system.d, axis, -n),)
    triples = []
    for p in system.points():
        if variant == "F'":
            ok = n >= 1 and p in E and vt.xi_inv_plus[p] == n
        elif variant == "F''":
            ok = vt.xi_inv[p] > n
        else:
            ok = vt.xi_inv[p] == n
        if ok:
            triples.append((p, g, 1))
    return ChainKernel.build(1, system.d, system.n_points, triples)


@dataclass(frozen=True)
class JointSpec:
    """Shape of a return-time hypergraph.

    The simplex is listed as ``(k_0, k_1, ..., k_m, k_-1, ..., k_-m')`` with
    ``k_j - k_{j-1} = gaps[j-1]`` and ``k_{-j+1} - k_{-j} = inverse_gaps[j-1]``.
    Every listed vertex except ``k_0`` is a visit to E, there is no visit
    strictly between adjacent vertices, and ``k_0`` is in E iff
    ``first_in_e``.  With ``free_first`` the first gap is not prescribed:
    ``gaps`` then lists the gaps after it (the kernel is the sum over all
    first gaps).
    """

    gaps: tuple[int, ...]
    first_in_e: bool = True
    inverse_gaps: tuple[int, ...] = ()
    free_first: bool = False

    @property
    def m(self) -> int:
        return len(self.gaps) + len(self.inverse_gaps) + (1 if self.free_first else 0)


def _walk(start: int, gaps: Sequence[int], nxt, step: Callable[[int, int], int]):
    """Follow consecutive first-visit gaps; return the cumulative positions or None."""
    pos, q, out = 0, start, []
    for r in gaps:
        if nxt[q] != r:
            return None
        pos += r
        q = step(q, r)
        out.append(pos)
    return out


def joint_kernel(system: FiniteSystem, E, spec: JointSpec, axis: int = 0) -> ChainKernel:
    if any(r <= 0 for r in spec.gaps) or any(r <= 0 for r in spec.inverse_gaps):
        raise KacLabError("joint hypergraph gaps must be positive")
    if spec.m < 1:
        raise KacLabError("joint hypergraph needs at least one gap")
    E = frozenset(E)
    vt = visit_times(system, E, axis)
    d = system.d
    fwd = lambda q, r: system.power(axis, r, q)  # noqa: E731
    bwd = lambda q, r: system.power(axis, -r, q)  # noqa: E731
    triples = []
    for p in system.points():
        if (p in E) != spec.first_in_e:
            continue
        gaps = list(spec.gaps)
        if spec.free_first:
            r0 = vt.xi_plus[p]
            if r0 == INF:
                continue
            gaps = [int(r0)] + gaps
        ahead = _walk(p, gaps, vt.xi_plus, fwd)
        if ahead is None:
            continue
        behind = _walk(p, spec.inverse_gaps, vt.xi_inv_plus, bwd)
        if behind is None:
            continue
        offsets = tuple(_unit(d, axis, k) for k in ahead) + tuple(_unit(d, axis, -k) for k in behind)
        triples.append((p, offsets, 1))
    return ChainKernel.build(spec.m, d, system.n_points, triples)


def two_sets_kernel(system: FiniteSystem, E1, E2, axis: int = 0, strict: bool = True) -> ChainKernel:
    """Triangles ``(k_0, k_1, k_2)``, ``k_2 < k_0 < k_1``, with ``k_1`` the next E1 visit
    after ``k_2`` and ``k_2`` the last E2 visit before ``k_1``."""
    E1, E2 = frozenset(E1), frozenset(E2)
    v1 = visit_times(system, E1, axis)
    v2 = visit_times(system, E2, axis)
    if strict:
        for w in system.points():
            if v1.xi[w] == INF or v2.xi[w] == INF:
                raise HorizonExceeded(f"the axis-{axis} cycle of point {w} misses E1 or E2")
    triples = []
    for p in system.points():
        if p in E1 or p in E2:
            continue
        t1, t2 = v1.xi[p], v2.xi_inv[p]
        if t1 == INF or t2 == INF:
            continue
        if v2.xi[p] >= t1 and v1.xi_inv[p] >= t2:
            triples.append((p, (_unit(system.d, axis, t1), _unit(system.d, axis, -t2)), 1))
    return ChainKernel.build(2, system.d, system.n_points, triples)


# ---------------------------------------------------------------------------
# JSON dump


def kernel_to_json(kernel: ChainKernel) -> str:
    rows = [
        {"point": p, "offsets": [list(g) for g in offsets], "weight": fmt(wt)}
        for p, row in enumerate(kernel.table)
        for offsets, wt in row
    ]
    return json.dumps({"m": kernel.m, "d": kernel.d, "n_points": len(kernel.table), "entries": rows},
                      sort_keys=True)


def kernel_from_json(text: str) -> ChainKernel:
    obj = json.loads(text)
    triples = [(e["point"], e["offsets"], parse_rational(e["weight"])) for e in obj["entries"]]
    return ChainKernel.build(obj["m"], obj["d"], obj["n_points"], triples)


def random_kernel(rng, system: FiniteSystem, m: int, bound: int, density: float = 0.5,
                  max_entries: int = 2) -> ChainKernel:
    """Random 0/1-weighted kernel with offsets in ``[-bound, bound]^d`` (for property tests)."""
    triples = []
    for p in system.points():
        for _ in range(max_entries):
            if rng.random() < density:
                offsets = tuple(tuple(rng.randint(-bound, bound) for _ in range(system.d))
                                for _ in range(m))
                triples.append((p, offsets, rng.choice([1, 1, 2, Fraction(1, 3)])))
    return ChainKernel.build(m, system.d, system.n_points, triples)


__all__ = [
    "ChainKernel", "VertexReport", "JointSpec", "WINDOW_VARIANTS",
    "vertex_coefficient", "brute_vertex_coefficient", "vertex_table", "vertex_expectation",
    "verify_ve", "kernel_sum", "kac_kernel", "weighted_kac_kernel", "induced_kernel",
    "window_kernel", "joint_kernel", "two_sets_kernel", "kernel_to_json", "kernel_from_json",
    "random_kernel",
]
