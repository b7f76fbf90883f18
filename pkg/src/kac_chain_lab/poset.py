"""Return/arrival epochs and durations for Z^d with the componentwise partial order."""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .action import FiniteSystem, GroupElement, act_many, torus
from .errors import HorizonExceeded, KacLabError
from .returns import IdentityReport

KINDS = ("return-epoch", "return-duration", "arrival-epoch", "arrival-duration")
PAIRS = {
    "i": (("return-epoch", "fwd"), ("return-epoch", "inv")),
    "ii": (("return-duration", "fwd"), ("arrival-epoch", "inv")),
    "iii": (("arrival-duration", "fwd"), ("arrival-duration", "inv")),
}


def leq(x: GroupElement, y: GroupElement) -> bool:
    return all(a <= b for a, b in zip(x, y))


def order_interval(x: GroupElement, y: GroupElement, closed: str = "[]") -> set[GroupElement]:
    """``[x,y]``, ``]x,y[``, ``[x,y[`` or ``]x,y]`` in Z^d; empty unless ``x <= y``."""
    if not leq(x, y):
        return set()
    grids = np.indices([b - a + 1 for a, b in zip(x, y)]).reshape(len(x), -1).T
    out = {tuple(int(a + c) for a, c in zip(x, row)) for row in grids}
    if closed[0] == "]":
        out.discard(tuple(x))
    if closed[1] == "[":
        out.discard(tuple(y))
    return out


@dataclass(frozen=True)
class EpochDurationSet:
    kind: str
    direction: str
    elements: frozenset
    truncated: bool

    def __len__(self) -> int:
        return len(self.elements)


def _box(d: int, H: int) -> np.ndarray:
    return np.indices((H + 1,) * d).reshape(d, -1).T


def _cum_or(A: np.ndarray) -> np.ndarray:
    for ax in range(A.ndim):
        A = np.maximum.accumulate(A, axis=ax)
    return A


def _strict_lower(C: np.ndarray) -> np.ndarray:
    """``out[x]`` = OR of ``C[x - e_i]`` over axes with ``x_i > 0``."""
    out = np.zeros_like(C)
    for ax in range(C.ndim):
        shifted = np.zeros_like(C)
        src = [slice(None)] * C.ndim
        dst = [slice(None)] * C.ndim
        src[ax], dst[ax] = slice(0, -1), slice(1, None)
        shifted[tuple(dst)] = C[tuple(src)]
        out |= shifted
    return out


def _frontier(mask: np.ndarray) -> bool:
    H = mask.shape[0] - 1
    for ax in range(mask.ndim):
        idx = [slice(None)] * mask.ndim
        idx[ax] = H
        if mask[tuple(idx)].any():
            return True
    return False


def _as_set(mask: np.ndarray) -> frozenset:
    return frozenset(tuple(int(c) for c in row) for row in np.argwhere(mask))


def all_epoch_duration_sets(system: FiniteSystem, E, w: int, H: int, direction: str = "fwd"
                            ) -> dict[str, EpochDurationSet]:
    """The four sets at ``w`` inside the search box ``[0, H]^d``."""
    if H < 1:
        raise KacLabError("horizon must be at least 1")
    d = system.d
    mask_E = np.zeros(system.n_points, dtype=bool)
    mask_E[list(E)] = True
    sign = 1 if direction == "fwd" else -1
    xs = _box(d, H)
    A = mask_E[act_many(system, sign * xs, w)].reshape((H + 1,) * d)
    in_E = bool(A.flat[0])
    C = _cum_or(A)
    A0 = A.copy()
    A0.flat[0] = False
    C0 = _cum_or(A0)
    a_du = ~C
    a_ep = A & ~_strict_lower(C)
    if in_E:
        r_du = ~C0
        r_ep = A0 & ~_strict_lower(C0)
    else:
        r_du = r_ep = np.zeros_like(A)
    trunc_r, trunc_a = _frontier(r_du), _frontier(a_du)
    return {
        "return-epoch": EpochDurationSet("return-epoch", direction, _as_set(r_ep), trunc_r),
        "return-duration": EpochDurationSet("return-duration", direction, _as_set(r_du), trunc_r),
        "arrival-epoch": EpochDurationSet("arrival-epoch", direction, _as_set(a_ep), trunc_a),
        "arrival-duration": EpochDurationSet("arrival-duration", direction, _as_set(a_du), trunc_a),
    }


def epoch_duration(system: FiniteSystem, E, w: int, kind: str, direction: str = "fwd",
                   H: int = 8, exact: bool = False) -> EpochDurationSet:
    """One of the four epoch/duration sets at ``w``.

    Elements are searched in ``[0, H]^d``.  A duration set is flagged truncated
    when it reaches the far faces of the box, and so is the matching epoch
    set.  With ``exact=True`` a truncated result raises
    :class:`HorizonExceeded` instead.
    """
    if kind not in KINDS:
        raise KacLabError(f"unknown kind {kind!r}")
    out = all_epoch_duration_sets(system, E, w, H, direction)[kind]
    if exact and out.truncated:
        raise HorizonExceeded(f"{kind} at point {w} reaches the edge of the box [0,{H}]^d")
    return out


@dataclass(frozen=True)
class _Table:
    sets: dict  # (kind, direction) -> list of EpochDurationSet indexed by point


def _tabulate(system: FiniteSystem, E, H: int) -> _Table:
    sets: dict = {}
    for direction in ("fwd", "inv"):
        per_point = [all_epoch_duration_sets(system, E, w, H, direction) for w in system.points()]
        for kind in KINDS:
            sets[(kind, direction)] = [row[kind] for row in per_point]
    return _Table(sets)


def _reports_for(system: FiniteSystem, E, table: _Table, zs, H: int) -> list[IdentityReport]:
    weights = system.weights
    reports = []
    card_sides, card_groups = {}, []
    for label, (first, second) in PAIRS.items():
        a, b = table.sets[first], table.sets[second]
        if not any(s.truncated for s in a + b):
            ka, kb = f"({label}).E|{first[0]}.{first[1]}|", f"({label}).E|{second[0]}.{second[1]}|"
            card_sides[ka] = sum((weights[w] * len(a[w]) for w in system.points()), Fraction(0))
            card_sides[kb] = sum((weights[w] * len(b[w]) for w in system.points()), Fraction(0))
            card_groups.append((ka, kb))
    for z in zs:
        z = tuple(int(c) for c in z)
        sides, groups = {}, []
        for label, (first, second) in PAIRS.items():
            a, b = table.sets[first], table.sets[second]
            ka, kb = f"({label}).P[{first[0]}.{first[1]}]", f"({label}).P[{second[0]}.{second[1]}]"
            sides[ka] = sum((weights[w] for w in system.points() if z in a[w].elements), Fraction(0))
            sides[kb] = sum((weights[w] for w in system.points() if z in b[w].elements), Fraction(0))
            groups.append((ka, kb))
        sides.update(card_sides)
        groups.extend(card_groups)
        reports.append(IdentityReport("EPODUR", {"E": sorted(E), "z": list(z), "H": H},
                                      sides, tuple(groups)))
    return reports


def check_epodur(system: FiniteSystem, E, z: GroupElement, H: int) -> IdentityReport:
    """Pairwise membership probabilities of ``z`` and the cardinality expectations.

    Cardinality sides are only reported when no set in the pair was truncated.
    """
    if not all(0 <= c <= H for c in z):
        raise KacLabError("z must lie in the search box [0, H]^d")
    return _reports_for(system, E, _tabulate(system, E, H), [z], H)[0]


def check_epodur_box(system: FiniteSystem, E, H: int) -> list[IdentityReport]:
    """:func:`check_epodur` for every z in ``[0, H]^d``, sharing one tabulation."""
    return _reports_for(system, E, _tabulate(system, E, H), _box(system.d, H), H)


def random_torus_instance(rng: random.Random, max_side: int = 6):
    n1, n2 = rng.randint(1, max_side), rng.randint(1, max_side)
    system = torus((n1, n2))
    density = rng.uniform(0.1, 0.6)
    E = frozenset(w for w in system.points() if rng.random() < density)
    if not E:
        E = frozenset({rng.randrange(system.n_points)})
    return system, E


# ---------------------------------------------------------------------------
# the discrete torus with the upper-triangle set


def triangle_mask(n: int) -> np.ndarray:
    """E on (Z/n)^2; index 0 stands for the representative n of its class."""
    rep = np.arange(n)
    rep[0] = n
    return (rep[:, None] + rep[None, :]) >= n


def triangle_set(n: int) -> frozenset:
    system = torus((n, n))
    mask = triangle_mask(n)
    return frozenset(system.index_of((i, j)) for i, j in np.argwhere(mask))


_BIG = np.int64(1) << 40


def _next_hits(mask: np.ndarray, strict: bool) -> np.ndarray:
    """``out[c, t]`` = first ``b >= 0`` (``b >= 1`` if strict) with ``mask[c, t + b]``; ``_BIG`` if none."""
    n = mask.shape[1]
    out = np.full(mask.shape, _BIG, dtype=np.int64)
    start = 1 if strict else 0
    for b in range(2 * n, start - 1, -1):
        hit = np.roll(mask, -b, axis=1)
        out = np.where(hit, b, out)
    return out


def _scan_columns(mask: np.ndarray) -> dict[str, np.ndarray]:
    """Cardinalities of the four forward sets at every point of (Z/n)^2.

    The arrival duration is a staircase ``{(a, b): b < m(a)}`` where ``m(a)``
    is the running minimum over columns ``0..a`` of the first hit in each
    column; arrival epochs sit where ``m`` strictly drops.  Return versions do
    the same with the origin removed from column 0.
    """
    n = mask.shape[0]
    nxt = _next_hits(mask, strict=False)
    nxt1 = _next_hits(mask, strict=True)
    s = np.repeat(np.arange(n), n)
    t = np.tile(np.arange(n), n)
    in_E = mask[s, t]
    out = {}
    for ret in (False, True):
        m = np.full(n * n, _BIG, dtype=np.int64)
        du = np.zeros(n * n, dtype=np.int64)
        ep = np.zeros(n * n, dtype=np.int64)
        for a in range(n + 1):
            col = (s + a) % n
            h = nxt1[col, t] if (ret and a == 0) else nxt[col, t]
            new = np.minimum(m, h)
            ep += (new < m) & (new < _BIG)
            m = new
            du += np.where(m < _BIG, m, 0)
        infinite = m > 0
        du = np.where(infinite, -1, du)
        ep = np.where(infinite, -1, ep)
        if ret:
            du = np.where(in_E, du, 0)
            ep = np.where(in_E, ep, 0)
            out["return-duration"], out["return-epoch"] = du, ep
        else:
            out["arrival-duration"], out["arrival-epoch"] = du, ep
    return out


@dataclass(frozen=True)
class TorusStats:
    n: int
    r_du: Fraction
    r_du_inv: Fraction
    a_ep: Fraction
    a_ep_inv: Fraction
    r_ep: Fraction
    r_ep_inv: Fraction
    a_du: Fraction
    a_du_inv: Fraction


def torus_card_tables(n: int) -> dict[tuple[str, str], np.ndarray]:
    """Per-point cardinalities (flattened over (Z/n)^2, -1 for infinite) for both directions."""
    mask = triangle_mask(n)
    fwd = _scan_columns(mask)
    neg = (-np.arange(n)) % n
    inv_raw = _scan_columns(mask[np.ix_(neg, neg)])
    flip = (neg[:, None] * n + neg[None, :]).ravel()
    out = {}
    for kind in KINDS:
        out[(kind, "fwd")] = fwd[kind]
        out[(kind, "inv")] = inv_raw[kind][flip]
    return out


def torus_triangle_stats(n: int) -> TorusStats:
    """Exact averages over (Z/n)^2 of the epoch/duration cardinalities for the upper triangle."""
    if n < 2:
        raise KacLabError("n must be at least 2")
    tables = torus_card_tables(n)
    avg = {}
    for key, arr in tables.items():
        if (arr < 0).any():
            raise HorizonExceeded(f"{key} is infinite somewhere for n={n}")
        avg[key] = Fraction(int(arr.sum()), n * n)
    return TorusStats(
        n,
        avg[("return-duration", "fwd")], avg[("return-duration", "inv")],
        avg[("arrival-epoch", "fwd")], avg[("arrival-epoch", "inv")],
        avg[("return-epoch", "fwd")], avg[("return-epoch", "inv")],
        avg[("arrival-duration", "fwd")], avg[("arrival-duration", "inv")],
    )


def torus_triangle_brute(n: int) -> TorusStats:
    """Same averages from :func:`epoch_duration` on the generic torus system (small n only)."""
    system = torus((n, n))
    E = triangle_set(n)
    H = 2 * n + 1
    sums: dict = {}
    for direction in ("fwd", "inv"):
        for w in system.points():
            for kind, st in all_epoch_duration_sets(system, E, w, H, direction).items():
                if st.truncated:
                    raise HorizonExceeded(f"{kind} truncated at point {w}")
                sums[(kind, direction)] = sums.get((kind, direction), 0) + len(st)
    N = n * n
    f = lambda k, dr: Fraction(sums[(k, dr)], N)  # noqa: E731
    return TorusStats(
        n,
        f("return-duration", "fwd"), f("return-duration", "inv"),
        f("arrival-epoch", "fwd"), f("arrival-epoch", "inv"),
        f("return-epoch", "fwd"), f("return-epoch", "inv"),
        f("arrival-duration", "fwd"), f("arrival-duration", "inv"),
    )
