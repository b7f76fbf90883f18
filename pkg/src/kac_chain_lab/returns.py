"""Return and arrival times of Z-actions, and the exact identity catalog.

Every identity is evaluated twice: by summing hitting times against the
measure ("direct" sides) and through the vertex expectations of a chain
kernel ("chain" sides).  An :class:`IdentityReport` is equal only when all of
these agree exactly.

The operations here are defined for Z-actions (``d == 1``); restrict a
Z^d-system to one axis with :meth:`FiniteSystem.restrict_axis` first.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .action import FiniteSystem, saturation
from .chains import (
    JointSpec,
    induced_kernel,
    joint_kernel,
    kac_kernel,
    two_sets_kernel,
    verify_ve,
    weighted_kac_kernel,
    window_kernel,
)
from .errors import DimensionUnsupported, HorizonExceeded, KacLabError
from .rational import fmt_value, parse_rational
from .visits import INF, visit_times

FWD, INV = "fwd", "inv"


def _require_z(system: FiniteSystem) -> None:
    if system.d != 1:
        raise DimensionUnsupported(
            f"return analytics needs a Z-action, got d={system.d}; use restrict_axis first")


def return_time(system: FiniteSystem, E, w: int, direction: str = FWD):
    """0 off E, otherwise the first strictly positive return time (``math.inf`` never happens on E)."""
    _require_z(system)
    vt = visit_times(system, E)
    return vt.rho(w) if direction == FWD else vt.rho_inv(w)


def arrival_time(system: FiniteSystem, E, w: int, direction: str = FWD):
    _require_z(system)
    vt = visit_times(system, E)
    return vt.xi[w] if direction == FWD else vt.xi_inv[w]


def induced_transform(system: FiniteSystem, E) -> dict[int, int]:
    """First-return map ``T_E`` on E."""
    _require_z(system)
    vt = visit_times(system, E)
    return {e: system.power(0, vt.xi_plus[e], e) for e in sorted(E)}


def induced_preserves_measure(system: FiniteSystem, E) -> bool:
    TE = induced_transform(system, E)
    return sorted(TE.values()) == sorted(TE) and all(
        system.weights[TE[e]] == system.weights[e] for e in TE)


def joint_return_sequence(system: FiniteSystem, E, w: int, m: int, direction: str = FWD,
                          kind: str = "return") -> tuple:
    """``(rho^(1), ..., rho^(m))`` for w in E, or the arrival sequence ``(xi^(1), ..., xi^(m))``.

    ``rho^(j) = rho(T_E^{j-1} w)``; ``xi^(1) = xi(w)`` and ``xi^(j)`` is the
    (j-1)-th return time of the first visit.  Inverse-direction variants use
    the inverse action throughout.
    """
    _require_z(system)
    E = frozenset(E)
    vt = visit_times(system, E)
    sign = 1 if direction == FWD else -1
    strict = vt.xi_plus if direction == FWD else vt.xi_inv_plus
    out: list = []
    if kind == "arrival":
        first = vt.xi[w] if direction == FWD else vt.xi_inv[w]
        out.append(first)
        if first == INF:
            return tuple([INF] * m)
        q = system.power(0, sign * first, w)
    elif kind == "return":
        if w not in E:
            raise KacLabError(f"point {w} is not in E; return sequences start on E")
        q = w
    else:
        raise KacLabError(f"kind must be 'return' or 'arrival', not {kind!r}")
    while len(out) < m:
        r = strict[q]
        out.append(r)
        q = system.power(0, sign * r, q)
    return tuple(out)


# ---------------------------------------------------------------------------
# identity catalog


class IdentityCatalog(enum.Enum):
    KAC = "KAC"
    INDUCED_MP = "INDUCED_MP"
    KACDIST = "KACDIST"
    INVDIST = "INVDIST"
    SSDIST = "SSDIST"
    SF = "SF"
    SSF = "SSF"
    TWOSETS = "TWOSETS"
    JOINT_A = "JOINT_A"
    JOINT_B = "JOINT_B"
    JOINT_C = "JOINT_C"
    JOINT_E = "JOINT_E"
    KACDEC = "KACDEC"


@dataclass(frozen=True)
class IdentityParams:
    E: frozenset
    E2: frozenset | None = None
    s: tuple | None = None
    f: tuple | None = None
    r: tuple[int, ...] = ()
    r_inv: tuple[int, ...] = ()
    horizon: int | None = None

    def describe(self) -> dict:
        out: dict = {"E": sorted(self.E)}
        if self.E2 is not None:
            out["E2"] = sorted(self.E2)
        if self.s is not None:
            out["s"] = fmt_value(tuple(self.s))
        if self.f is not None:
            out["f"] = fmt_value(tuple(self.f))
        if self.r:
            out["r"] = list(self.r)
        if self.r_inv:
            out["r_inv"] = list(self.r_inv)
        return out


@dataclass(frozen=True)
class IdentityReport:
    """Named sides of an identity; every side in a group must agree."""

    name: str
    params: dict
    sides: dict
    groups: tuple[tuple[str, ...], ...] = ()
    equal: bool = field(init=False)

    def __post_init__(self):
        groups = self.groups or (tuple(self.sides),)
        object.__setattr__(self, "groups", groups)
        ok = all(len({_canon(self.sides[label]) for label in g}) <= 1 for g in groups)
        object.__setattr__(self, "equal", ok)

    def rows(self):
        for label, value in self.sides.items():
            yield label, value


def _canon(value):
    return tuple(value) if isinstance(value, (list, tuple)) else value


def _mu(system: FiniteSystem, pred) -> Fraction:
    return sum((system.weights[w] for w in system.points() if pred(w)), Fraction(0))


def _integral(system: FiniteSystem, fn) -> Fraction:
    total = Fraction(0)
    for w in system.points():
        v = fn(w)
        if v:
            total += system.weights[w] * v
    return total


def _S(s, n: int) -> Fraction:
    return sum((_s_at(s, k) for k in range(n)), Fraction(0))


def _s_at(s, k) -> Fraction:
    if k >= len(s):
        raise HorizonExceeded(f"s-table has {len(s)} entries but index {k} is needed")
    return parse_rational(s[k])


def _seq_matches(system, E, w, gaps, direction, kind="return") -> bool:
    return joint_return_sequence(system, E, w, len(gaps), direction, kind) == tuple(gaps)


def _chain_sides(report, prefix="chain"):
    return {f"{prefix}.v{i}": v for i, v in enumerate(report.expectations)}


def _table_chain(system, kernels) -> dict:
    """Vertex expectations of several kernels, collected column-wise into tables."""
    reps = [verify_ve(k, system) for k in kernels]
    if not reps:
        return {}
    m = len(reps[0].expectations)
    return {f"chain.v{i}": tuple(r.expectations[i] for r in reps) for i in range(m)}


def evaluate_identity(system: FiniteSystem, params: IdentityParams | Mapping,
                      identity: IdentityCatalog | str) -> IdentityReport:
    _require_z(system)
    if not isinstance(params, IdentityParams):
        params = IdentityParams(**params)
    identity = IdentityCatalog(identity) if isinstance(identity, str) else identity
    E = frozenset(params.E)
    vt = visit_times(system, E)
    N = system.n_points
    L = params.horizon if params.horizon is not None else N
    name = identity.value
    desc = params.describe()

    if identity is IdentityCatalog.KAC:
        sides = {
            "int_rho": _integral(system, vt.rho),
            "mu_satur": system.measure(saturation(system, E)),
            **_chain_sides(verify_ve(kac_kernel(system, E, strict=False), system)),
        }
        return IdentityReport(name, desc, sides)

    if identity is IdentityCatalog.INDUCED_MP:
        TE = induced_transform(system, E)
        pre = {TE[e]: e for e in TE}
        order = sorted(E)
        sides = {
            "mu_e": tuple(system.weights[e] for e in order),
            "mu_TE_preimage": tuple(system.weights[pre[e]] for e in order),
            **_table_chain(system, [induced_kernel(system, E, {e: 1}) for e in order]),
        }
        return IdentityReport(name, desc, sides)

    if identity is IdentityCatalog.KACDIST:
        ns = range(L + 1)
        sides = {
            "P_rho_gt_n": tuple(_mu(system, lambda w, n=n: w in E and vt.rho(w) > n) for n in ns),
            "P_xi_eq_n": tuple(_mu(system, lambda w, n=n: vt.xi[w] == n) for n in ns),
            **_table_chain(system, [window_kernel(system, E, n, "F'''") for n in ns]),
        }
        return IdentityReport(name, desc, sides)

    if identity is IdentityCatalog.INVDIST:
        pos, nonneg = range(1, L + 1), range(L + 1)
        fwd = tuple(_mu(system, lambda w, n=n: w in E and vt.rho(w) == n) for n in pos) + tuple(
            _mu(system, lambda w, n=n: vt.xi[w] > n) for n in nonneg)
        inv = tuple(_mu(system, lambda w, n=n: w in E and vt.rho_inv(w) == n) for n in pos) + tuple(
            _mu(system, lambda w, n=n: vt.xi_inv[w] > n) for n in nonneg)
        chain = _table_chain(system, [window_kernel(system, E, n, "F'") for n in pos]
                             + [window_kernel(system, E, n, "F''") for n in nonneg])
        sides = {"fwd": fwd, "inv": inv, **chain}
        return IdentityReport(name, desc, sides)

    if identity in (IdentityCatalog.SSDIST, IdentityCatalog.SF, IdentityCatalog.SSF):
        s = params.s if params.s is not None else (1,) * (L + 1)
        finite = lambda t: t != INF  # noqa: E731
        if identity is IdentityCatalog.SSDIST:
            sides = {
                "E_s_xi": _integral(system, lambda w: _s_at(s, vt.xi[w]) if finite(vt.xi[w]) else 0),
                "E_s_xi_inv": _integral(system, lambda w: _s_at(s, vt.xi_inv[w]) if finite(vt.xi_inv[w]) else 0),
                "E_S_rho": _integral(system, lambda w: _S(s, vt.rho(w))),
                "E_S_rho_inv": _integral(system, lambda w: _S(s, vt.rho_inv(w))),
                **_chain_sides(verify_ve(weighted_kac_kernel(system, E, None, s, strict=False), system)),
            }
            return IdentityReport(name, desc, sides)
        f = params.f if params.f is not None else (1,) * N
        fv = lambda w: parse_rational(f[w])  # noqa: E731
        back = lambda w: system.power(0, -vt.xi_inv[w], w)  # noqa: E731
        if identity is IdentityCatalog.SF:
            def right(w):
                if w not in E:
                    return 0
                return sum((fv(system.power(0, k, w)) * _s_at(s, k) for k in range(vt.rho(w))), Fraction(0))
            sides = {
                "int_f_s_xi_inv": _integral(
                    system, lambda w: fv(w) * _s_at(s, vt.xi_inv[w]) if finite(vt.xi_inv[w]) else 0),
                "int_E_sum_f_s": _integral(system, right),
                **_chain_sides(verify_ve(weighted_kac_kernel(system, E, f, s, "source", strict=False), system)),
            }
        else:
            sides = {
                "int_f_back_s_xi_inv": _integral(
                    system, lambda w: fv(back(w)) * _s_at(s, vt.xi_inv[w]) if finite(vt.xi_inv[w]) else 0),
                "int_E_f_S_rho": _integral(system, lambda w: fv(w) * _S(s, vt.rho(w)) if w in E else 0),
                **_chain_sides(verify_ve(weighted_kac_kernel(system, E, f, s, "target", strict=False), system)),
            }
        return IdentityReport(name, desc, sides)

    if identity is IdentityCatalog.TWOSETS:
        if params.E2 is None:
            raise KacLabError("TWOSETS needs E2")
        return _two_sets(system, E, frozenset(params.E2), name, desc)

    if identity is IdentityCatalog.JOINT_A:
        r = tuple(params.r)
        m = len(r)
        sides = {}
        for p in range(m + 1):
            sides[f"p={p}"] = _mu(system, lambda w, p=p: w in E
                                  and _seq_matches(system, E, w, r[p:], FWD)
                                  and _seq_matches(system, E, w, r[:p][::-1], INV))
        sides.update(_chain_sides(verify_ve(joint_kernel(system, E, JointSpec(r)), system)))
        return IdentityReport(name, desc, sides)

    if identity is IdentityCatalog.JOINT_B:
        r = tuple(params.r)
        if not r or r[0] < 0 or any(x <= 0 for x in r[1:]):
            raise KacLabError("JOINT_B needs r_1 >= 0 and r_2.. > 0")
        m = len(r)
        sides = {
            "E_rho1_gt_r1": _mu(system, lambda w: w in E and _tail_gt(system, E, w, r)),
            "xi_seq": _mu(system, lambda w: _seq_matches(system, E, w, r, FWD, "arrival")),
        }
        if r[0] >= 1:
            sides.update(_chain_sides(verify_ve(
                joint_kernel(system, E, JointSpec(r, first_in_e=False)), system)))
        return IdentityReport(name, desc, sides)

    if identity in (IdentityCatalog.JOINT_C, IdentityCatalog.KACDEC):
        r, ri = tuple(params.r), tuple(params.r_inv)
        if identity is IdentityCatalog.KACDEC and (len(r) != 1 or len(ri) != 1):
            raise KacLabError("KACDEC takes a single r and a single r_inv")
        if not r or not ri or r[0] < 1 or ri[0] < 1 or any(x <= 0 for x in r[1:] + ri[1:]):
            raise KacLabError(f"{name} needs r_1 >= 1, r'_1 >= 1 and positive later gaps")
        merged = ri[1:][::-1] + (r[0] + ri[0],) + r[1:]
        sides = {
            "xi_and_inverse_xi": _mu(system, lambda w: _seq_matches(system, E, w, r, FWD, "arrival")
                                     and _seq_matches(system, E, w, ri, INV, "arrival")),
            "P_merged": _mu(system, lambda w: w in E and _seq_matches(system, E, w, merged, FWD)),
        }
        spec = JointSpec(r, first_in_e=False, inverse_gaps=ri)
        sides.update(_chain_sides(verify_ve(joint_kernel(system, E, spec), system)))
        return IdentityReport(name, desc, sides)

    if identity is IdentityCatalog.JOINT_E:
        r = tuple(params.r)
        if not r or any(x <= 0 for x in r):
            raise KacLabError("JOINT_E needs positive gaps")
        m = len(r)
        sides = {
            "rho_1_to_m": _mu(system, lambda w: w in E and _seq_matches(system, E, w, r, FWD)),
            "rho_2_to_m1": _mu(system, lambda w: w in E
                               and joint_return_sequence(system, E, w, m + 1)[1:] == r),
        }
        sides.update(_chain_sides(verify_ve(
            joint_kernel(system, E, JointSpec(r, free_first=True)), system)))
        return IdentityReport(name, desc, sides)

    raise KacLabError(f"unhandled identity {identity}")  # pragma: no cover


def _tail_gt(system, E, w, r) -> bool:
    seq = joint_return_sequence(system, E, w, len(r))
    return seq[0] > r[0] and seq[1:] == tuple(r[1:])


def _two_sets(system, E1, E2, name, desc) -> IdentityReport:
    """Two-set identity in its strict-arrival form (first visit at a strictly positive time)."""
    v1, v2 = visit_times(system, E1), visit_times(system, E2)

    def e2_side(w):
        t = v1.xi_plus[w]
        if w in E2 and t != INF and t <= v2.rho(w):
            return t - 1
        return 0

    def e1_side(w):
        t = v2.xi_inv_plus[w]
        if w in E1 and t != INF and t <= v1.rho_inv(w):
            return t - 1
        return 0

    def both(w):
        a, b = v1.xi[w], v2.xi[w]
        c, e = v2.xi_inv[w], v1.xi_inv[w]
        return a != INF and c != INF and 0 < a <= b and 0 < c <= e

    rep = verify_ve(two_sets_kernel(system, E1, E2, strict=False), system)
    sides = {
        "E2_side": _integral(system, e2_side),
        "E1_side": _integral(system, e1_side),
        "both_sets": _mu(system, both),
        "chain.v2": rep.expectations[2],
        "chain.v1": rep.expectations[1],
        "chain.v0": rep.expectations[0],
    }
    groups = (("E2_side", "chain.v2"), ("E1_side", "chain.v1"), ("both_sets", "chain.v0"),
              ("E2_side", "E1_side", "both_sets"))
    return IdentityReport(name, desc, sides, groups)


# ---------------------------------------------------------------------------
# random parameters for sweeps


def observed_gaps(system: FiniteSystem, E, m: int) -> list[tuple[int, ...]]:
    """Return-gap sequences of length m that actually occur starting from points of E."""
    return sorted({joint_return_sequence(system, E, e, m) for e in E})


def sample_params(rng: random.Random, system: FiniteSystem, identity: IdentityCatalog,
                  E: frozenset, max_gap: int = 8, s_kind: int | None = None) -> IdentityParams:
    """Random, usually non-degenerate parameters for one catalog entry.

    ``s_kind`` picks the s-table (0 constant, 1 identity, 2 random); by
    default it is drawn at random.
    """
    N = system.n_points
    if identity in (IdentityCatalog.SSDIST, IdentityCatalog.SF, IdentityCatalog.SSF):
        kind = rng.randrange(3) if s_kind is None else s_kind
        if kind == 0:
            s = tuple(Fraction(1) for _ in range(N + 1))
        elif kind == 1:
            s = tuple(Fraction(k) for k in range(N + 1))
        else:
            s = tuple(Fraction(rng.randint(0, 5), rng.randint(1, 3)) for _ in range(N + 1))
        f = tuple(Fraction(rng.randint(0, 4), rng.randint(1, 3)) for _ in range(N))
        return IdentityParams(E, s=s, f=f if identity is not IdentityCatalog.SSDIST else None)
    if identity is IdentityCatalog.TWOSETS:
        E2 = frozenset(w for w in system.points() if rng.random() < 0.3) or frozenset({rng.randrange(N)})
        return IdentityParams(E, E2=E2)
    gap = lambda: rng.randint(1, max_gap)  # noqa: E731
    m = rng.randint(1, 3)
    if identity is IdentityCatalog.JOINT_A or identity is IdentityCatalog.JOINT_E:
        seen = observed_gaps(system, E, m)
        r = rng.choice(seen) if seen and rng.random() < 0.7 else tuple(gap() for _ in range(m))
        return IdentityParams(E, r=r)
    if identity is IdentityCatalog.JOINT_B:
        starts = [w for w in system.points() if visit_times(system, E).xi[w] != INF]
        if starts and rng.random() < 0.7:
            w = rng.choice(starts)
            r = joint_return_sequence(system, E, w, m, kind="arrival")
        else:
            r = (rng.randint(0, max_gap),) + tuple(gap() for _ in range(m - 1))
        return IdentityParams(E, r=tuple(int(x) for x in r))
    if identity in (IdentityCatalog.JOINT_C, IdentityCatalog.KACDEC):
        m2 = 1 if identity is IdentityCatalog.KACDEC else rng.randint(1, 2)
        m1 = 1 if identity is IdentityCatalog.KACDEC else rng.randint(1, 2)
        outside = [w for w in system.points() if w not in E and visit_times(system, E).xi[w] != INF]
        if outside and rng.random() < 0.7:
            w = rng.choice(outside)
            r = joint_return_sequence(system, E, w, m1, kind="arrival")
            ri = joint_return_sequence(system, E, w, m2, INV, kind="arrival")
        else:
            r = tuple(gap() for _ in range(m1))
            ri = tuple(gap() for _ in range(m2))
        return IdentityParams(E, r=tuple(map(int, r)), r_inv=tuple(map(int, ri)))
    return IdentityParams(E)


def catalog() -> list[IdentityCatalog]:
    return list(IdentityCatalog)


__all__ = [
    "FWD", "INV", "return_time", "arrival_time", "induced_transform", "induced_preserves_measure",
    "joint_return_sequence", "IdentityCatalog", "IdentityParams", "IdentityReport",
    "evaluate_identity", "observed_gaps", "sample_params", "catalog",
]
