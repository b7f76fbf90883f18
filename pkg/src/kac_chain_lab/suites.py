"""Randomized verification sweeps shared by the command line and the test suite.

Each sweep returns a list of :class:`~kac_chain_lab.report.Row`.  Instance
``i`` of a sweep draws from ``random.Random(f"<sweep>:<seed>:<i>")``, so the
rows do not depend on the number of worker threads or on completion order.
"""

from __future__ import annotations

import math
import random
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from typing import Callable, Iterable

from .action import FiniteSystem, random_system, saturation, torus
from .chains import (JointSpec, joint_kernel, kac_kernel, two_sets_kernel, verify_ve,
                     weighted_kac_kernel, window_kernel)
from .equidecomp import (DecompositionWitness, average_norm_A, find_equidecomposition,
                         max_orbit_average, min_equi_max, orbit_sums_agree, sup_invariant_integral)
from .errors import PeriodicDistribution
from .flows import (ArcUnion, circle_enhanced_return, circle_window_mc, crossing_rate,
                    helmberg_functional, helmberg_limit, random_arc_union, torus_flow_crossings)
from .odometer import aw_kac_conditions
from .poset import check_epodur_box, random_torus_instance, torus_triangle_stats
from .renewal import (DiscreteLattice, Exponential, UniformCont, check_rnwlK, check_rnwlT,
                      renewal_limit, renewal_sequence)
from .report import Row
from .returns import (IdentityCatalog, evaluate_identity, joint_return_sequence, sample_params)
from .visits import visit_times


def _map(fn: Callable[[int], list[Row]], count: int, jobs: int) -> list[Row]:
    if jobs > 1 and count > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            parts = list(pool.map(fn, range(count)))
    else:
        parts = [fn(i) for i in range(count)]
    return [row for part in parts for row in part]


def _subset(rng: random.Random, system: FiniteSystem, density: float) -> frozenset:
    E = frozenset(w for w in system.points() if rng.random() < density)
    return E or frozenset({rng.randrange(system.n_points)})


# ---------------------------------------------------------------------------
# chains


def _joint_spec(rng: random.Random, system: FiniteSystem, E, axis: int) -> JointSpec:
    line = system.restrict_axis(axis)
    m = rng.randint(1, 3)
    starts = sorted(E)
    if starts and rng.random() < 0.7:
        w = rng.choice(starts)
        gaps = joint_return_sequence(line, E, w, m)
        back = joint_return_sequence(line, E, w, rng.randint(0, 1), "inv")
        return JointSpec(tuple(int(g) for g in gaps), True, tuple(int(g) for g in back))
    free = rng.random() < 0.3
    gaps = tuple(rng.randint(1, 8) for _ in range(m - (1 if free else 0)))
    return JointSpec(gaps, rng.random() < 0.5, (), free)


def _ve_instance(seed: int, i: int, max_points: int) -> list[Row]:
    rng = random.Random(f"ve:{seed}:{i}")
    d = rng.choice((1, 2))
    system = random_system(rng, d, max_points)
    axis = rng.randrange(d)
    N = system.n_points
    E = _subset(rng, system, rng.uniform(0.1, 0.5))
    E2 = _subset(rng, system, 0.3)
    f = [Fraction(rng.randint(0, 3)) for _ in range(N)]
    s = [Fraction(rng.randint(0, 4), rng.randint(1, 3)) for _ in range(N + 1)]
    kernels = [
        ("kac", kac_kernel(system, E, axis, strict=False)),
        ("window-F'", window_kernel(system, E, rng.randint(1, N), "F'", axis)),
        ("window-F''", window_kernel(system, E, rng.randint(0, N), "F''", axis)),
        ("window-F'''", window_kernel(system, E, rng.randint(0, N), "F'''", axis)),
        ("weighted-kac", weighted_kac_kernel(system, E, f, s, rng.choice(("source", "target")),
                                             axis, strict=False)),
        ("two-sets", two_sets_kernel(system, E, E2, axis, strict=False)),
        ("joint", joint_kernel(system, E, _joint_spec(rng, system, E, axis), axis)),
    ]
    base = {"instance": i, "d": d, "N": N, "axis": axis}
    rows = []
    for label, kernel in kernels:
        rep = verify_ve(kernel, system)
        rows.append(Row("ve", (i, label), {**base, "kernel": label},
                        {f"v{j}": v for j, v in enumerate(rep.expectations)}, rep.equal))
    vt = visit_times(system, E, axis)
    int_rho = sum((system.weights[w] * vt.xi_plus[w] for w in E), Fraction(0))
    mu_sat = system.measure(saturation(system.restrict_axis(axis), E))
    rows.append(Row("kac-formula", (i,), base, {"int_rho": int_rho, "mu_satur": mu_sat}, int_rho == mu_sat))
    return rows


def ve_sweep(count: int, seed: int, max_points: int = 24, jobs: int = 1) -> list[Row]:
    """Vertex expectations of every kernel family, plus the Kac formula, on random systems."""
    return _map(lambda i: _ve_instance(seed, i, max_points), count, jobs)


# ---------------------------------------------------------------------------
# identity catalog

SWEEP_IDENTITIES = tuple(IdentityCatalog)


def _identity_instance(seed: int, identity: IdentityCatalog, i: int, max_points: int) -> list[Row]:
    rng = random.Random(f"identity:{seed}:{identity.value}:{i}")
    system = random_system(rng, 1, max_points)
    E = _subset(rng, system, rng.uniform(0.1, 0.5))
    s_kind = i % 3 if identity in (IdentityCatalog.SSDIST, IdentityCatalog.SF, IdentityCatalog.SSF) else None
    params = sample_params(rng, system, identity, E, s_kind=s_kind)
    rep = evaluate_identity(system, params, identity)
    return [Row("identity", (identity.value, i),
                {"identity": identity.value, "instance": i, "N": system.n_points, **rep.params},
                rep.sides, rep.equal)]


def identity_sweep(count: int, seed: int, identities: Iterable[IdentityCatalog] = SWEEP_IDENTITIES,
                   max_points: int = 24, jobs: int = 1) -> list[Row]:
    tasks = [(ident, i) for ident in identities for i in range(count)]
    return _map(lambda k: _identity_instance(seed, *tasks[k], max_points), len(tasks), jobs)


# ---------------------------------------------------------------------------
# poset time


def _epodur_instance(seed: int, i: int, max_side: int) -> list[Row]:
    rng = random.Random(f"epodur:{seed}:{i}")
    system, E = random_torus_instance(rng, max_side)
    H = 2 * max(system.shape) + 1
    reports = check_epodur_box(system, E, H)
    bad = [r.params["z"] for r in reports if not r.equal]
    cards = max(sum(1 for k in r.sides if "|" in k) for r in reports) // 2
    return [Row("epodur", (i,), {"instance": i, "shape": list(system.shape), "E_size": len(E), "H": H},
                {"z_checked": len(reports), "card_pairs": cards, "first_failure": bad[0] if bad else "none"},
                not bad)]


def epodur_sweep(count: int, seed: int, max_side: int = 6, jobs: int = 1) -> list[Row]:
    return _map(lambda i: _epodur_instance(seed, i, max_side), count, jobs)


def torus_demo(n: int) -> list[Row]:
    """Exact torus averages for the upper triangle with their asymptotic comparisons."""
    st = torus_triangle_stats(n)
    p = {"n": n}
    rows = [Row("torus.values", (0,), p, {
        "avg_r_du": st.r_du, "avg_r_du_inv": st.r_du_inv, "avg_a_ep": st.a_ep, "avg_a_ep_inv": st.a_ep_inv,
        "float": (float(st.r_du), float(st.r_du_inv), float(st.a_ep), float(st.a_ep_inv))})]

    def near(label, value, target, tol):
        gap = abs(float(value) - target)
        rows.append(Row(label, (1,), {**p, "target": target, "tol": tol},
                        {"value": float(value), "gap": gap}, gap <= tol))

    def ratio(label, value):
        q = float(value) / (n / 6)
        rows.append(Row(label, (1,), {**p, "range": "[0.9,1.1]"}, {"ratio": q}, 0.9 <= q <= 1.1))

    near("torus.avg_r_du~3/2", st.r_du, 1.5, 0.03)
    near("torus.avg_a_ep_inv~3/2", st.a_ep_inv, 1.5, 0.03)
    ratio("torus.avg_r_du_inv/(n/6)", st.r_du_inv)
    ratio("torus.avg_a_ep/(n/6)", st.a_ep)
    for label, a, b in (("r_du=a_ep_inv", st.r_du, st.a_ep_inv), ("r_du_inv=a_ep", st.r_du_inv, st.a_ep),
                        ("r_ep=r_ep_inv", st.r_ep, st.r_ep_inv), ("a_du=a_du_inv", st.a_du, st.a_du_inv)):
        rows.append(Row("torus.exact", (label,), {**p, "pair": label}, {"left": a, "right": b}, a == b))
    return rows


# ---------------------------------------------------------------------------
# odometer


def aw_cases(bases=((2, 2), (4, 4)), depths=(2, 3, 4)) -> list[tuple[tuple[int, ...], frozenset, int]]:
    """Base tori with every E = {0, k} and two singletons, at each depth."""
    cases = []
    for shape in bases:
        n = math.prod(shape)
        sets = [frozenset({0}), frozenset({n - 1})] + [frozenset({0, k}) for k in range(1, n)]
        cases.extend((shape, E, D) for D in depths for E in sets)
    return cases


def aw_suite(cases=None, jobs: int = 1) -> list[Row]:
    cases = aw_cases() if cases is None else list(cases)

    def one(k: int) -> list[Row]:
        shape, E, D = cases[k]
        rep = aw_kac_conditions(torus(shape), E, D)
        d = len(shape)
        ok = rep.ok and rep.expect_phi_d <= 2 ** d
        return [Row("odometer", (shape, D, tuple(sorted(E))), {"shape": list(shape), "E": sorted(E), "D": D},
                    {"E_card_S": rep.expect_card_S, "E_phi_d": rep.expect_phi_d, "coverage": rep.coverage,
                     "thick": rep.thick, "configurations": rep.configurations}, ok)]

    return _map(one, len(cases), jobs)


# ---------------------------------------------------------------------------
# flows and renewal

FLOW_CASES = (
    ("sqrt2-horizontal", 1.0, math.sqrt(2), (0, 0), (Fraction(1, 2), 0)),
    ("golden-diagonal", 1.0, (1 + math.sqrt(5)) / 2, (Fraction(1, 10), Fraction(1, 5)), (Fraction(3, 5), Fraction(9, 10))),
    ("parallel", 1.0, 0.5, (0, 0), (Fraction(1, 2), Fraction(1, 4))),
    ("vertical-flow-vertical-segment", 0.0, 1.0, (Fraction(1, 3), 0), (Fraction(1, 3), 1)),
    ("vertical-flow-horizontal-segment", 0.0, 1.0, (0, Fraction(1, 3)), (1, Fraction(1, 3))),
)


def _mc_row(op: str, key, params: dict, est, target: float) -> Row:
    return Row(op, key, params, estimate=est.mean, stderr=est.stderr, target=float(target),
               verdict=est.within(target))


def flows_suite(seed: int, arcs: int = 20, circle_samples: int = 10_000, flow_samples: int = 100_000,
                T: Fraction = Fraction(5, 2), jobs: int = 1) -> list[Row]:
    rows = []
    rng = random.Random(f"flows:{seed}")
    for i in range(arcs):
        E = random_arc_union(rng)
        target = 1 - E.measure
        p = {"arcs": _arc_text(E), "mu": E.measure}
        closed = circle_enhanced_return(E)
        rows.append(Row("circle.closed_form", (i,), p, {"value": closed, "target": target}, closed == target))
        est = circle_window_mc(E, T, circle_samples, seed + i, jobs)
        rows.append(_mc_row("circle.window_mc", (i,), {**p, "T": T, "samples": circle_samples}, est, target))
        s_vals = [min(E.gaps()) / 2, min(E.gaps()) / 4]
        vals = [helmberg_functional(E, s) for s in s_vals]
        affine = all(v == target - E.k * s / 2 for s, v in zip(s_vals, vals))
        rows.append(Row("helmberg.affine", (i,), p, {"s": tuple(s_vals), "value": tuple(vals)}, affine))
        s_last, v_last = helmberg_limit(E, 40)[-1]
        gap = abs(float(v_last - target))
        rows.append(Row("helmberg.limit", (i,), {**p, "s": s_last}, {"value": v_last, "gap": gap}, gap <= 1e-9))
    for k, (label, a, b, p0, p1) in enumerate(FLOW_CASES):
        est = torus_flow_crossings(a, b, p0, p1, 1.0, flow_samples, seed + 1000 + k, jobs)
        rows.append(_mc_row("torus_flow.crossings", (k,),
                            {"case": label, "a": a, "b": b, "p0": _pt(p0), "p1": _pt(p1), "samples": flow_samples},
                            est, crossing_rate(a, b, p0, p1)))
    return rows


def _arc_text(E: ArcUnion) -> str:
    return "+".join(f"[{a},{b}]" for a, b in E.arcs)


def _pt(p) -> str:
    return "(" + ",".join(str(Fraction(c)) for c in p) + ")"


def renewal_suite(seed: int, samples: int = 100_000, jobs: int = 1) -> list[Row]:
    exp1 = Exponential(1.0)
    coin = DiscreteLattice.of({1: Fraction(1, 2), 2: Fraction(1, 2)})
    rows = []
    for k, (label, dist, a) in enumerate((("exp1", exp1, 0.0), ("exp1", exp1, 10.3), ("exp1", exp1, 100.7),
                                          ("gaps12", coin, 7.0))):
        est = check_rnwlT(dist, a, samples, seed + k, jobs)
        ok = est.within(1) and (a != 0 or (est.mean == 1 and est.stderr == 0))
        rows.append(Row("renewal.rnwlT", (k,), {"dist": label, "a": a, "samples": samples},
                        estimate=est.mean, stderr=est.stderr, target=1.0, verdict=ok))
    for k, (label, dist) in enumerate((("exp1", exp1), ("gaps12", coin), ("uniform0-2", UniformCont(0.0, 2.0)))):
        est = check_rnwlK(dist, samples, seed + 10 + k, jobs)
        rows.append(_mc_row("renewal.rnwlK", (k,), {"dist": label, "samples": samples}, est, float(dist.mean)))
    u = renewal_sequence(coin, 50)
    gap = abs(float(u[50] - Fraction(2, 3)))
    rows.append(Row("renewal.u50_exact", (0,), {"dist": "gaps12", "n": 50},
                    {"u50": float(u[50]), "gap_to_2/3": gap}, gap < 1e-6))
    est = renewal_limit(coin, 50, 1, samples, seed + 20, jobs)
    rows.append(_mc_row("renewal.limit", (0,), {"dist": "gaps12", "a": 50, "c": 1, "samples": samples},
                        est, float(u[50])))
    est = renewal_limit(exp1, 100.7, 1, samples, seed + 21, jobs)
    rows.append(_mc_row("renewal.limit", (1,), {"dist": "exp1", "a": 100.7, "c": 1, "samples": samples}, est, 1.0))
    try:
        renewal_limit(DiscreteLattice.of({2: 1}), 50, 1, 1000, seed)
        flagged = False
    except PeriodicDistribution:
        flagged = True
    rows.append(Row("renewal.periodic_control", (0,), {"dist": "gaps2", "a": 50, "c": 1},
                    {"flagged": flagged}, flagged))
    return rows


# ---------------------------------------------------------------------------
# equidecomposition


def _equi_instance(seed: int, i: int, max_points: int) -> list[Row]:
    rng = random.Random(f"equidecomp:{seed}:{i}")
    system = random_system(rng, rng.choice((1, 2)), max_points)
    N = system.n_points
    f = [Fraction(rng.randint(0, 4)) for _ in range(N)]
    if rng.random() < 0.5:
        g = _orbit_preserving_shuffle(rng, system, f)
    else:
        g = [Fraction(rng.randint(0, 4)) for _ in range(N)]
    res = find_equidecomposition(system, f, g)
    oracle = orbit_sums_agree(system, f, g)
    is_witness = isinstance(res, DecompositionWitness)
    base = {"instance": i, "d": system.d, "N": N}
    v = [Fraction(rng.randint(-5, 5)) for _ in range(N)]
    lp_max, inv_sup = min_equi_max(system, f), sup_invariant_integral(system, f)
    lp_avg, orb_avg = average_norm_A(system, v), max_orbit_average(system, v)
    return [
        Row("equidecomp.verdict", (i,), base,
            {"lp": "witness" if is_witness else "certificate", "oracle": "equal-orbit-sums" if oracle else "differ"},
            is_witness == oracle and res.check(system, f, g)),
        Row("equidecomp.min_equi_max", (i,), base, {"lp": lp_max, "sup_invariant": inv_sup}, lp_max == inv_sup),
        Row("equidecomp.average_norm", (i,), base, {"lp": lp_avg, "max_orbit_average": orb_avg}, lp_avg == orb_avg),
    ]


def _orbit_preserving_shuffle(rng: random.Random, system: FiniteSystem, f) -> list[Fraction]:
    """A g with the same orbit sums as f, spread randomly over each orbit."""
    g = [Fraction(0)] * system.n_points
    for orb in system.orbits:
        pts = sorted(orb)
        mass = sum((f[w] for w in pts), Fraction(0))
        cuts = [Fraction(rng.randint(0, 6)) for _ in pts]
        total = sum(cuts)
        for w, c in zip(pts, cuts):
            g[w] = mass * c / total if total else (mass if w == pts[0] else Fraction(0))
    return g


def equidecomp_sweep(count: int, seed: int, max_points: int = 16, jobs: int = 1) -> list[Row]:
    return _map(lambda i: _equi_instance(seed, i, max_points), count, jobs)
