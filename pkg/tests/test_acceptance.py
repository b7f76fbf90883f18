"""Acceptance criteria, one test each.

Every test prints a single ``criterion N: PASS|FAIL`` line with the measured
quantities and the tolerance it was judged against, then asserts.  Run with
``pytest tests/test_acceptance.py -v`` or directly with ``python3``.
"""

import sys
import time
from fractions import Fraction as F

import pytest

from kac_chain_lab.poset import torus_triangle_brute, torus_triangle_stats
from kac_chain_lab.returns import IdentityCatalog
from kac_chain_lab.suites import (
    aw_suite, epodur_sweep, equidecomp_sweep, flows_suite, identity_sweep, renewal_suite, ve_sweep,
)

SEED = 7

CATALOG_UNDER_TEST = (
    IdentityCatalog.KACDIST, IdentityCatalog.INVDIST, IdentityCatalog.SSDIST, IdentityCatalog.SF,
    IdentityCatalog.SSF, IdentityCatalog.TWOSETS, IdentityCatalog.JOINT_A, IdentityCatalog.JOINT_B,
    IdentityCatalog.JOINT_C, IdentityCatalog.JOINT_E, IdentityCatalog.KACDEC,
)

_cache = {}


@pytest.fixture
def announce(capsys):
    def say(number: int, ok: bool, text: str) -> None:
        with capsys.disabled():
            print(f"\ncriterion {number:>2}: {'PASS' if ok else 'FAIL'}  {text}")
    return say


def cached(name, build):
    if name not in _cache:
        start = time.perf_counter()
        _cache[name] = (build(), time.perf_counter() - start)
    return _cache[name]


def ve_rows():
    return cached("ve", lambda: ve_sweep(200, SEED))


def flow_rows():
    return cached("flows", lambda: flows_suite(SEED, arcs=20, circle_samples=10 ** 4, flow_samples=10 ** 5))[0]


def test_criterion_01_vertex_expectations(announce):
    rows, elapsed = ve_rows()
    ve = [r for r in rows if r.check == "ve"]
    kinds = sorted({r.params["kernel"] for r in ve})
    bad = [r.key for r in ve if not r.verdict]
    ok = len(ve) == 200 * 7 and not bad and elapsed < 60
    announce(1, ok, f"{len(ve)} kernels on 200 systems ({', '.join(kinds)}); "
                    f"{len(bad)} unequal (tolerance 0, exact); {elapsed:.1f}s (limit 60s)")
    assert ok, bad[:5]


def test_criterion_02_kac_formula(announce):
    rows, _ = ve_rows()
    kac = [r for r in rows if r.check == "kac-formula"]
    bad = [r.key for r in kac if r.values["int_rho"] != r.values["mu_satur"]]
    ok = len(kac) == 200 and not bad
    announce(2, ok, f"integral of the return time = measure of the saturation on {len(kac)} systems; "
                    f"{len(bad)} mismatches (tolerance 0)")
    assert ok, bad[:5]


def test_criterion_03_identity_catalog(announce):
    rows = identity_sweep(100, SEED, CATALOG_UNDER_TEST)
    bad = [r.key for r in rows if not r.verdict]
    chain_backed = sum(1 for r in rows if any(k.startswith("chain") for k in r.values))
    # the only rows without a chain side are JOINT_B rows whose first arrival is 0
    missing = [r.key for r in rows if not any(k.startswith("chain") for k in r.values)
               and not (r.params["identity"] == "JOINT_B" and r.params["r"][0] == 0)]
    per = {ident.value: sum(1 for r in rows if r.params["identity"] == ident.value) for ident in CATALOG_UNDER_TEST}
    ok = all(v == 100 for v in per.values()) and not bad and not missing
    announce(3, ok, f"{len(per)} identities x 100 instances; {len(bad)} unequal (tolerance 0); "
                    f"{chain_backed} rows also matched by the chain path")
    assert ok, (bad[:5], missing[:5])


def test_criterion_04_torus_triangle(announce):
    start = time.perf_counter()
    small = torus_triangle_stats(4)
    brute = torus_triangle_brute(4)
    big = torus_triangle_stats(200)
    elapsed = time.perf_counter() - start
    checks = {
        "n=4 avg|r.du| = 19/16 (fast and brute)": small.r_du == brute.r_du == F(19, 16),
        f"|avg|r.du| - 3/2| = {abs(float(big.r_du) - 1.5):.4f} <= 0.03": abs(float(big.r_du) - 1.5) <= 0.03,
        f"|avg|a.ep inverse| - 2/3| = {abs(float(big.a_ep_inv) - 2 / 3):.4f} <= 0.03":
            abs(float(big.a_ep_inv) - 2 / 3) <= 0.03,
        f"avg|r.du inverse|/(n/6) = {float(big.r_du_inv) / (200 / 6):.4f} in [0.9,1.1]":
            0.9 <= float(big.r_du_inv) / (200 / 6) <= 1.1,
        f"avg|a.ep|/(n/6) = {float(big.a_ep) / (200 / 6):.4f} in [0.9,1.1]":
            0.9 <= float(big.a_ep) / (200 / 6) <= 1.1,
        f"runtime {elapsed:.1f}s < 30s": elapsed < 30,
    }
    ok = all(checks.values())
    detail = "; ".join(("" if v else "FAILED ") + k for k, v in checks.items())
    announce(4, ok, detail)
    assert ok, [k for k, v in checks.items() if not v]


def test_criterion_05_epoch_duration_pairs(announce):
    rows = epodur_sweep(50, SEED)
    bad = [r.key for r in rows if not r.verdict]
    zs = sum(r.values["z_checked"] for r in rows)
    with_cards = sum(1 for r in rows if r.values["card_pairs"] > 0)
    ok = len(rows) == 50 and not bad and with_cards > 0
    announce(5, ok, f"50 tori, {zs} box points z; {len(bad)} instances unequal (tolerance 0); "
                    f"cardinality pairs compared on {with_cards} instances")
    assert ok, bad


def test_criterion_06_odometer(announce):
    start = time.perf_counter()
    rows = aw_suite()
    elapsed = time.perf_counter() - start
    bad = [r.key for r in rows if not r.verdict]
    configs = sum(r.values["configurations"] for r in rows)
    card_exact = all(r.values["E_card_S"] == 1 for r in rows)
    ok = not bad and card_exact and elapsed < 120
    announce(6, ok, f"{len(rows)} (base, E, depth) cases, {configs} configurations; E[card S]=1 exactly, "
                    f"coverage, thickness and E[phi^d] <= 2^d: {len(bad)} failures; {elapsed:.1f}s (limit 120s)")
    assert ok, bad


def test_criterion_07_circle(announce):
    rows = flow_rows()
    closed = [r for r in rows if r.check == "circle.closed_form"]
    mc = [r for r in rows if r.check == "circle.window_mc"]
    worst = max(abs(r.estimate - r.target) / max(r.stderr, 1e-300) for r in mc)
    ok = len(closed) == 20 and all(r.verdict for r in closed) and len(mc) == 20 and all(r.verdict for r in mc)
    announce(7, ok, f"closed form = 1 - mu(E) exactly on {sum(r.verdict for r in closed)}/20 arc unions; "
                    f"window estimator within 3 stderr on {sum(r.verdict for r in mc)}/20 at 10^4 samples "
                    f"(worst {worst:.2f} stderr)")
    assert ok


def test_criterion_08_shrinking_strips(announce):
    rows = flow_rows()
    affine = [r for r in rows if r.check == "helmberg.affine"]
    limit = [r for r in rows if r.check == "helmberg.limit"]
    worst = max(r.values["gap"] for r in limit)
    ok = all(r.verdict for r in affine) and all(r.verdict for r in limit) and len(affine) == len(limit) == 20
    announce(8, ok, f"affine formula (1 - mu(E)) - k s/2 exact on {sum(r.verdict for r in affine)}/20; "
                    f"dyadic limit gap {worst:.2e} <= 1e-9")
    assert ok


def test_criterion_09_torus_flow(announce):
    rows = [r for r in flow_rows() if r.check == "torus_flow.crossings"]
    parts = [f"{r.params['case']} {r.estimate:.4f} vs {r.target:.4f}" for r in rows]
    zero_cases = sum(1 for r in rows if r.target == 0)
    ok = len(rows) == 5 and zero_cases >= 1 and all(r.verdict for r in rows)
    announce(9, ok, f"crossing rate within 3 stderr at 10^5 samples: {'; '.join(parts)}")
    assert ok


def test_criterion_10_renewal(announce):
    rows = renewal_suite(SEED, samples=10 ** 5)
    by = {(r.check, r.key): r for r in rows}
    at_zero = by[("renewal.rnwlT", (0,))]
    checks = {
        "cycle count at a=0 is 1 with zero variance": at_zero.estimate == 1.0 and at_zero.stderr == 0.0,
        "cycle count 1 within 3 stderr at a=10.3": by[("renewal.rnwlT", (1,))].verdict,
        "cycle count 1 within 3 stderr at a=100.7": by[("renewal.rnwlT", (2,))].verdict,
        f"exact u_50 within 1e-6 of 2/3 (gap {by[('renewal.u50_exact', (0,))].values['gap_to_2/3']:.1e})":
            by[("renewal.u50_exact", (0,))].verdict,
        "MC count at n=50 within 3 stderr of u_50 (10^5 paths)": by[("renewal.limit", (0,))].verdict,
        "exponential renewal limit 1 within 3 stderr": by[("renewal.limit", (1,))].verdict,
    }
    ok = all(checks.values())
    announce(10, ok, "; ".join(("" if v else "FAILED ") + k for k, v in checks.items()))
    assert ok


def test_criterion_11_equidecomposition(announce):
    rows = equidecomp_sweep(100, SEED)
    groups = {}
    for r in rows:
        groups.setdefault(r.check, []).append(r.verdict)
    witnesses = sum(1 for r in rows if r.check == "equidecomp.verdict" and r.values["lp"] == "witness")
    ok = all(len(v) == 100 and all(v) for v in groups.values()) and len(groups) == 3
    announce(11, ok, f"100 instances ({witnesses} witnesses, {100 - witnesses} certificates); "
                     + ", ".join(f"{k.split('.')[1]} {sum(v)}/100" for k, v in sorted(groups.items()))
                     + " (tolerance 0)")
    assert ok


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
