from fractions import Fraction as F
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from kac_chain_lab.errors import KacLabError, PeriodicDistribution
from kac_chain_lab.mc import stream
from kac_chain_lab.renewal import (
    DiscreteLattice, Exponential, PointProcessPath, UniformCont, check_rnwlK, check_rnwlT,
    discrete_renewal_mc, distribution_from_dict, renewal_limit, renewal_limit_target, renewal_sequence,
    sample_path, straddle_length,
)

GAPS12 = DiscreteLattice.of({1: F(1, 2), 2: F(1, 2)})


def gaps12_closed_form(n):
    # two-step recursion u_n = (u_{n-1} + u_{n-2}) / 2 solved by hand
    return F(2, 3) + F(1, 3) * F(-1, 2) ** n


def test_distribution_validation():
    with pytest.raises(KacLabError):
        DiscreteLattice.of({1: F(1, 2), 2: F(1, 3)})
    with pytest.raises(KacLabError):
        DiscreteLattice.of({0: F(1)})
    with pytest.raises(KacLabError):
        UniformCont(2, 1)
    with pytest.raises(KacLabError):
        Exponential(0)
    d = DiscreteLattice.of({2: F(1, 2), 4: F(1, 2), 6: 0})
    assert (d.support, d.span, d.mean, d.nonperiodic) == ((2, 4), 2, F(3), False)


def test_distribution_from_dict():
    assert distribution_from_dict({"kind": "exponential", "rate": 2}) == Exponential(2.0)
    assert distribution_from_dict({"kind": "uniform", "a": 0, "b": 2}) == UniformCont(0.0, 2.0)
    assert distribution_from_dict({"kind": "discrete", "probs": {"1": "1/2", "2": "1/2"}}) == GAPS12
    with pytest.raises(KacLabError):
        distribution_from_dict({"kind": "pareto"})


def test_biased_samplers_have_the_right_means():
    rng = stream(3, 0)
    for dist, want in ((Exponential(), 2.0), (UniformCont(0, 2), 4 / 3), (GAPS12, 5 / 3)):
        x = np.asarray(dist.sample_biased(rng, 200_000), dtype=float)
        assert abs(x.mean() - want) < 4 * x.std() / math.sqrt(x.size)


def test_path_shapes():
    p = sample_path(GAPS12, "palm", 20, seed=1)
    assert 0 in p.epochs.tolist() and p.epochs.dtype.kind == "i"
    assert p.epochs.min() >= -20 and p.epochs.max() <= 20
    s = sample_path(Exponential(), "stationary", 50, seed=2)
    assert 0 not in s.epochs.tolist() and s.epochs.dtype.kind == "f"
    with pytest.raises(KacLabError):
        PointProcessPath(np.array([0.0, 0.0]), 1.0, "palm")
    with pytest.raises(KacLabError):
        sample_path(GAPS12, "other", 5, seed=0)


def test_stationary_paths_have_uniform_intensity():
    counts = [sample_path(Exponential(), "stationary", 12, seed=s).count(0, 5) for s in range(400)]
    mean = np.mean(counts)
    assert abs(mean - 5) < 3 * np.std(counts, ddof=1) / math.sqrt(len(counts))
    assert straddle_length(Exponential(), 50_000, seed=4).within(2.0)


@given(st.integers(0, 10 ** 6))
def test_palm_paths_always_contain_zero(seed):
    p = sample_path(UniformCont(0.5, 1.5), "palm", 10, seed)
    assert 0.0 in p.epochs.tolist() and p.count(0, 0.5) == 1


def test_cycle_count_at_zero_is_exact():
    est = check_rnwlT(Exponential(), 0.0, 20_000, seed=1)
    assert est.mean == 1.0 and est.stderr == 0.0


@pytest.mark.parametrize("dist, a", [(Exponential(), 10.3), (Exponential(), 100.7), (GAPS12, 7.0),
                                     (UniformCont(0, 2), 3.3)])
def test_cycle_count_is_one(dist, a):
    assert check_rnwlT(dist, a, 50_000, seed=2).within(1.0)


@pytest.mark.parametrize("dist", [Exponential(), GAPS12, UniformCont(0, 2)])
def test_cycle_mass_is_the_mean(dist):
    assert check_rnwlK(dist, 50_000, seed=3).within(float(dist.mean))


def test_renewal_sequence_matches_closed_form():
    u = renewal_sequence(GAPS12, 60)
    assert u[:4] == [1, F(1, 2), F(3, 4), F(5, 8)]
    assert all(u[n] == gaps12_closed_form(n) for n in range(61))
    assert abs(u[50] - F(2, 3)) <= F(1, 10 ** 6)


def test_renewal_mc_matches_exact_sequence():
    u = renewal_sequence(GAPS12, 60)
    est = discrete_renewal_mc(GAPS12, 60, 40_000, seed=7, jobs=2)
    assert est[0].mean == 1.0
    assert all(e.within(x) for e, x in zip(est, u))


def test_renewal_limits():
    assert renewal_limit_target(GAPS12, 50, 1) == F(2, 3)
    assert renewal_limit(GAPS12, 50, 1, 50_000, seed=5).within(float(renewal_sequence(GAPS12, 50)[50]))
    assert renewal_limit(Exponential(), 100.7, 2.5, 50_000, seed=6).within(2.5)


def test_periodic_law_has_no_limit():
    even = DiscreteLattice.of({2: F(1, 2), 4: F(1, 2)})
    with pytest.raises(PeriodicDistribution):
        renewal_limit(even, 50, 1, 1000, seed=1)
    renewal_limit(even, 50, 2, 1000, seed=1)
    # negative control: at an even start the unit window always meets the lattice, at an odd start never
    at_even = renewal_limit(even, 50, 1, 20_000, seed=1, negative_control=True)
    at_odd = renewal_limit(even, 51, 1, 20_000, seed=1, negative_control=True)
    assert at_odd.mean == 0.0
    assert at_even.within(float(renewal_limit_target(even, 50, 1)))
    assert not at_even.within(1 / float(even.mean))
