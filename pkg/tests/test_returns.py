from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from kac_chain_lab.action import act, random_hitting_set, rotation, torus
from kac_chain_lab.errors import DimensionUnsupported, KacLabError
from kac_chain_lab.returns import (
    INV, IdentityCatalog, IdentityParams, arrival_time, catalog, evaluate_identity,
    induced_preserves_measure, induced_transform, joint_return_sequence, return_time, sample_params,
)
from conftest import system_from_seed


def naive_return(system, E, w, sign=1):
    if w not in E:
        return 0
    for k in range(1, system.n_points + 1):
        if act(system, (sign * k,), w) in E:
            return k


def naive_arrival(system, E, w, sign=1):
    for k in range(system.n_points):
        if act(system, (sign * k,), w) in E:
            return k
    return float("inf")


def test_return_and_arrival_examples(z5):
    assert return_time(z5, {0}, 0) == 5
    assert return_time(z5, {0}, 2) == 0
    assert arrival_time(z5, {0}, 2) == 3
    assert arrival_time(z5, {0}, 2, INV) == 2
    assert arrival_time(z5, {0}, 0) == 0


def test_induced_map(z6):
    assert induced_transform(z6, {0, 3}) == {0: 3, 3: 0}
    assert induced_preserves_measure(z6, {0, 3})


def test_joint_sequences(z6, z5):
    assert joint_return_sequence(z6, {0, 3}, 0, 3) == (3, 3, 3)
    assert joint_return_sequence(z5, {0, 2}, 0, 2) == (2, 3)
    assert joint_return_sequence(z5, {0, 2}, 1, 2, kind="arrival") == (1, 3)
    with pytest.raises(KacLabError):
        joint_return_sequence(z5, {0, 2}, 1, 2)


@pytest.mark.parametrize("identity, params, key, expected", [
    ("KAC", {"E": {0}}, "int_rho", F(1)),
    ("TWOSETS", {"E": {0}, "E2": {2}}, "both_sets", F(1, 4)),
    ("KACDEC", {"E": {0}, "r": (2,), "r_inv": (3,)}, "P_merged", F(1, 5)),
    ("SSDIST", {"E": {0}, "s": tuple(range(6))}, "E_s_xi", F(2)),
    ("JOINT_E", {"E": {0, 3}, "r": (3,)}, "rho_1_to_m", F(1, 3)),
    ("JOINT_E", {"E": {0, 3}, "r": (3, 3)}, "rho_2_to_m1", F(1, 3)),
])
def test_identity_examples(identity, params, key, expected):
    system = rotation(4) if identity == "TWOSETS" else rotation(6) if identity == "JOINT_E" else rotation(5)
    rep = evaluate_identity(system, params, identity)
    assert rep.equal
    assert rep.sides[key] == expected


def test_kacdec_needs_positive_gaps(z5):
    with pytest.raises(KacLabError):
        evaluate_identity(z5, {"E": {0}, "r": (0,), "r_inv": (3,)}, "KACDEC")


def test_higher_rank_needs_restriction():
    t = torus((3, 3))
    with pytest.raises(DimensionUnsupported):
        evaluate_identity(t, {"E": {0}}, "KAC")
    assert evaluate_identity(t.restrict_axis(1), {"E": {0}}, "KAC").equal


@given(st.integers(0, 10 ** 9))
def test_times_match_naive_search(seed):
    rng, system = system_from_seed(seed)
    E = random_hitting_set(rng, system)
    for w in system.points():
        assert return_time(system, E, w) == naive_return(system, E, w)
        assert return_time(system, E, w, INV) == naive_return(system, E, w, -1)
        assert arrival_time(system, E, w) == naive_arrival(system, E, w)
        assert arrival_time(system, E, w, INV) == naive_arrival(system, E, w, -1)


@given(st.integers(0, 10 ** 9), st.sampled_from(catalog()))
def test_every_identity_holds(seed, identity):
    rng, system = system_from_seed(seed)
    E = random_hitting_set(rng, system)
    params = sample_params(rng, system, identity, E)
    rep = evaluate_identity(system, params, identity)
    assert rep.equal, rep.sides
    # the hypergraph for JOINT_B needs a first arrival of at least one step
    if not (identity is IdentityCatalog.JOINT_B and params.r[0] == 0):
        assert any(label.startswith("chain") for label in rep.sides)


@given(st.integers(0, 10 ** 9))
def test_tail_sum_of_return_distribution_is_kac(seed):
    rng, system = system_from_seed(seed)
    E = random_hitting_set(rng, system)
    dist = evaluate_identity(system, IdentityParams(E), IdentityCatalog.KACDIST)
    kac = evaluate_identity(system, IdentityParams(E), IdentityCatalog.KAC)
    assert sum(dist.sides["P_rho_gt_n"]) == kac.sides["int_rho"] == kac.sides["mu_satur"]
