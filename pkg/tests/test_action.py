from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from kac_chain_lab.action import (
    FiniteSystem, act, add, disjoint_union, first_violation, from_descriptor, from_permutations,
    invariant_measure_check, orbit, random_hitting_set, rotation, saturation, to_descriptor, torus,
)
from kac_chain_lab.errors import InvalidSystem
from conftest import system_from_seed


def test_act_examples(z5, torus44):
    assert act(z5, (3,), 1) == 4
    assert act(z5, (0,), 2) == 2
    assert act(torus44, (1, 2), torus44.index_of((3, 3))) == torus44.index_of((0, 1))


def test_act_handles_large_and_negative_offsets(z5):
    assert act(z5, (-1,), 0) == 4
    assert act(z5, (10 ** 12 + 2,), 0) == 2


def test_orbits():
    assert orbit(rotation(6, step=2), 0) == {0, 2, 4}
    assert orbit(rotation(5), 3) == set(range(5))
    two = disjoint_union([rotation(3), rotation(3)])
    assert orbit(two, 0) == {0, 1, 2}


def test_saturation_examples():
    assert saturation(rotation(5), {0}) == set(range(5))
    two = disjoint_union([rotation(3), rotation(3)])
    assert saturation(two, {1}) == {0, 1, 2}
    assert saturation(two, set()) == frozenset()


def test_invariant_measure_check():
    z4 = [1, 2, 3, 0]
    assert invariant_measure_check(rotation(4))
    bad = FiniteSystem.unchecked(1, (F(1, 2), F(1, 2), F(0), F(0)), (tuple(z4),))
    assert not invariant_measure_check(bad)
    assert "invariant" in first_violation(bad) or "weight" in first_violation(bad)
    swaps = from_permutations([[1, 0, 3, 2]], [F(1, 3), F(1, 3), F(1, 6), F(1, 6)])
    assert invariant_measure_check(swaps)


@pytest.mark.parametrize("weights, maps", [
    ((F(1, 2), F(1, 4), F(1, 4)), ((1, 2, 0),)),        # not invariant
    ((F(1, 2), F(1, 2), F(1, 2)), ((1, 2, 0),)),        # mass 3/2
    ((F(1, 2), F(1, 2)), ((0, 0),)),                    # not a bijection
    ((F(1, 4),) * 4, ((1, 0, 2, 3), (0, 2, 1, 3))),     # generators do not commute
])
def test_constructor_rejects_broken_systems(weights, maps):
    with pytest.raises(InvalidSystem):
        FiniteSystem(len(maps), weights, maps)


def test_descriptor_round_trip(torus44):
    again = from_descriptor(to_descriptor(torus44))
    assert again.maps == torus44.maps and again.weights == torus44.weights
    sized = from_descriptor({"d": 2, "sizes": [4, 4]})
    assert sized.maps == torus44.maps


def test_descriptor_rejects_bad_weights():
    with pytest.raises(InvalidSystem):
        from_descriptor({"d": 1, "sizes": [2], "weights": ["1", "1"]})
    with pytest.raises(InvalidSystem):
        from_descriptor({"d": 1, "sizes": [2], "weights": [0.5, 0.5]})


group_elements = st.tuples(st.integers(-40, 40), st.integers(-40, 40))


@given(st.integers(0, 10 ** 9), group_elements, group_elements)
def test_group_law(seed, x, y):
    _, system = system_from_seed(seed, d=2)
    for w in system.points():
        assert act(system, add(x, y), w) == act(system, x, act(system, y, w))
        assert act(system, (0, 0), w) == w


@given(st.integers(0, 10 ** 9))
def test_saturation_idempotent_and_monotone(seed):
    rng, system = system_from_seed(seed, d=rng_d(seed))
    E = random_hitting_set(rng, system, density=0.2) - {0}
    small = frozenset(list(E)[: len(E) // 2])
    sat = saturation(system, E)
    assert saturation(system, sat) == sat
    assert saturation(system, small) <= sat


def rng_d(seed: int) -> int:
    return 1 + seed % 2


@given(st.integers(0, 10 ** 9))
def test_invariant_weights_are_constant_on_orbits(seed):
    _, system = system_from_seed(seed, d=rng_d(seed))
    for orb in system.orbits:
        assert len({system.weights[w] for w in orb}) == 1


@given(st.integers(0, 10 ** 9))
def test_forward_visit_implies_past_visit(seed):
    # on a finite system the saturation equals the set of points that visited E in the past or present
    rng, system = system_from_seed(seed)
    E = frozenset(w for w in system.points() if rng.random() < 0.2)
    past = {w for w in system.points() if any(act(system, (-k,), w) in E for k in range(system.n_points))}
    assert past == saturation(system, E)
