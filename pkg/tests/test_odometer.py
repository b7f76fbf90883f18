import itertools
import random
from fractions import Fraction as F

import pytest
from hypothesis import given, strategies as st

from kac_chain_lab.action import act, random_hitting_set, rotation, torus
from kac_chain_lab.errors import DepthInsufficient, KacLabError
from kac_chain_lab.odometer import (
    DyadicParameter, aw_expect_cardS, aw_kac_conditions, aw_sample, aw_target, cube_of, random_samples,
)


def naive_target(system, E, w, alpha, x):
    """Walk up the hierarchy; return the lexicographically first visit in the first cube that has one."""
    for n in range(1, alpha.D + 1):
        lo = cube_of(x, alpha, n).lo
        cube = itertools.product(*(range(c, c + (1 << n)) for c in lo))
        visits = [y for y in cube if act(system, y, w) in E]
        if visits:
            return min(visits)
    raise AssertionError("no visit in the top cube")


def naive_S(system, E, w, alpha):
    lo = cube_of((0,) * alpha.d, alpha, alpha.D).lo
    cube = itertools.product(*(range(c, c + (1 << alpha.D)) for c in lo))
    zero = (0,) * alpha.d
    return {x for x in cube if naive_target(system, E, w, alpha, x) == zero}


def test_cube_of_examples():
    alpha = DyadicParameter(1, 3, (5,))
    c = cube_of((0,), alpha, 1)
    assert (c.index, c.lo, c.side) == ((2,), (-1,), 2)
    assert cube_of((2,), alpha, 2).lo == (-1,)
    two = DyadicParameter(2, 2, (1, 2))
    assert cube_of((1, 1), two, 2).index == (0, 0) and cube_of((3, 3), two, 2).index == (1, 1)
    with pytest.raises(KacLabError):
        cube_of((0,), alpha, 4)


def test_parameter_reduces_mod_2_to_the_depth():
    assert DyadicParameter(1, 2, (6,)).alpha == (2,)
    assert DyadicParameter(1, 3, (6,)).digits == ((0, 1, 1),)


def test_target_examples():
    z2 = rotation(2)
    alpha = DyadicParameter(1, 1, (0,))
    assert aw_target(z2, {0}, 0, alpha, (0,)) == (0,)
    assert aw_target(z2, {0}, 1, alpha, (0,)) == (1,)
    assert aw_sample(z2, {0}, 0, alpha).S == {(0,), (1,)}
    assert aw_sample(z2, {0}, 1, alpha).S == frozenset()


def test_full_set_targets_the_level_one_corner():
    t = torus((4, 4))
    alpha = DyadicParameter(2, 3, (3, 6))
    for x in itertools.product(range(-4, 4), repeat=2):
        assert aw_target(t, set(t.points()), 5, alpha, x) == cube_of(x, alpha, 1).lo
    for smp in random_samples(t, set(t.points()), 3, 50, seed=1):
        assert smp.phi <= 1


def test_expected_card_is_one():
    assert aw_expect_cardS(rotation(6), {0, 3}, 3) == 1
    assert aw_expect_cardS(torus((2, 2)), {0}, 2) == 1


def test_depth_too_small():
    with pytest.raises(DepthInsufficient):
        aw_expect_cardS(rotation(8), {0}, 2)
    with pytest.raises(DepthInsufficient):
        aw_sample(rotation(3), set(), 0, DyadicParameter(1, 2, (0,)))


def test_exhaustive_conditions_on_small_torus():
    rep = aw_kac_conditions(torus((4, 4)), {0, 5}, 3)
    assert rep.ok and rep.first_failure is None
    assert rep.configurations == 16 * 64
    assert rep.expect_phi_d <= 4


def test_thickness_on_random_samples():
    t = torus((4, 4))
    samples = random_samples(t, {0}, 4, 2000, seed=3)
    assert all(s.thick() for s in samples)
    assert any(s.S for s in samples)


@given(st.integers(0, 10 ** 9), st.integers(1, 2))
def test_sample_matches_definition(seed, d):
    rng = random.Random(seed)
    sizes = [rng.choice([2, 4]) for _ in range(d)]
    system = torus(sizes)
    E = random_hitting_set(rng, system, density=0.3) | {0}
    D = 3 if d == 1 else 2
    alpha = DyadicParameter(d, D, tuple(rng.randrange(1 << D) for _ in range(d)))
    w = rng.randrange(system.n_points)
    assert aw_sample(system, E, w, alpha).S == naive_S(system, E, w, alpha)


@given(st.integers(0, 10 ** 9))
def test_targets_move_with_the_action(seed):
    # seen from y, the configuration is (T^y w, alpha + y) and every target shifts by -y
    rng = random.Random(seed)
    system = torus((4, 4))
    E = {0, rng.randrange(16)}
    D = 3
    alpha = DyadicParameter(2, D, (rng.randrange(8), rng.randrange(8)))
    w = rng.randrange(16)
    x = (rng.randint(-8, 8), rng.randint(-8, 8))
    y = (rng.randint(-8, 8), rng.randint(-8, 8))
    here = aw_target(system, E, w, alpha, x)
    there = aw_target(system, E, act(system, y, w), alpha.shifted(y), tuple(a - b for a, b in zip(x, y)))
    assert there == tuple(a - b for a, b in zip(here, y))
