import math

import numpy as np
from hypothesis import given, strategies as st

from kac_chain_lab.mc import BLOCK, McEstimate, Moments, run_blocks, run_blocks_multi, stream


def test_streams_are_keyed_by_seed_and_block():
    a = stream(5, 0).random(4)
    assert np.array_equal(a, stream(5, 0).random(4))
    assert not np.array_equal(a, stream(5, 1).random(4))
    assert not np.array_equal(a, stream(6, 0).random(4))


def test_threads_do_not_change_the_estimate():
    draw = lambda rng, n: rng.exponential(size=n)  # noqa: E731
    serial = run_blocks(draw, 5 * BLOCK + 17, seed=11)
    threaded = run_blocks(draw, 5 * BLOCK + 17, seed=11, jobs=4)
    assert serial == threaded
    multi = run_blocks_multi(lambda rng, n: rng.random((n, 3)), 3 * BLOCK, seed=2, jobs=3)
    assert multi == run_blocks_multi(lambda rng, n: rng.random((n, 3)), 3 * BLOCK, seed=2)


def test_estimate_matches_numpy_on_the_same_draws():
    values = np.concatenate([stream(9, b).random(min(BLOCK, 20000 - b * BLOCK)) for b in range(3)])
    est = run_blocks(lambda rng, n: rng.random(n), 20000, seed=9)
    assert math.isclose(est.mean, values.mean(), rel_tol=1e-12)
    assert math.isclose(est.stderr, values.std(ddof=1) / math.sqrt(values.size), rel_tol=1e-9)


def test_zero_variance_and_floor():
    est = run_blocks(lambda rng, n: np.full(n, 0.7), 1000, seed=0)
    assert est.stderr == 0 and est.within(0.7)
    assert not est.within(0.7001)


@given(st.lists(st.floats(-1e3, 1e3), min_size=1, max_size=40), st.integers(1, 39))
def test_merge_is_order_free(values, cut):
    arr = np.array(values)
    cut = min(cut, len(values))
    whole = Moments.of(arr)
    parts = Moments.merge([Moments.of(arr[:cut]), Moments.of(arr[cut:])])
    assert parts.count == whole.count
    assert math.isclose(parts.total, whole.total, abs_tol=1e-9)
    assert math.isclose(parts.total_sq, whole.total_sq, rel_tol=1e-12, abs_tol=1e-9)


def test_within_uses_k_standard_errors():
    est = McEstimate(1.0, 0.1, 100, 0)
    assert est.within(1.29) and not est.within(1.31)
    assert est.within(1.19, k=2) and not est.within(1.21, k=2)
