import random

import pytest
from hypothesis import HealthCheck, settings

from kac_chain_lab.action import random_system, rotation, torus

settings.register_profile(
    "default", deadline=None, max_examples=60, derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


@pytest.fixture
def z5():
    return rotation(5)


@pytest.fixture
def z6():
    return rotation(6)


@pytest.fixture
def torus44():
    return torus((4, 4))


def system_from_seed(seed: int, d: int = 1, max_points: int = 24):
    rng = random.Random(seed)
    return rng, random_system(rng, d, max_points)
