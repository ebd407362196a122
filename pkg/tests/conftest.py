"""Shared fixtures: ground-state profiles are expensive, so one session cache.

Profiles come in two reaches: r_max = 50 (kernel-accuracy work) and r_max = 1e3
(decay fitting). Every test pulls from the same cache so the whole suite pays
for each (pair, reach) combination once.
"""

from __future__ import annotations

import numpy as np
import pytest

from emdenlab.channels import kernel_nullity_shooting
from emdenlab.grids import RadialGrid
from emdenlab.ground_state import shoot_bisection
from emdenlab.hyperbola import pair_from_p

TEST_POINTS = {
    "bubble": (4, 3.0),  # closed form, super-Serrin
    "sub": (5, 1.0),  # sub-Serrin, q = 9
    "log": (3, 3.0),  # Serrin threshold, q = 11
    "super": (5, 2.0),  # super-Serrin, q = 11/4
}


@pytest.fixture(scope="session")
def profile_cache():
    cache = {}

    def get(name: str, wide: bool = False):
        key = (name, wide)
        if key not in cache:
            N, p = TEST_POINTS[name]
            grid = RadialGrid.log_spaced(1e-3, 1e3 if wide else 50.0, per_decade=400)
            cache[key] = shoot_bisection(
                pair_from_p(N, p), bracket=(0.5, 2.0), grid=grid, auto_expand=True
            )
        return cache[key]

    return get


@pytest.fixture(scope="session")
def channel_cache(profile_cache):
    """Channel shooting analyses keyed by (point name, ell); computed once."""
    cache = {}

    def get(name: str, ell: int):
        key = (name, ell)
        if key not in cache:
            cache[key] = kernel_nullity_shooting(profile_cache(name)[1], ell)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def bubble50(profile_cache):
    return profile_cache("bubble")[1]


@pytest.fixture(scope="session")
def bubble_wide(profile_cache):
    return profile_cache("bubble", wide=True)[1]


@pytest.fixture(scope="session")
def sub_wide(profile_cache):
    return profile_cache("sub", wide=True)[1]


@pytest.fixture(scope="session")
def log_wide(profile_cache):
    return profile_cache("log", wide=True)[1]


@pytest.fixture(scope="session")
def super_wide(profile_cache):
    return profile_cache("super", wide=True)[1]


@pytest.fixture(scope="session")
def super50(profile_cache):
    return profile_cache("super")[1]


@pytest.fixture(scope="session")
def sub50(profile_cache):
    return profile_cache("sub")[1]


@pytest.fixture(scope="session")
def log50(profile_cache):
    return profile_cache("log")[1]


def bubble_exact(r: np.ndarray) -> np.ndarray:
    """Closed-form ground state at N=4, p=q=3 (u = v)."""
    return 1.0 / (1.0 + np.asarray(r) ** 2 / 8.0)
