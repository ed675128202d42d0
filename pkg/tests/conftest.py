import math

import numpy as np
import pytest

from reconnect2d.observability.logging import configure_logging
from reconnect2d.spectral.grid import ScalarPair, TorusGrid


@pytest.fixture(autouse=True, scope="session")
def _quiet_logs():
    configure_logging("WARNING")


@pytest.fixture
def grid32():
    return TorusGrid(32, 2 * math.pi)


@pytest.fixture
def grid64():
    return TorusGrid(64, 2 * math.pi)


def smooth_random_pair(grid: TorusGrid, seed: int = 0, modes: int = 4) -> ScalarPair:
    """Random trigonometric polynomials with |k| <= modes, well inside the dealiased band."""
    rng = np.random.default_rng(seed)
    X, Y = grid.mesh
    scale = 2 * math.pi / grid.box
    out = []
    for _ in range(2):
        f = np.zeros_like(X)
        for kx in range(-modes, modes + 1):
            for ky in range(0, modes + 1):
                a, b = rng.normal(size=2) / (1 + kx * kx + ky * ky)
                phase = scale * (kx * X + ky * Y)
                f += a * np.cos(phase) + b * np.sin(phase)
        out.append(f)
    return ScalarPair.from_arrays(grid, out[0], out[1])


@pytest.fixture
def random_pair(grid32):
    return smooth_random_pair(grid32)


@pytest.fixture
def pair_factory():
    return smooth_random_pair
