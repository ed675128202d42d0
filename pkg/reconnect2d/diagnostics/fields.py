"""Grid quadratures: L^p norms, the merger overlap functional and the symmetry residual."""
from __future__ import annotations

import math

import numpy as np

from reconnect2d.core.errors import ConfigurationError
from reconnect2d.spectral.grid import ScalarField, ScalarPair


def lp_norm(f: ScalarField, p: float) -> float:
    """h^2-weighted discrete L^p norm; p = inf gives the max norm."""
    if p == math.inf:
        return f.max_abs
    if not p >= 1:
        raise ConfigurationError("p", f"must be >= 1, got {p}")
    total = f.grid.cell_area * float(np.sum(np.abs(f.values) ** p))
    return total ** (1.0 / p)


def lp_distance(a: ScalarField, b: ScalarField, p: float) -> float:
    return lp_norm(a - b, p)


def overlap_integral(sigma: ScalarPair) -> float:
    return sigma.grid.cell_area * float(np.sum(sigma.plus.values * sigma.minus.values))


def symmetry_defect(sigma: ScalarPair) -> float:
    """Largest residual of sigma(-x1, x2) = -sigma(x1, x2) and sigma+(x1, x2) = sigma-(x1, -x2)."""
    grid = sigma.grid
    plus, minus = sigma.plus.values, sigma.minus.values
    odd_plus = np.max(np.abs(plus + grid.reflect_x1(plus)))
    odd_minus = np.max(np.abs(minus + grid.reflect_x1(minus)))
    mirror = np.max(np.abs(plus - grid.reflect_x2(minus)))
    return float(max(odd_plus, odd_minus, mirror))
