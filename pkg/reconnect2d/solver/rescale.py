"""Length-scale changes of initial data: tau(x) -> tau(x / eps)."""
from __future__ import annotations

import numpy as np
from scipy.ndimage import map_coordinates

from reconnect2d.core.errors import ConfigurationError, ResolutionError
from reconnect2d.spectral.grid import ScalarField, ScalarPair, TorusGrid

MIN_SUPPORT_CELLS = 16
BOUNDARY_TOL = 1e-12


def _support_width_cells(values: np.ndarray, threshold: float) -> int:
    mask = np.abs(values) > threshold
    if not mask.any():
        return 0
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    return int(min(rows[-1] - rows[0] + 1, cols[-1] - cols[0] + 1))


def _boundary_max(values: np.ndarray) -> float:
    return float(max(np.abs(values[0]).max(), np.abs(values[-1]).max(),
                     np.abs(values[:, 0]).max(), np.abs(values[:, -1]).max()))


def _scale_field(f: ScalarField, eps: float) -> ScalarField:
    grid = f.grid
    inv = 1.0 / eps
    X, Y = grid.mesh
    inside = (np.abs(X * inv) <= 0.5 * grid.box) & (np.abs(Y * inv) <= 0.5 * grid.box)
    if abs(inv - round(inv)) < 1e-12:
        # Dyadic-type factors map nodes onto nodes.
        m = int(round(inv))
        idx = (np.arange(grid.n) - grid.n // 2) * m + grid.n // 2
        cols, rows = np.meshgrid(idx, idx, indexing="xy")
        ok = inside & (cols >= 0) & (cols < grid.n) & (rows >= 0) & (rows < grid.n)
        out = np.zeros_like(f.values)
        out[ok] = f.values[rows[ok], cols[ok]]
    else:
        cols = (X * inv + 0.5 * grid.box) / grid.spacing
        rows = (Y * inv + 0.5 * grid.box) / grid.spacing
        out = map_coordinates(f.values, [rows, cols], order=3, mode="constant", cval=0.0)
        out[~inside] = 0.0
    return ScalarField(grid, out)


def scale_initial_data(tau: ScalarPair, eps: float) -> ScalarPair:
    """Sample tau(x / eps) on the same grid.

    Raises:
        ConfigurationError: eps outside (0, 1] or tau not vanishing at the box edge
        ResolutionError: the scaled support spans fewer than 16 cells
    """
    if not (0 < eps <= 1):
        raise ConfigurationError("eps", f"must satisfy 0 < eps <= 1, got {eps}")
    if eps == 1:
        return tau
    peak = tau.max_abs
    for name, f in (("plus", tau.plus), ("minus", tau.minus)):
        if _boundary_max(f.values) > BOUNDARY_TOL * max(peak, 1.0):
            raise ConfigurationError(f"init.{name}", "support reaches the box edge; cannot rescale")
    out = ScalarPair(_scale_field(tau.plus, eps), _scale_field(tau.minus, eps), tau.time)
    for name, f in (("plus", out.plus), ("minus", out.minus)):
        width = _support_width_cells(f.values, 1e-6 * max(peak, 1e-300))
        if 0 < width < MIN_SUPPORT_CELLS:
            raise ResolutionError(f"init.{name}", f"scaled support spans {width} cells (< {MIN_SUPPORT_CELLS})")
    return out


def similarity_rescale(tau: ScalarPair, eps: float) -> ScalarPair:
    """tau(x / eps) on a grid of side eps * box with the same node count."""
    if not (0 < eps <= 1):
        raise ConfigurationError("eps", f"must satisfy 0 < eps <= 1, got {eps}")
    grid: TorusGrid = tau.grid.scaled(eps)
    return tau.on_grid(grid)
