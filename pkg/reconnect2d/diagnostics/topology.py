"""Topology of F: support components and the level-1/2 trichotomy."""
from __future__ import annotations

import numpy as np
from pydantic import BaseModel, Field
from scipy import ndimage
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from reconnect2d.spectral.grid import ScalarField

# 4-connectivity
_CROSS = ndimage.generate_binary_structure(2, 1)
HALF = 0.5
LEVEL_TOL = 1e-12


def _merge_seams(labels: np.ndarray, count: int) -> tuple[int, np.ndarray]:
    """Join labels that meet across the periodic edges (row 0 / n-1, column 0 / n-1)."""
    a = np.concatenate((labels[0, :], labels[:, 0]))
    b = np.concatenate((labels[-1, :], labels[:, -1]))
    touch = (a > 0) & (b > 0) & (a != b)
    if not np.any(touch):
        return count, labels
    graph = coo_matrix((np.ones(int(touch.sum())), (a[touch] - 1, b[touch] - 1)), shape=(count, count))
    merged, roots = connected_components(graph, directed=False)
    out = np.zeros_like(labels)
    inside = labels > 0
    out[inside] = roots[labels[inside] - 1] + 1
    return int(merged), out


def support_components(f: ScalarField, theta: float) -> tuple[int, np.ndarray]:
    """Label the 4-connected components of {|f| > theta} on the torus."""
    if not theta > 0:
        raise ValueError("theta must be > 0")
    labels, count = ndimage.label(np.abs(f.values) > theta, structure=_CROSS)
    return _merge_seams(labels, int(count))


def relative_components(f: ScalarField, rel_threshold: float = 1e-6) -> int:
    peak = f.max_abs
    if peak == 0.0:
        return 0
    return support_components(f, rel_threshold * peak)[0]


class TrichotomyReport(BaseModel):
    """Grid evidence for the three ways the level set {|F| = 1/2} can change."""

    max_abs_F: float
    exceeds_half: bool = Field(description="Branch (a): {|F| > 1/2} is non-empty.")
    boundary_case: bool = Field(description="max|F| equals 1/2 to rounding.")
    crossing_clusters: int = Field(description="Connected clusters of nodes on the 1/2 level; proxy for cardinality.")
    many_level_points: bool = Field(description="Branch (b): more than four level clusters.")
    critical_values: list[float] = Field(default_factory=list, description="Branch (c) candidates in (0, 1/2).")

    @property
    def any_branch(self) -> bool:
        return self.exceeds_half or self.many_level_points or bool(self.critical_values)


def _level_nodes(absF: np.ndarray) -> np.ndarray:
    g = absF - HALF
    g = np.where(np.abs(g) <= LEVEL_TOL, 0.0, g)
    on = g == 0.0
    sign = np.sign(g)
    for axis in (0, 1):
        for shift in (1, -1):
            nb = np.roll(sign, shift, axis=axis)
            on |= (sign * nb) < 0
    return on


def _cell_corners(G: np.ndarray) -> np.ndarray:
    down = np.roll(G, -1, 0)
    return np.stack((G, down, np.roll(G, -1, 1), np.roll(down, -1, 1)))


def _changes_sign(G: np.ndarray) -> np.ndarray:
    corners = _cell_corners(G)
    lo, hi = corners.min(axis=0), corners.max(axis=0)
    return (lo <= 0) & (hi >= 0) & (hi > lo)


def _critical_cells(F: np.ndarray, h: float, floor: float) -> list[float]:
    Fx = (np.roll(F, -1, axis=1) - np.roll(F, 1, axis=1)) / (2 * h)
    Fy = (np.roll(F, -1, axis=0) - np.roll(F, 1, axis=0)) / (2 * h)
    cell_value = _cell_corners(F).mean(axis=0)
    corners = np.abs(_cell_corners(F))
    inside_band = (corners.min(axis=0) > floor) & (corners.max(axis=0) < HALF - 1e-9)
    mask = _changes_sign(Fx) & _changes_sign(Fy) & inside_band
    if not mask.any():
        return []
    labels, count = ndimage.label(mask, structure=_CROSS)
    values = ndimage.mean(np.abs(cell_value), labels, index=np.arange(1, count + 1))
    return sorted(float(v) for v in np.atleast_1d(values))


def trichotomy_report(F: ScalarField, rel_floor: float = 1e-3) -> TrichotomyReport:
    """Best-effort report on the three trichotomy branches.

    Critical cells are those where both centred partials change sign across the cell's
    corners; cells where |F| drops below ``rel_floor * max|F|`` are ignored.
    """
    absF = np.abs(F.values)
    peak = float(absF.max())
    if peak == 0.0:
        return TrichotomyReport(
            max_abs_F=0.0, exceeds_half=False, boundary_case=False, crossing_clusters=0, many_level_points=False
        )
    on = _level_nodes(absF)
    _, clusters = ndimage.label(on, structure=_CROSS)
    critical = _critical_cells(F.values, F.grid.spacing, rel_floor * peak)
    return TrichotomyReport(
        max_abs_F=peak,
        exceeds_half=peak > HALF + LEVEL_TOL,
        boundary_case=abs(peak - HALF) <= LEVEL_TOL,
        crossing_clusters=int(clusters),
        many_level_points=int(clusters) > 4,
        critical_values=critical,
    )
