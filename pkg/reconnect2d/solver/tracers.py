"""Lagrangian markers carried by the plus and minus flows."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.ndimage import map_coordinates

from reconnect2d.spectral.grid import TorusGrid, VectorField

# (points (N, 2), stage time) -> velocities (N, 2)
VelocitySampler = Callable[[np.ndarray, float], np.ndarray]


@dataclass
class TracerSet:
    """Markers started at ``labels`` and advanced under the plus and minus velocities.

    ``plus`` and ``minus`` hold one (N, 2) position array per entry of ``times``.
    """

    labels: np.ndarray
    times: list[float] = field(default_factory=list)
    plus: list[np.ndarray] = field(default_factory=list)
    minus: list[np.ndarray] = field(default_factory=list)

    def __post_init__(self) -> None:
        self.labels = np.asarray(self.labels, dtype=np.float64).reshape(-1, 2)
        if not self.times:
            self.times = [0.0]
            self.plus = [self.labels.copy()]
            self.minus = [self.labels.copy()]
        if not (len(self.times) == len(self.plus) == len(self.minus)):
            raise ValueError("trajectory arrays must share the time stamps")

    @property
    def time(self) -> float:
        return self.times[-1]

    def current(self) -> tuple[np.ndarray, np.ndarray]:
        return self.plus[-1], self.minus[-1]

    def record(self, time: float, plus: np.ndarray, minus: np.ndarray) -> "TracerSet":
        return TracerSet(
            self.labels,
            [*self.times, time],
            [*self.plus, plus],
            [*self.minus, minus],
        )


def wrap(points: np.ndarray, box: float) -> np.ndarray:
    return (points + 0.5 * box) % box - 0.5 * box


def periodic_distance(a: np.ndarray, b: np.ndarray, box: float) -> np.ndarray:
    return np.linalg.norm(wrap(a - b, box), axis=-1)


def interpolate(grid: TorusGrid, values: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Bilinear periodic interpolation of a node field at arbitrary points."""
    h = grid.spacing
    cols = (points[:, 0] + 0.5 * grid.box) / h
    rows = (points[:, 1] + 0.5 * grid.box) / h
    return map_coordinates(values, [rows, cols], order=1, mode="grid-wrap")


def field_sampler(v_start: VectorField, v_end: VectorField | None = None, dt: float = 1.0) -> VelocitySampler:
    """Sampler for one solver step, linear in time between the start and end velocities."""
    grid = v_start.grid

    def sample(points: np.ndarray, stage: float) -> np.ndarray:
        u = np.stack((interpolate(grid, v_start.v1, points), interpolate(grid, v_start.v2, points)), axis=-1)
        if v_end is None:
            return u
        w = np.stack((interpolate(grid, v_end.v1, points), interpolate(grid, v_end.v2, points)), axis=-1)
        theta = stage / dt
        return (1.0 - theta) * u + theta * w

    return sample


def rk4_points(points: np.ndarray, velocity: VelocitySampler, dt: float) -> np.ndarray:
    k1 = velocity(points, 0.0)
    k2 = velocity(points + 0.5 * dt * k1, 0.5 * dt)
    k3 = velocity(points + 0.5 * dt * k2, 0.5 * dt)
    k4 = velocity(points + dt * k3, dt)
    return points + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def advect_tracers(
    tracers: TracerSet,
    velocity_plus: VelocitySampler,
    velocity_minus: VelocitySampler,
    dt: float,
    box: float | None = None,
) -> TracerSet:
    """RK4 advance of both marker families by dt; positions wrapped when ``box`` is given."""
    plus, minus = tracers.current()
    new_plus = rk4_points(plus, velocity_plus, dt)
    new_minus = rk4_points(minus, velocity_minus, dt)
    if box is not None:
        new_plus, new_minus = wrap(new_plus, box), wrap(new_minus, box)
    return tracers.record(tracers.time + dt, new_plus, new_minus)
