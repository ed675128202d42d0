import math

import numpy as np
import pytest

from reconnect2d.solver.tracers import (
    TracerSet,
    advect_tracers,
    field_sampler,
    interpolate,
    periodic_distance,
    rk4_points,
    wrap,
)
from reconnect2d.spectral.grid import TorusGrid, VectorField


def _still(points, stage):
    return np.zeros_like(points)


def _rotation(points, stage):
    return np.stack((-points[:, 1], points[:, 0]), axis=-1)


def test_tracer_set_starts_at_labels():
    tracers = TracerSet(np.array([[0.1, 0.2], [0.3, 0.4]]))
    assert tracers.time == 0.0
    plus, minus = tracers.current()
    assert np.array_equal(plus, tracers.labels)
    assert np.array_equal(minus, tracers.labels)
    with pytest.raises(ValueError):
        TracerSet(tracers.labels, [0.0, 1.0], [plus], [minus])


def test_still_flow_leaves_markers_in_place():
    tracers = TracerSet(np.array([[0.5, -0.5]]))
    moved = advect_tracers(tracers, _still, _still, 0.1)
    assert moved.times == [0.0, pytest.approx(0.1)]
    assert np.array_equal(moved.plus[-1], tracers.labels)
    assert len(tracers.times) == 1


def test_uniform_flow_translates_and_wraps():
    def drift(points, stage):
        return np.tile([1.0, 0.0], (len(points), 1))

    tracers = TracerSet(np.array([[0.9, 0.0]]))
    moved = advect_tracers(tracers, drift, _still, 0.3, box=2.0)
    assert moved.plus[-1] == pytest.approx(np.array([[-0.8, 0.0]]))
    assert moved.minus[-1] == pytest.approx(np.array([[0.9, 0.0]]))


def test_rk4_follows_rigid_rotation():
    points = np.array([[1.0, 0.0], [0.0, 2.0]])
    for _ in range(100):
        points = rk4_points(points, _rotation, 0.01)
    assert points[0].tolist() == pytest.approx([math.cos(1.0), math.sin(1.0)], abs=1e-9)
    assert points[1].tolist() == pytest.approx([-2 * math.sin(1.0), 2 * math.cos(1.0)], abs=1e-9)


def test_wrap_and_periodic_distance():
    assert wrap(np.array([1.2, -1.2, 0.3]), 2.0).tolist() == pytest.approx([-0.8, 0.8, 0.3])
    a = np.array([[0.95, 0.0]])
    b = np.array([[-0.95, 0.0]])
    assert periodic_distance(a, b, 2.0).tolist() == pytest.approx([0.1])


def test_interpolation_is_bilinear_and_periodic():
    g = TorusGrid(16, 2.0)
    h = g.spacing
    values = np.tile(np.arange(16, dtype=float), (16, 1))
    x0 = -1.0 + 3 * h
    points = np.array([[x0, 0.0], [x0 + 0.25 * h, 0.0], [x0 + 0.5 * h, 0.3]])
    assert interpolate(g, values, points).tolist() == pytest.approx([3.0, 3.25, 3.5])
    # last column blends back into the first
    assert interpolate(g, values, np.array([[1.0 - 0.5 * h, 0.0]])).tolist() == pytest.approx([7.5])


def test_field_sampler_blends_in_time(grid32):
    ones = np.ones((32, 32))
    start = VectorField(grid32, ones, 0.0 * ones)
    end = VectorField(grid32, 3.0 * ones, ones)
    pts = np.array([[0.0, 0.0], [1.0, -2.0]])
    assert field_sampler(start)(pts, 0.7) == pytest.approx(np.tile([1.0, 0.0], (2, 1)))
    mid = field_sampler(start, end, dt=0.5)(pts, 0.25)
    assert mid == pytest.approx(np.tile([2.0, 0.5], (2, 1)))
