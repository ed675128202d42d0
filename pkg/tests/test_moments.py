import numpy as np
import pytest

from reconnect2d.core.errors import ConfigurationError, DomainError
from reconnect2d.diagnostics.moments import moment_rhs_oracle, quadrant_mask, quadrant_moments
from reconnect2d.domain.models import LEFT_UNSCREENED, RIGHT_SCREENED, RIGHT_UNSCREENED
from reconnect2d.scenarios.presets import smooth_merger_pair
from reconnect2d.solver.eulerian import SolverState, rhs, step_rk4
from reconnect2d.spectral.grid import ScalarField, ScalarPair, TorusGrid


@pytest.fixture(scope="module")
def merger_data():
    return smooth_merger_pair(TorusGrid(128, 12.8))


def test_quadrant_excludes_axes():
    g = TorusGrid(16, 2.0)
    mask = quadrant_mask(g)
    X, Y = g.mesh
    assert np.all(X[mask] > 0) and np.all(Y[mask] > 0)
    assert np.count_nonzero(mask) == 7 * 7


def test_quadrant_moments_of_constant():
    g = TorusGrid(16, 2.0)
    E1, E2 = quadrant_moments(ScalarField(g, np.ones((16, 16))))
    h = g.spacing
    expected = h * h * 7 * h * sum(range(1, 8))
    assert E1 == pytest.approx(expected)
    assert E2 == pytest.approx(expected)


def test_oracle_rejects_bad_input(merger_data):
    with pytest.raises(ConfigurationError):
        moment_rhs_oracle(merger_data, LEFT_UNSCREENED)
    flipped = ScalarPair(merger_data.minus, merger_data.plus)
    with pytest.raises(DomainError):
        moment_rhs_oracle(flipped, RIGHT_UNSCREENED)
    g = merger_data.grid
    X, Y = g.mesh
    mixed = np.where(Y > 0, np.sin(X) * np.sin(Y), 0.0)
    with pytest.raises(DomainError):
        moment_rhs_oracle(ScalarPair.from_arrays(g, mixed, g.reflect_x2(mixed)), RIGHT_UNSCREENED)


def test_oracle_of_zero_state():
    g = TorusGrid(32, 4.0)
    zero = ScalarPair(ScalarField.zeros(g), ScalarField.zeros(g))
    assert moment_rhs_oracle(zero, RIGHT_UNSCREENED) == (0.0, 0.0)


def test_oracle_matches_solver_tendency(merger_data):
    tendency = rhs(SolverState(merger_data, RIGHT_UNSCREENED)).plus
    d1, d2 = quadrant_moments(tendency)
    o1, o2 = moment_rhs_oracle(merger_data, RIGHT_UNSCREENED)
    assert d1 > 0 and d2 > 0
    assert o1 == pytest.approx(d1, rel=1e-2)
    assert o2 == pytest.approx(d2, rel=1e-2)


def test_screened_oracle_matches_solver_tendency(merger_data):
    tendency = rhs(SolverState(merger_data, RIGHT_SCREENED)).plus
    d1, d2 = quadrant_moments(tendency)
    o1, o2 = moment_rhs_oracle(merger_data, RIGHT_SCREENED)
    tol = 1e-2 * np.hypot(o1, o2)
    assert o1 == pytest.approx(d1, abs=tol)
    assert o2 == pytest.approx(d2, abs=tol)


def test_screened_correction_changes_the_rates(merger_data):
    plain = moment_rhs_oracle(merger_data, RIGHT_UNSCREENED)
    screened = moment_rhs_oracle(merger_data, RIGHT_SCREENED)
    assert abs(screened[0] - plain[0]) + abs(screened[1] - plain[1]) > 1e-2 * np.hypot(*plain)


def test_centred_difference_matches_oracle(merger_data):
    dt = 0.01
    start = SolverState(merger_data, RIGHT_UNSCREENED)
    mid = step_rk4(start, dt)
    end = step_rk4(mid, dt)
    d2 = (quadrant_moments(end.sigma.plus)[1] - quadrant_moments(start.sigma.plus)[1]) / (2 * dt)
    assert moment_rhs_oracle(mid.sigma, RIGHT_UNSCREENED)[1] == pytest.approx(d2, rel=1e-2)


def test_plane_kernel_two_point_sum():
    g = TorusGrid(32, 8.0)
    h2 = g.cell_area
    points = [((1.0, 1.5), -1.0), ((2.0, 0.5), -2.0)]
    plus = np.zeros((32, 32))
    for (x1, x2), m in points:
        plus[g.node_index(x2), g.node_index(x1)] = m
    sigma = ScalarPair.from_arrays(g, plus, np.zeros((32, 32)))

    e1 = e2 = 0.0
    for (x1, x2), mx in points:
        for (y1, y2), my in points:
            w = h2 * mx * h2 * my
            summed = (x1 + y1) ** 2 + (x2 + y2) ** 2
            reflected = (x1 - y1) ** 2 + (x2 + y2) ** 2
            e1 += w * x1 * y1 * (x2 + y2) / (reflected * summed)
            e2 += w * (x1 + y1) / summed
    expected = (2 / np.pi * e1, e2 / (2 * np.pi))

    got = moment_rhs_oracle(sigma, RIGHT_UNSCREENED, kernel="plane")
    assert got == pytest.approx(expected, rel=1e-12)
    assert got[0] > 0 and got[1] > 0


def test_unknown_oracle_kernel(merger_data):
    with pytest.raises(ConfigurationError):
        moment_rhs_oracle(merger_data, RIGHT_UNSCREENED, kernel="images")


def test_oracle_scales_with_reporting_length(merger_data):
    a = moment_rhs_oracle(merger_data, RIGHT_UNSCREENED)
    b = moment_rhs_oracle(merger_data, RIGHT_UNSCREENED, R=2.0)
    assert b == pytest.approx((a[0] / 8, a[1] / 8))
