import numpy as np
import pytest

from reconnect2d.core.errors import ConfigurationError, ResolutionError
from reconnect2d.diagnostics.fields import lp_norm
from reconnect2d.solver.rescale import scale_initial_data, similarity_rescale
from reconnect2d.spectral.grid import ScalarPair, TorusGrid


def bump(X, Y, R=4.0):
    s = 1.0 - (X * X + Y * Y) / (R * R)
    return np.where(s > 0, s, 0.0) ** 3


@pytest.fixture
def tau():
    g = TorusGrid(128, 16.0)
    X, Y = g.mesh
    return ScalarPair.from_arrays(g, bump(X - 1.0, Y), -bump(X + 1.0, Y, R=3.0))


def test_unit_scale_is_identity(tau):
    assert scale_initial_data(tau, 1.0) is tau


def test_halving_samples_on_nodes(tau):
    out = scale_initial_data(tau, 0.5)
    X, Y = tau.grid.mesh
    assert out.grid == tau.grid
    assert np.allclose(out.plus.values, bump(2 * X - 1.0, 2 * Y), atol=1e-14)
    assert np.allclose(out.minus.values, -bump(2 * X + 1.0, 2 * Y, R=3.0), atol=1e-14)


def test_general_scale_keeps_peak_and_scales_mass(tau):
    out = scale_initial_data(tau, 0.75)
    assert out.plus.max_abs == pytest.approx(1.0, rel=1e-2)
    assert lp_norm(out.plus, 1.0) == pytest.approx(0.75**2 * lp_norm(tau.plus, 1.0), rel=1e-2)


def test_under_resolved_scale(tau):
    with pytest.raises(ResolutionError) as info:
        scale_initial_data(tau, 0.125)
    assert info.value.key.startswith("init.")


def test_support_must_vanish_at_the_edge():
    g = TorusGrid(32, 2.0)
    ones = ScalarPair.from_arrays(g, np.ones((32, 32)), np.zeros((32, 32)))
    with pytest.raises(ConfigurationError) as info:
        scale_initial_data(ones, 0.5)
    assert info.value.key == "init.plus"


@pytest.mark.parametrize("eps", [0.0, -0.5, 1.5])
def test_scale_range(tau, eps):
    with pytest.raises(ConfigurationError):
        scale_initial_data(tau, eps)
    with pytest.raises(ConfigurationError):
        similarity_rescale(tau, eps)


def test_similarity_rescale_shrinks_the_box(tau):
    out = similarity_rescale(tau, 0.25)
    assert out.grid.box == pytest.approx(4.0)
    assert np.array_equal(out.plus.values, tau.plus.values)
    assert lp_norm(out.plus, 1.0) == pytest.approx(0.0625 * lp_norm(tau.plus, 1.0))
