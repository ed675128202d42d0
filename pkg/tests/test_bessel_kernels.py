import numpy as np
import pytest
from scipy import special

from reconnect2d.core.errors import DomainError
from reconnect2d.kernels import (
    bessel_k0,
    bessel_k1,
    gbar,
    gtilde,
    gtilde_any,
    kernel_calK,
    kernel_checks,
    series_k0_k1,
)

RADII = np.array([1e-6, 1e-3, 0.05, 0.5, 1.0, 1.99, 2.0, 2.01, 5.0, 12.0, 29.9, 30.1, 45.0])


def test_k0_k1_match_scipy_across_regimes():
    assert np.allclose(bessel_k0(RADII), special.k0(RADII), rtol=1e-9, atol=0)
    assert np.allclose(bessel_k1(RADII), special.k1(RADII), rtol=1e-9, atol=0)


def test_scalar_in_scalar_out():
    assert isinstance(bessel_k0(1.0), float)
    assert bessel_k0(1.0) == pytest.approx(0.42102443824070834, rel=1e-12)


def test_gtilde_small_radius_values():
    assert gtilde(0.1) == pytest.approx(0.0085524, abs=5e-8)
    assert gtilde(0.0) == 0.0
    r = np.array([1e-8, 1e-4, 1e-2, 0.3, 0.9])
    g = gtilde(r)
    assert np.all(np.abs(g) <= r**2 * (1 + np.abs(np.log(r))))
    assert np.allclose(g, special.k0(r) + np.log(r) - np.log(2) + np.euler_gamma, rtol=1e-6, atol=1e-13)


def test_gtilde_any_is_continuous_at_regime_switch():
    assert gtilde_any(2.0 - 1e-9) == pytest.approx(gtilde_any(2.0 + 1e-9), abs=1e-8)
    assert gtilde_any(5.0) == pytest.approx(special.k0(5.0) + np.log(5.0) - np.log(2) + np.euler_gamma, rel=1e-9)


def test_gbar_matches_definition():
    r = np.array([0.1, 1.0, 3.0])
    assert np.allclose(gbar(r), -special.k0(r) - np.log(r), rtol=1e-9)


@pytest.mark.parametrize("func,bad", [(bessel_k0, 0.0), (bessel_k1, -1.0), (gbar, 0.0), (gtilde, 1.0), (gtilde, -0.1)])
def test_out_of_domain_raises(func, bad):
    with pytest.raises(DomainError):
        func(bad)


def test_calK_is_perpendicular_and_vanishes_at_origin():
    x = np.array([[0.0, 0.0], [1.0, 0.0], [0.3, -0.4]])
    k = kernel_calK(x)
    assert np.all(k[0] == 0)
    assert np.allclose(np.sum(k * x, axis=-1), 0.0, atol=1e-15)
    expected = (1.0 - special.k1(1.0)) / (2 * np.pi)
    assert k[1].tolist() == pytest.approx([0.0, expected], rel=1e-9)


def test_series_agrees_where_it_is_accurate():
    s0, s1 = series_k0_k1([0.5, 1.5])
    assert np.allclose(s0, special.k0([0.5, 1.5]), rtol=1e-12)
    assert np.allclose(s1, special.k1([0.5, 1.5]), rtol=1e-12)


def test_kernel_checks_table():
    checks = kernel_checks()
    assert len(checks) == 10
    for c in checks:
        if c.r <= 2.0:
            assert c.k0_rel_error < 1e-13 and c.k1_rel_error < 1e-13
        assert c.k0 == pytest.approx(float(special.k0(c.r)), rel=1e-9)


def test_k1_is_minus_derivative_of_k0():
    r = np.linspace(0.1, 5.0, 50)
    delta = 1e-4
    slope = (bessel_k0(r + delta) - bessel_k0(r - delta)) / (2 * delta)
    assert np.allclose(-slope, bessel_k1(r), rtol=1e-6, atol=0)


def test_calK_is_odd():
    x = np.random.default_rng(3).normal(scale=2.0, size=(200, 2))
    assert np.array_equal(kernel_calK(-x), -kernel_calK(x))


def test_gbar_small_scale_form():
    r = np.linspace(1e-4, 0.99, 200)
    assert np.allclose(gbar(r), (np.euler_gamma - np.log(2)) - gtilde(r), rtol=0, atol=1e-12)
    assert gbar(0.1) == pytest.approx(-0.1244839, abs=1e-6)
    assert gbar(1e-8) == pytest.approx(np.euler_gamma - np.log(2), abs=1e-12)
