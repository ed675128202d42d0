"""First-quadrant moments of sigma+ and the rates the Biot-Savart law predicts for them."""
from __future__ import annotations

from typing import Literal

import numpy as np

from reconnect2d.core.errors import ConfigurationError, DomainError
from reconnect2d.domain.models import Handedness, ModelVariant
from reconnect2d.kernels.bessel import kernel_calK
from reconnect2d.spectral.grid import ScalarField, ScalarPair
from reconnect2d.spectral.operators import op_S, op_U

_CHUNK = 512

OracleKernel = Literal["periodic", "plane"]


def quadrant_mask(grid) -> np.ndarray:
    X, Y = grid.mesh
    return (X > 0) & (Y > 0)


def quadrant_moments(f: ScalarField) -> tuple[float, float]:
    """(E1, E2) = integral over the open first quadrant of x_j f."""
    grid = f.grid
    X, Y = grid.mesh
    q = quadrant_mask(grid)
    w = grid.cell_area * f.values[q]
    return float(np.sum(X[q] * w)), float(np.sum(Y[q] * w))


def _pair_sums(x: np.ndarray, w: np.ndarray) -> tuple[float, float]:
    """Sum over point pairs of the E1' and E2' kernels weighted by w_x w_y."""
    s1 = 0.0
    s2 = 0.0
    for start in range(0, len(x), _CHUNK):
        xa = x[start : start + _CHUNK, None, :]
        wa = w[start : start + _CHUNK, None]
        y = x[None, :, :]
        x1, x2 = xa[..., 0], xa[..., 1]
        y1, y2 = y[..., 0], y[..., 1]
        reflected = (x1 - y1) ** 2 + (x2 + y2) ** 2
        summed = (x1 + y1) ** 2 + (x2 + y2) ** 2
        ww = wa * w[None, :]
        s1 += float(np.sum(ww * x1 * y1 * (x2 + y2) / (reflected * summed)))
        s2 += float(np.sum(ww * (x1 + y1) / summed))
    return (2.0 / np.pi) * s1, s2 / (2.0 * np.pi)



def _screened_correction(xq: np.ndarray, wq: np.ndarray, y: np.ndarray, wy: np.ndarray) -> tuple[float, float]:
    """Integral over Q of sigma+ (calK * F)."""
    c1 = 0.0
    c2 = 0.0
    for start in range(0, len(xq), _CHUNK // 4):
        xa = xq[start : start + _CHUNK // 4, None, :]
        k = kernel_calK(xa - y[None, :, :])
        conv = np.einsum("ijk,j->ik", k, wy)
        c1 += float(np.sum(wq[start : start + _CHUNK // 4] * conv[:, 0]))
        c2 += float(np.sum(wq[start : start + _CHUNK // 4] * conv[:, 1]))
    return c1, c2


def _plane_rates(sigma: ScalarPair, variant: ModelVariant, support: np.ndarray, threshold: float) -> tuple[float, float]:
    grid = sigma.grid
    X, Y = grid.mesh
    h2 = grid.cell_area
    xq = np.stack((X[support], Y[support]), axis=-1)
    wq = h2 * sigma.plus.values[support]
    e1, e2 = _pair_sums(xq, wq)
    if variant.screened:
        F = sigma.F.values
        fsup = np.abs(F) > threshold * max(np.max(np.abs(F)), 1e-300)
        y = np.stack((X[fsup], Y[fsup]), axis=-1)
        c1, c2 = _screened_correction(xq, wq, y, h2 * F[fsup])
        e1 += c1
        e2 += c2
    return e1, e2


def _periodic_rates(sigma: ScalarPair, variant: ModelVariant) -> tuple[float, float]:
    """Integral over Q of sigma+ v+, with v+ = -U sigma- (+ S F when screened) on the torus."""
    grid = sigma.grid
    v = op_U(sigma.minus).scaled(-1.0)
    if variant.screened:
        v = v + op_S(sigma.F)
    q = quadrant_mask(grid)
    w = grid.cell_area * sigma.plus.values[q]
    return float(np.sum(w * v.v1[q])), float(np.sum(w * v.v2[q]))


def moment_rhs_oracle(
    sigma: ScalarPair,
    variant: ModelVariant,
    R: float = 1.0,
    threshold: float = 1e-6,
    kernel: OracleKernel = "periodic",
) -> tuple[float, float]:
    """(E1', E2') of the right-handed system without time stepping.

    With ``kernel="plane"`` the whole-plane double integrals over Q x Q are summed on the
    support nodes, plus the integral of sigma+ (calK * F) when screened. These ignore the
    periodic images of the torus, which shift the rates by tens of percent unless the box
    is much wider than the support separation. ``kernel="periodic"`` evaluates the same
    Biot-Savart laws with the torus Green's function (spectral U and S), so it is the one
    to compare against a solver run.

    Args:
        sigma: State on a grid centred on the symmetry axes
        variant: Right-handed variant; screened adds the calK * F correction
        R: Reporting length scale; results are multiplied by R**-3 (rescaled coordinates)
        threshold: Support threshold relative to max|sigma+|
        kernel: "periodic" (torus images included) or "plane" (whole-plane kernels)

    Raises:
        DomainError: sigma+ changes sign in Q or is supported below the x1-axis
    """
    if variant.handedness is not Handedness.right:
        raise ConfigurationError("model.handedness", "moment identities hold for the right-handed system")
    if kernel not in ("periodic", "plane"):
        raise ConfigurationError("diagnostics.oracle", f"unknown kernel {kernel!r}")
    grid = sigma.grid
    plus = sigma.plus.values
    peak = np.max(np.abs(plus))
    if peak == 0.0:
        return 0.0, 0.0
    theta = threshold * peak
    X, Y = grid.mesh
    if np.any(np.abs(plus[Y <= 0]) > theta):
        raise DomainError("sigma+ must be supported in the upper half-plane")
    support = quadrant_mask(grid) & (np.abs(plus) > theta)
    vals = plus[support]
    if vals.max() > 0 and vals.min() < 0:
        raise DomainError("sigma+ must have a single sign in Q")

    if kernel == "plane":
        e1, e2 = _plane_rates(sigma, variant, support, threshold)
    else:
        e1, e2 = _periodic_rates(sigma, variant)
    scale = R**-3
    return e1 * scale, e2 * scale
