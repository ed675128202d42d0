"""Velocity-law operators on the torus.

All inversions use exact lattice wavenumbers. With psi_hat the stream function, the
velocity is grad_perp psi = (-d2 psi, d1 psi):

    U = grad_perp Lap^-1          symbol  -1/|k|^2          (k = 0 dropped)
    B = grad_perp (I - Lap)^-1    symbol   1/(1+|k|^2)
    S = B + U                     symbol  -1/(|k|^2 (1+|k|^2))
"""
from __future__ import annotations

import numpy as np

from reconnect2d.domain.models import Handedness, ModelVariant
from reconnect2d.spectral.grid import ScalarField, ScalarPair, TorusGrid, VectorField


def spectrum(values: np.ndarray) -> np.ndarray:
    return np.fft.rfft2(values)


def physical(grid: TorusGrid, hat: np.ndarray) -> np.ndarray:
    return np.fft.irfft2(hat, s=(grid.n, grid.n))


def dealias(hat: np.ndarray, grid: TorusGrid) -> np.ndarray:
    """2/3 rule: zero every mode with an integer index above n/3."""
    return hat * grid.dealias_mask


def symbol_U(grid: TorusGrid) -> np.ndarray:
    return -grid.inv_k2


def symbol_B(grid: TorusGrid) -> np.ndarray:
    return 1.0 / (1.0 + grid.k2)


def symbol_S(grid: TorusGrid) -> np.ndarray:
    return -grid.inv_k2 / (1.0 + grid.k2)


def perp_gradient_hats(grid: TorusGrid, psi_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    kx, ky = grid.derivative_wavenumbers
    return -1j * ky * psi_hat, 1j * kx * psi_hat


def gradient_hats(grid: TorusGrid, f_hat: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    kx, ky = grid.derivative_wavenumbers
    return 1j * kx * f_hat, 1j * ky * f_hat


def _vector_from_psi(grid: TorusGrid, psi_hat: np.ndarray) -> VectorField:
    u_hat, v_hat = perp_gradient_hats(grid, psi_hat)
    return VectorField(grid, physical(grid, u_hat), physical(grid, v_hat))


def op_U(f: ScalarField) -> VectorField:
    return _vector_from_psi(f.grid, symbol_U(f.grid) * spectrum(f.values))


def op_B(f: ScalarField) -> VectorField:
    return _vector_from_psi(f.grid, symbol_B(f.grid) * spectrum(f.values))


def op_S(f: ScalarField) -> VectorField:
    return _vector_from_psi(f.grid, symbol_S(f.grid) * spectrum(f.values))


def divergence(v: VectorField) -> np.ndarray:
    grid = v.grid
    d1, _ = gradient_hats(grid, spectrum(v.v1))
    _, d2 = gradient_hats(grid, spectrum(v.v2))
    return physical(grid, d1 + d2)


def stream_function_hats(
    grid: TorusGrid, plus_hat: np.ndarray, minus_hat: np.ndarray, variant: ModelVariant
) -> tuple[np.ndarray, np.ndarray]:
    """Stream functions of v+ and v- from the spectra of sigma+ and sigma-."""
    U = symbol_U(grid)
    if not variant.screened:
        if variant.handedness is Handedness.right:
            return -U * minus_hat, U * plus_hat
        return U * plus_hat, -U * minus_hat

    F_hat = 0.5 * (plus_hat + minus_hat)
    if variant.handedness is Handedness.right:
        omega_hat = 0.5 * (plus_hat - minus_hat)
        B = symbol_B(grid)
        return U * omega_hat + B * F_hat, U * omega_hat - B * F_hat
    S = symbol_S(grid)
    return U * plus_hat - S * F_hat, -U * minus_hat + S * F_hat


def compute_velocities(sigma: ScalarPair, variant: ModelVariant) -> tuple[VectorField, VectorField]:
    grid = sigma.grid
    psi_p, psi_m = stream_function_hats(grid, spectrum(sigma.plus.values), spectrum(sigma.minus.values), variant)
    return _vector_from_psi(grid, psi_p), _vector_from_psi(grid, psi_m)
