"""Pseudo-spectral integration of the coupled active-scalar system.

The state is advanced with classical RK4 in Lawson form: diffusion nu*Lap is absorbed
exactly by the integrating factor exp(-nu |k|^2 t) and RK4 acts on the advective
tendency only. Products are formed on the grid and truncated with the 2/3 rule.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from reconnect2d.core.errors import ConfigurationError, NumericAbort, StepSizeError
from reconnect2d.domain.models import ModelVariant
from reconnect2d.spectral.grid import ScalarField, ScalarPair, TorusGrid, VectorField
from reconnect2d.spectral.operators import (
    dealias,
    gradient_hats,
    perp_gradient_hats,
    physical,
    spectrum,
    stream_function_hats,
)

CFL = 0.5


@dataclass(frozen=True)
class SolverState:
    sigma: ScalarPair
    variant: ModelVariant
    nu_plus: float = 0.0
    nu_minus: float = 0.0
    step_count: int = 0
    advection: bool = True

    def __post_init__(self) -> None:
        if not (self.nu_plus >= 0):
            raise ConfigurationError("model.nu_plus", "must be >= 0")
        if not (self.nu_minus >= 0):
            raise ConfigurationError("model.nu_minus", "must be >= 0")

    @property
    def time(self) -> float:
        return self.sigma.time

    @property
    def grid(self) -> TorusGrid:
        return self.sigma.grid

    @property
    def resistive(self) -> bool:
        return self.nu_plus > 0 or self.nu_minus > 0


def _velocity_hats(grid: TorusGrid, plus_hat: np.ndarray, minus_hat: np.ndarray, variant: ModelVariant):
    psi_p, psi_m = stream_function_hats(grid, plus_hat, minus_hat, variant)
    return perp_gradient_hats(grid, psi_p), perp_gradient_hats(grid, psi_m)


def _advect(grid: TorusGrid, vel_hats, f_hat: np.ndarray) -> np.ndarray:
    u_hat, v_hat = vel_hats
    fx_hat, fy_hat = gradient_hats(grid, f_hat)
    product = physical(grid, u_hat) * physical(grid, fx_hat) + physical(grid, v_hat) * physical(grid, fy_hat)
    return -dealias(spectrum(product), grid)


def tendency_hats(
    grid: TorusGrid, plus_hat: np.ndarray, minus_hat: np.ndarray, variant: ModelVariant
) -> tuple[np.ndarray, np.ndarray]:
    """Spectra of -V+ . grad sigma+ and -V- . grad sigma-."""
    vel_p, vel_m = _velocity_hats(grid, plus_hat, minus_hat, variant)
    return _advect(grid, vel_p, plus_hat), _advect(grid, vel_m, minus_hat)


def rhs(state: SolverState) -> ScalarPair:
    grid = state.grid
    if not state.advection:
        return ScalarPair(ScalarField.zeros(grid), ScalarField.zeros(grid), state.time)
    tp, tm = tendency_hats(grid, spectrum(state.sigma.plus.values), spectrum(state.sigma.minus.values), state.variant)
    return ScalarPair.from_arrays(grid, physical(grid, tp), physical(grid, tm), state.time)


def velocities(state: SolverState) -> tuple[VectorField, VectorField]:
    grid = state.grid
    if not state.advection:
        zero = np.zeros((grid.n, grid.n))
        return VectorField(grid, zero, zero), VectorField(grid, zero, zero)
    vel_p, vel_m = _velocity_hats(
        grid, spectrum(state.sigma.plus.values), spectrum(state.sigma.minus.values), state.variant
    )
    return (
        VectorField(grid, physical(grid, vel_p[0]), physical(grid, vel_p[1])),
        VectorField(grid, physical(grid, vel_m[0]), physical(grid, vel_m[1])),
    )


def max_speed(state: SolverState) -> float:
    v_plus, v_minus = velocities(state)
    return max(v_plus.max_speed, v_minus.max_speed)


def stable_dt(state: SolverState, cfl: float = CFL) -> float:
    """Largest dt allowed by cfl * h / max|v|; infinite when nothing moves."""
    speed = max_speed(state)
    if speed == 0.0:
        return float("inf")
    return cfl * state.grid.spacing / speed


def step_rk4(state: SolverState, dt: float, *, cfl: float = CFL) -> SolverState:
    if not dt > 0:
        raise ConfigurationError("time.dt", f"must be > 0, got {dt}")
    dt_max = stable_dt(state, cfl)
    if dt > dt_max * (1.0 + 1e-12):
        raise StepSizeError(dt, dt_max)

    grid = state.grid
    k2 = grid.k2
    ep_half = np.exp(-state.nu_plus * k2 * (0.5 * dt))
    em_half = np.exp(-state.nu_minus * k2 * (0.5 * dt))
    ep, em = ep_half * ep_half, em_half * em_half

    def nonlinear(p_hat, m_hat):
        if not state.advection:
            return 0.0 * p_hat, 0.0 * m_hat
        return tendency_hats(grid, p_hat, m_hat, state.variant)

    p0 = spectrum(state.sigma.plus.values)
    m0 = spectrum(state.sigma.minus.values)

    k1p, k1m = nonlinear(p0, m0)
    k2p, k2m = nonlinear(ep_half * (p0 + 0.5 * dt * k1p), em_half * (m0 + 0.5 * dt * k1m))
    k3p, k3m = nonlinear(ep_half * p0 + 0.5 * dt * k2p, em_half * m0 + 0.5 * dt * k2m)
    k4p, k4m = nonlinear(ep * p0 + dt * ep_half * k3p, em * m0 + dt * em_half * k3m)

    p1 = ep * p0 + (dt / 6.0) * (ep * k1p + 2.0 * ep_half * (k2p + k3p) + k4p)
    m1 = em * m0 + (dt / 6.0) * (em * k1m + 2.0 * em_half * (k2m + k3m) + k4m)

    plus, minus = physical(grid, p1), physical(grid, m1)
    if not (np.all(np.isfinite(plus)) and np.all(np.isfinite(minus))):
        raise NumericAbort("non-finite values after RK4 step", last_good_time=state.time)

    sigma = ScalarPair.from_arrays(grid, plus, minus, state.time + dt)
    return replace(state, sigma=sigma, step_count=state.step_count + 1)
