"""Boundary-integral evolution of the plus and minus patches.

Node velocities follow

    dz+/dt = +(1/2pi) int log|z+ - z+'| dz+'  - (1/4pi) sum_p int G~(|z+ - z_p'|) dz_p'
    dz-/dt = -(1/2pi) int log|z- - z-'| dz-'  + (1/4pi) sum_p int G~(|z- - z_p'|) dz_p'

with the G~ terms present only in screened mode. The logarithm is split into
log|2 sin((a-b)/2)|, integrated exactly in Fourier space (half the Hilbert transform),
plus a smooth remainder integrated by the trapezoidal rule.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from reconnect2d.contour.geometry import (
    SPACING_RATIO_MAX,
    PatchContour,
    reparametrize,
    segment_lengths,
    spacing_ratio,
)
from reconnect2d.core.errors import ConfigurationError, NumericAbort, StepSizeError
from reconnect2d.domain.models import ContourMode
from reconnect2d.kernels.bessel import gtilde_any
from reconnect2d.observability.logging import get_logger

log = get_logger(__name__)

CFL = 0.5
_ROW_BLOCK = 256


@dataclass(frozen=True)
class ContourPairState:
    plus: PatchContour
    minus: PatchContour
    time: float = 0.0
    R: float = 1.0
    d: float = 0.0
    step_count: int = 0
    threads: int = 1

    def __post_init__(self) -> None:
        if not self.R > 0:
            raise ConfigurationError("init.params.R", "must be > 0")
        if self.plus.strength != 1 or self.minus.strength != -1:
            raise ConfigurationError("contour", "plus patch needs strength +1 and minus patch -1")

    @property
    def patches(self) -> tuple[PatchContour, PatchContour]:
        return self.plus, self.minus


def _wavenumbers(m: int) -> np.ndarray:
    n = np.fft.fftfreq(m, 1.0 / m)
    if m % 2 == 0:
        n[m // 2] = 0.0
    return n


def spectral_derivative(z: np.ndarray) -> np.ndarray:
    return np.fft.ifft(1j * _wavenumbers(len(z)) * np.fft.fft(z))


def half_hilbert(z: np.ndarray) -> np.ndarray:
    """(1/2pi) int log|e^{ia} - e^{ib}| z'(b) db = -(i/2) sum sgn(n) z_n e^{ina}."""
    return np.fft.ifft(-0.5j * np.sign(_wavenumbers(len(z))) * np.fft.fft(z))


def _log_rows(z: np.ndarray, dz: np.ndarray, rows: slice) -> np.ndarray:
    m = len(z)
    alpha = 2.0 * np.pi * np.arange(m) / m
    a = alpha[rows, None]
    za = z[rows, None]
    dist = np.abs(za - z[None, :])
    circ = np.abs(2.0 * np.sin(0.5 * (a - alpha[None, :])))
    idx = np.arange(m)[rows]
    diag = (idx[:, None] == np.arange(m)[None, :])
    with np.errstate(divide="ignore", invalid="ignore"):
        smooth = np.log(np.where(diag, 1.0, dist) / np.where(diag, 1.0, circ))
    smooth[diag] = np.log(np.abs(dz[idx]))
    return smooth @ dz / m


def _gtilde_rows(za: np.ndarray, z: np.ndarray, dz: np.ndarray) -> np.ndarray:
    dist = np.abs(za[:, None] - z[None, :])
    return gtilde_any(dist.ravel()).reshape(dist.shape) @ dz / len(z)


def _blocked(func, m: int, threads: int) -> np.ndarray:
    blocks = [slice(i, min(i + _ROW_BLOCK, m)) for i in range(0, m, _ROW_BLOCK)]
    if threads > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(func, blocks))
    else:
        parts = [func(b) for b in blocks]
    return np.concatenate(parts)


def log_velocity(z: np.ndarray, threads: int = 1) -> np.ndarray:
    """(1/2pi) int log|z(a) - z(b)| z'(b) db at every node."""
    dz = spectral_derivative(z)
    smooth = _blocked(lambda rows: _log_rows(z, dz, rows), len(z), threads)
    return half_hilbert(z) + smooth


def gtilde_velocity(targets: np.ndarray, sources: tuple[np.ndarray, ...], threads: int = 1) -> np.ndarray:
    """(1/4pi) sum over source curves of int G~(|x - z(b)|) z'(b) db at every target."""
    total = np.zeros(len(targets), dtype=np.complex128)
    for z in sources:
        dz = spectral_derivative(z)
        total += _blocked(lambda rows, z=z, dz=dz: _gtilde_rows(targets[rows], z, dz), len(targets), threads)
    return total * (2.0 * np.pi) / (4.0 * np.pi)


def _velocities_complex(zp: np.ndarray, zm: np.ndarray, mode: ContourMode, threads: int):
    vp = log_velocity(zp, threads)
    vm = -log_velocity(zm, threads)
    if mode is ContourMode.screened_left:
        vp = vp - gtilde_velocity(zp, (zp, zm), threads)
        vm = vm + gtilde_velocity(zm, (zp, zm), threads)
    return vp, vm


def contour_velocity(state: ContourPairState, mode: ContourMode) -> tuple[np.ndarray, np.ndarray]:
    """Node velocities (M, 2) of the plus and minus patches."""
    vp, vm = _velocities_complex(state.plus.z, state.minus.z, ContourMode(mode), state.threads)
    return np.stack((vp.real, vp.imag), axis=-1), np.stack((vm.real, vm.imag), axis=-1)


def stable_dt(state: ContourPairState, mode: ContourMode, cfl: float = CFL) -> float:
    vp, vm = contour_velocity(state, mode)
    speed = max(np.abs(vp).max(), np.abs(vm).max(), np.linalg.norm(vp, axis=1).max(), np.linalg.norm(vm, axis=1).max())
    spacing = min(segment_lengths(state.plus.nodes).min(), segment_lengths(state.minus.nodes).min())
    if speed == 0.0:
        return float("inf")
    return cfl * spacing / speed


def step_contours(state: ContourPairState, dt: float, mode: ContourMode, *, cfl: float = CFL) -> ContourPairState:
    """RK4 step of both boundaries; nodes are redistributed when spacing degrades past 3x."""
    if not dt > 0:
        raise ConfigurationError("time.dt", f"must be > 0, got {dt}")
    mode = ContourMode(mode)
    zp, zm = state.plus.z, state.minus.z

    def f(p, m):
        return _velocities_complex(p, m, mode, state.threads)

    k1p, k1m = f(zp, zm)
    speed = max(np.abs(k1p).max(), np.abs(k1m).max())
    spacing = min(segment_lengths(state.plus.nodes).min(), segment_lengths(state.minus.nodes).min())
    if speed > 0 and dt > cfl * spacing / speed * (1.0 + 1e-12):
        raise StepSizeError(dt, cfl * spacing / speed)

    k2p, k2m = f(zp + 0.5 * dt * k1p, zm + 0.5 * dt * k1m)
    k3p, k3m = f(zp + 0.5 * dt * k2p, zm + 0.5 * dt * k2m)
    k4p, k4m = f(zp + dt * k3p, zm + dt * k3m)
    zp1 = zp + (dt / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p)
    zm1 = zm + (dt / 6.0) * (k1m + 2.0 * k2m + 2.0 * k3m + k4m)
    if not (np.all(np.isfinite(zp1)) and np.all(np.isfinite(zm1))):
        raise NumericAbort("non-finite contour nodes", last_good_time=state.time)

    plus = PatchContour.from_complex(zp1, 1)
    minus = PatchContour.from_complex(zm1, -1)
    if spacing_ratio(plus) > SPACING_RATIO_MAX:
        log.info("contour_reparametrized", patch="plus", t=state.time + dt)
        plus = reparametrize(plus)
    if spacing_ratio(minus) > SPACING_RATIO_MAX:
        log.info("contour_reparametrized", patch="minus", t=state.time + dt)
        minus = reparametrize(minus)
    return replace(state, plus=plus, minus=minus, time=state.time + dt, step_count=state.step_count + 1)
