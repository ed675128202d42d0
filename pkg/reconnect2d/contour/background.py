"""Analytic rotating backgrounds of the patch-merger configuration and measurements against them.

The plus background is an ellipse with semi-axes R (along x) and 2R (along y) centred at
(d + 2R, 0), the minus background the disk of radius R at the origin:

    Z+(a, t) = (R/2) i (3 e^{-4it/9} e^{ia} + e^{-ia}) + (d + 2R)
    Z-(a, t) = R e^{-it/2} e^{ia}
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Optional

import numpy as np
from pydantic import BaseModel
from scipy.optimize import minimize_scalar

from reconnect2d.contour.geometry import PatchContour, contours_overlap, signed_area
from reconnect2d.core.errors import ConfigurationError, GeometryError

# Half the shape period of the plus background; it is disjoint from the disk again here.
DISJOINT_HORIZON = 9.0 * math.pi / 2.0
PERTURBATION_HORIZON = 9.0 * math.pi / 4.0
MODE_PHASE_RATE = 4.0 / 9.0
SHAPE_RATE = 2.0 / 9.0
QUOTED_RATE = 3.0 / 16.0


def Z_plus(alpha, t: float, R: float, d: float) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=np.float64)
    return 0.5 * R * 1j * (3.0 * np.exp(-4j * t / 9.0) * np.exp(1j * alpha) + np.exp(-1j * alpha)) + (d + 2.0 * R)


def Z_minus(alpha, t: float, R: float, d: float = 0.0) -> np.ndarray:
    alpha = np.asarray(alpha, dtype=np.float64)
    return R * np.exp(-0.5j * t) * np.exp(1j * alpha)


@dataclass(frozen=True)
class BackgroundState:
    t: float
    R: float
    d: float
    nodes: int = 512

    @property
    def alpha(self) -> np.ndarray:
        return 2.0 * np.pi * np.arange(self.nodes) / self.nodes

    def plus_curve(self, alpha) -> np.ndarray:
        return Z_plus(alpha, self.t, self.R, self.d)

    def minus_curve(self, alpha) -> np.ndarray:
        return Z_minus(alpha, self.t, self.R)

    @cached_property
    def plus(self) -> PatchContour:
        return PatchContour.from_complex(self.plus_curve(self.alpha), 1)

    @cached_property
    def minus(self) -> PatchContour:
        return PatchContour.from_complex(self.minus_curve(self.alpha), -1)


def analytic_background(t: float, R: float, d: float, nodes: int = 512) -> BackgroundState:
    if not R > 0:
        raise ConfigurationError("init.params.R", "must be > 0")
    return BackgroundState(t=float(t), R=float(R), d=float(d), nodes=int(nodes))


# ============================================================================
# Perturbation
# ============================================================================


def _phase(z0: complex, curve, alpha: np.ndarray) -> float:
    """Parameter of the point on ``curve`` nearest to z0."""
    samples = np.abs(curve(alpha) - z0)
    j = int(np.argmin(samples))
    step = alpha[1] - alpha[0]
    res = minimize_scalar(
        lambda a: float(np.abs(curve(a) - z0)),
        bounds=(alpha[j] - step, alpha[j] + step),
        method="bounded",
        options={"xatol": 1e-12},
    )
    return float(res.x)


def _patch_perturbation(z: np.ndarray, curve, alpha: np.ndarray, R: float) -> tuple[float, float]:
    phi = _phase(z[0], curve, alpha)
    zeta = (z - curve(alpha + phi)) / R
    dzeta = (np.roll(zeta, -1) - zeta) / (alpha[1] - alpha[0])
    return float(np.abs(zeta).max()), float(np.abs(dzeta).max())


def perturbation_norm(state, background: BackgroundState, R: Optional[float] = None) -> tuple[float, float]:
    """(sup|zeta|, sup|zeta'|) over both patches with zeta = (z - Z)/R.

    Each patch is compared against its background at parameters shifted by the phase that
    brings node 0 onto its nearest background point, so pure reparametrization drift does
    not count as perturbation.
    """
    R = background.R if R is None else R
    if state.plus.size != background.nodes or state.minus.size != background.nodes:
        raise ConfigurationError(
            "contour.nodes",
            f"state has {state.plus.size}/{state.minus.size} nodes, background {background.nodes}",
        )
    alpha = background.alpha
    zp, dzp = _patch_perturbation(state.plus.z, background.plus_curve, alpha, R)
    zm, dzm = _patch_perturbation(state.minus.z, background.minus_curve, alpha, R)
    return max(zp, zm), max(dzp, dzm)


# ============================================================================
# Background overlap window
# ============================================================================


def _background_overlaps(t: float, R: float, d: float, nodes: int) -> bool:
    bg = analytic_background(t, R, d, nodes)
    return contours_overlap(bg.plus, bg.minus).overlapping


def _bisect(lo: float, hi: float, R: float, d: float, nodes: int, tol: float, want: bool) -> float:
    """Shrink [lo, hi] to the switch point where overlap becomes ``want``."""
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _background_overlaps(mid, R, d, nodes) == want:
            hi = mid
        else:
            lo = mid
    return hi


def background_overlap_window(
    R: float,
    d: float,
    *,
    nodes: int = 256,
    horizon: float = DISJOINT_HORIZON,
    scan_step: float = 0.05,
    tol: float = 1e-3,
) -> tuple[Optional[float], Optional[float]]:
    """First time the backgrounds overlap and the first later time they are disjoint again."""
    times = np.arange(0.0, horizon + scan_step, scan_step)
    times[-1] = min(times[-1], horizon)
    start = end = None
    previous = _background_overlaps(0.0, R, d, nodes)
    if previous:
        start = 0.0
    for t0, t1 in zip(times, times[1:]):
        current = _background_overlaps(float(t1), R, d, nodes)
        if current and not previous and start is None:
            start = _bisect(float(t0), float(t1), R, d, nodes, tol, True)
        elif previous and not current and start is not None:
            end = _bisect(float(t0), float(t1), R, d, nodes, tol, False)
            break
        previous = current
    return start, end


def predicted_first_touch(R: float, d: float, nodes: int = 256, horizon: float = DISJOINT_HORIZON) -> Optional[float]:
    return background_overlap_window(R, d, nodes=nodes, horizon=horizon)[0]


# ============================================================================
# Ellipse fit and rigid rotation
# ============================================================================


class EllipseFit(BaseModel):
    center: tuple[float, float]
    semi_major: float
    semi_minor: float
    angle: float
    area: float
    residual: float


def fit_ellipse(nodes: np.ndarray) -> EllipseFit:
    """Ellipse with the polygon's area, centroid and second moments; residual is the max radial miss."""
    nodes = np.asarray(nodes, dtype=np.float64)
    a_signed = signed_area(nodes)
    if a_signed == 0.0:
        raise GeometryError("degenerate polygon with zero area")
    if a_signed < 0:
        nodes = nodes[::-1]
    x, y = nodes[:, 0], nodes[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    cross = x * yn - xn * y
    A = 0.5 * cross.sum()
    cx = np.sum((x + xn) * cross) / (6.0 * A)
    cy = np.sum((y + yn) * cross) / (6.0 * A)
    ixx = np.sum(cross * (x * x + x * xn + xn * xn)) / 12.0 - A * cx * cx
    iyy = np.sum(cross * (y * y + y * yn + yn * yn)) / 12.0 - A * cy * cy
    ixy = np.sum(cross * (x * yn + 2 * x * y + 2 * xn * yn + xn * y)) / 24.0 - A * cx * cy
    evals, evecs = np.linalg.eigh(np.array([[ixx, ixy], [ixy, iyy]]))
    minor, major = 2.0 * np.sqrt(np.maximum(evals, 0.0) / A)
    axis = evecs[:, 1]
    angle = float(np.mod(np.arctan2(axis[1], axis[0]), np.pi))

    rel = nodes - np.array([cx, cy])
    u = rel @ axis
    v = rel @ evecs[:, 0]
    rho = np.sqrt((u / major) ** 2 + (v / minor) ** 2)
    residual = float(np.max(np.linalg.norm(rel, axis=1) * np.abs(1.0 - 1.0 / rho)))
    return EllipseFit(
        center=(float(cx), float(cy)),
        semi_major=float(major),
        semi_minor=float(minor),
        angle=angle,
        area=float(A),
        residual=residual,
    )


class RotationFit(BaseModel):
    rate: float
    window_rates: list[float]
    constancy: float
    references: dict[str, float]


def rotation_rate(times, angles, windows: int = 4) -> RotationFit:
    """Angular velocity of the major axis; ``constancy`` is the spread of windowed rates relative to the mean."""
    t = np.asarray(times, dtype=np.float64)
    theta = np.unwrap(2.0 * np.asarray(angles, dtype=np.float64)) / 2.0
    if len(t) < 3 * windows:
        windows = max(1, len(t) // 3)
    if len(t) < 2:
        raise ConfigurationError("time.output_every", "need at least two samples to fit a rotation rate")
    rate = float(np.polyfit(t, theta, 1)[0])
    window_rates = [float(np.polyfit(t[idx], theta[idx], 1)[0]) for idx in np.array_split(np.arange(len(t)), windows)]
    spread = max(window_rates) - min(window_rates)
    constancy = spread / abs(rate) if rate != 0.0 else math.inf
    return RotationFit(
        rate=rate,
        window_rates=window_rates,
        constancy=float(constancy),
        references={"mode_phase": MODE_PHASE_RATE, "kirchhoff": SHAPE_RATE, "quoted": QUOTED_RATE},
    )


def kirchhoff_rate(a: float, b: float) -> float:
    return a * b / (a + b) ** 2
