"""Four-fold symmetric point vortices of the unscreened right-handed system.

sigma+ = delta(x - p) - delta(x - p*) with p = (x0, y0) in the second quadrant and p* its
mirror across the x2-axis; sigma- is the reflection of sigma+ across the x1-axis. The
vortex at p moves under v+ = -U(sigma-) only:

    dx/dt = (1/4pi) x^2 / (y (x^2 + y^2)),   dy/dt = (1/4pi) x / (x^2 + y^2)

x/y is conserved and d(x^2)/dt is constant, so the pair reaches the origin at
T* = -x0^2 / C0 with C0 = (1/2pi) / ((y0/x0)(1 + y0^2/x0^2)).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from reconnect2d.core.errors import DomainError, SingularityError
from reconnect2d.observability import metrics
from reconnect2d.observability.logging import get_logger

log = get_logger(__name__)

MERGER_FACTOR = 10.0


@dataclass(frozen=True)
class PointVortexState:
    x: float
    y: float
    time: float = 0.0

    @property
    def radius(self) -> float:
        return math.hypot(self.x, self.y)


@dataclass(frozen=True)
class PointVortex:
    position: tuple[float, float]
    strength: float
    species: str


def _check_quadrant(x: float, y: float) -> None:
    if not (x < 0 and y > 0):
        raise DomainError(f"point vortex must start with x < 0 < y, got ({x}, {y})")


def pv_rhs(s: PointVortexState) -> tuple[float, float]:
    if s.y == 0.0:
        raise SingularityError(f"vortex reached y = 0 at t={s.time:.6g}")
    r2 = s.x * s.x + s.y * s.y
    c = 1.0 / (4.0 * math.pi)
    return c * s.x * s.x / (s.y * r2), c * s.x / r2


def merger_rate(x0: float, y0: float) -> float:
    """C0 = d(x^2)/dt, constant along the trajectory."""
    _check_quadrant(x0, y0)
    q = y0 / x0
    return (1.0 / (2.0 * math.pi)) / (q * (1.0 + q * q))


def pv_merger_time(x0: float, y0: float) -> float:
    return -x0 * x0 / merger_rate(x0, y0)


def pv_configuration(s: PointVortexState) -> list[PointVortex]:
    """The four signed deltas implied by the odd/mirror symmetry."""
    x, y = s.x, s.y
    return [
        PointVortex((x, y), 1.0, "plus"),
        PointVortex((-x, y), -1.0, "plus"),
        PointVortex((x, -y), 1.0, "minus"),
        PointVortex((-x, -y), -1.0, "minus"),
    ]


def pv_biot_savart_velocity(s: PointVortexState) -> tuple[float, float]:
    """v+ = -U(sigma-) at the plus vortex, summed directly over the minus deltas."""
    target = np.array([s.x, s.y])
    v = np.zeros(2)
    for vortex in pv_configuration(s):
        if vortex.species != "minus":
            continue
        rel = target - np.asarray(vortex.position)
        r2 = float(rel @ rel)
        if r2 == 0.0:
            raise SingularityError("plus and minus vortices coincide")
        perp = np.array([-rel[1], rel[0]])
        v -= vortex.strength * perp / (2.0 * math.pi * r2)
    return float(v[0]), float(v[1])


@dataclass
class PointVortexTrajectory:
    times: np.ndarray
    xs: np.ndarray
    ys: np.ndarray
    merger_time: Optional[float]
    predicted: float

    @property
    def ratio_drift(self) -> float:
        ratio = self.xs / self.ys
        return float(np.max(np.abs(ratio - ratio[0])) / abs(ratio[0]))

    def affine_fit(self) -> tuple[float, float, float]:
        """(slope, intercept, max relative residual) of x(t)^2 against t."""
        x2 = self.xs**2
        slope, intercept = np.polyfit(self.times, x2, 1)
        residual = float(np.max(np.abs(x2 - (slope * self.times + intercept))) / x2[0])
        return float(slope), float(intercept), residual

    @property
    def relative_error(self) -> Optional[float]:
        if self.merger_time is None:
            return None
        return abs(self.merger_time - self.predicted) / self.predicted


def _rk4(s: PointVortexState, dt: float) -> PointVortexState:
    def f(x, y):
        return pv_rhs(PointVortexState(x, y, s.time))

    k1 = f(s.x, s.y)
    k2 = f(s.x + 0.5 * dt * k1[0], s.y + 0.5 * dt * k1[1])
    k3 = f(s.x + 0.5 * dt * k2[0], s.y + 0.5 * dt * k2[1])
    k4 = f(s.x + dt * k3[0], s.y + dt * k3[1])
    return PointVortexState(
        s.x + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]),
        s.y + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]),
        s.time + dt,
    )


def pv_integrate(s0: PointVortexState, dt: float, t_end: float = math.inf) -> PointVortexTrajectory:
    """RK4 with the step shrunk in proportion to the distance from the origin.

    Integration stops once the vortex is within 10*dt (relative to the starting radius)
    of the origin; the merger time is then the root of the affine fit of x^2.
    """
    _check_quadrant(s0.x, s0.y)
    if not dt > 0:
        raise DomainError(f"dt must be > 0, got {dt}")
    r0 = s0.radius
    threshold = MERGER_FACTOR * dt * r0
    times, xs, ys = [s0.time], [s0.x], [s0.y]
    s = s0
    merged = False
    while s.time < t_end:
        if s.radius < threshold:
            merged = True
            break
        h = min(dt * min(1.0, s.radius / r0), t_end - s.time)
        nxt = _rk4(s, h)
        if not (nxt.x < 0 and nxt.y > 0):
            # stepped through the origin; keep the last state in the quadrant
            merged = True
            break
        s = nxt
        times.append(s.time)
        xs.append(s.x)
        ys.append(s.y)
    metrics.solver_steps.labels(solver="point_vortex").inc(len(times) - 1)
    metrics.simulated_time.labels(solver="point_vortex").set(s.time)

    traj = PointVortexTrajectory(
        times=np.asarray(times),
        xs=np.asarray(xs),
        ys=np.asarray(ys),
        merger_time=None,
        predicted=pv_merger_time(s0.x, s0.y) + s0.time,
    )
    if merged and len(times) > 1:
        slope, intercept, _ = traj.affine_fit()
        traj.merger_time = -intercept / slope
        log.info("merger_detected", t=traj.merger_time, predicted=traj.predicted, solver="point_vortex")
    return traj
