"""Time loop for the patch pair: overlap tracking, first-touch refinement and background comparison."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from reconnect2d.contour.background import analytic_background, fit_ellipse, perturbation_norm
from reconnect2d.contour.dynamics import CFL, ContourPairState, stable_dt, step_contours
from reconnect2d.contour.geometry import area, contours_overlap, self_intersects
from reconnect2d.core.errors import GeometryError
from reconnect2d.core.retry import step_with_halving
from reconnect2d.domain.models import ContourMode
from reconnect2d.observability import metrics
from reconnect2d.observability.logging import get_logger

log = get_logger(__name__)

TOUCH_TOL = 1e-3
OVERLAP_STOP_FRACTION = 0.1
CHECK_EVERY = 10

OutputHook = Callable[[ContourPairState], None]


@dataclass
class ContourSample:
    t: float
    overlap_area: float
    area_plus: float
    area_minus: float
    zeta: Optional[float] = None
    dzeta: Optional[float] = None
    ellipse_angle: Optional[float] = None
    ellipse_residual: Optional[float] = None


@dataclass
class ContourRunResult:
    state: ContourPairState
    samples: list[ContourSample] = field(default_factory=list)
    first_touch: Optional[float] = None
    last_touch: Optional[float] = None
    stop_reason: str = "t_end"

    @property
    def max_zeta(self) -> float:
        values = [s.zeta for s in self.samples if s.zeta is not None]
        return max(values) if values else 0.0

    def area_drift(self) -> dict[str, float]:
        first, last = self.samples[0], self.samples[-1]
        return {
            "area_plus": abs(last.area_plus - first.area_plus) / first.area_plus,
            "area_minus": abs(last.area_minus - first.area_minus) / first.area_minus,
        }


def _refine_switch(prev: ContourPairState, dt: float, mode: ContourMode, cfl: float, want: bool) -> float:
    """Bisect the sub-step tau in (0, dt] at which the overlap state becomes ``want``."""
    lo, hi = 0.0, dt
    while hi - lo > TOUCH_TOL:
        mid = 0.5 * (lo + hi)
        trial = step_contours(prev, mid, mode, cfl=cfl)
        if contours_overlap(trial.plus, trial.minus).overlapping == want:
            hi = mid
        else:
            lo = mid
    return prev.time + hi


def _sample(state: ContourPairState, overlap_area: float, track_background: bool, ellipse: bool) -> ContourSample:
    sample = ContourSample(
        t=state.time,
        overlap_area=overlap_area,
        area_plus=area(state.plus),
        area_minus=area(state.minus),
    )
    if track_background:
        bg = analytic_background(state.time, state.R, state.d, state.plus.size)
        sample.zeta, sample.dzeta = perturbation_norm(state, bg, state.R)
    if ellipse:
        fit = fit_ellipse(state.plus.nodes)
        sample.ellipse_angle = fit.angle
        sample.ellipse_residual = fit.residual
    return sample


def run_contours(
    state: ContourPairState,
    mode: ContourMode,
    *,
    t_end: float,
    cadence: float,
    dt: Optional[float] = None,
    cfl: float = CFL,
    max_halvings: int = 12,
    track_background: bool = True,
    fit_plus_ellipse: bool = True,
    stop_on_overlap: bool = True,
    on_output: Optional[OutputHook] = None,
) -> ContourRunResult:
    """Advance both patches to ``t_end``.

    Overlap is tested after every accepted step. The first touch and a later separation are
    refined by bisection to 1e-3 in time. The run stops early once the overlap exceeds a
    tenth of the smaller patch area; boundaries are not meaningful past that point.
    """
    mode = ContourMode(mode)
    initial = contours_overlap(state.plus, state.minus)
    result = ContourRunResult(state=state)
    result.samples.append(_sample(state, initial.area, track_background, fit_plus_ellipse))
    if on_output is not None:
        on_output(state)
    overlapping = initial.overlapping
    if overlapping:
        result.first_touch = state.time

    next_output = state.time + cadence
    dt_try = dt if dt is not None else stable_dt(state, mode, cfl)
    steps = 0
    while state.time < t_end - 1e-12:
        target = min(next_output, t_end)
        h = min(dt_try, target - state.time)
        prev = state
        state, h_used = step_with_halving(
            lambda s: step_contours(prev, s, mode, cfl=cfl), h, max_halvings=max_halvings, solver="contour"
        )
        if dt is None and h_used < h:
            dt_try = h_used
        steps += 1
        metrics.solver_steps.labels(solver="contour").inc()

        overlap = contours_overlap(state.plus, state.minus)
        if overlap.overlapping and not overlapping:
            touch = _refine_switch(prev, h_used, mode, cfl, True)
            if result.first_touch is None:
                result.first_touch = touch
                log.info("merger_detected", t=touch, solver="contour")
            else:
                log.info("patches_retouched", t=touch, first_touch=result.first_touch)
        elif overlapping and not overlap.overlapping:
            result.last_touch = _refine_switch(prev, h_used, mode, cfl, False)
            log.info("patches_separated", t=result.last_touch)
        overlapping = overlap.overlapping

        if steps % CHECK_EVERY == 0:
            for name, patch in (("plus", state.plus), ("minus", state.minus)):
                if self_intersects(patch):
                    raise GeometryError(f"{name} contour self-intersects at t={state.time:.6g}")
            if dt is None:
                dt_try = stable_dt(state, mode, cfl)

        smaller = min(area(state.plus), area(state.minus))
        stop = stop_on_overlap and overlap.area > OVERLAP_STOP_FRACTION * smaller
        if state.time >= target - 1e-12 or stop:
            result.samples.append(_sample(state, overlap.area, track_background, fit_plus_ellipse))
            if on_output is not None:
                on_output(state)
            next_output += cadence
        if stop:
            result.stop_reason = "overlap_exceeded"
            log.info("contour_run_stopped", t=state.time, overlap=overlap.area)
            break

    metrics.simulated_time.labels(solver="contour").set(state.time)
    result.state = state
    return result
