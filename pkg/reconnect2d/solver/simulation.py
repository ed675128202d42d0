"""Eulerian time loop: output cadence, event detection, companion runs and Lagrangian markers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Optional

import numpy as np

from reconnect2d.core.errors import DomainError, NumericAbort
from reconnect2d.core.retry import step_with_halving
from reconnect2d.diagnostics.fields import lp_distance
from reconnect2d.diagnostics.records import measure, moment_derivatives
from reconnect2d.domain.models import DiagnosticsRecord, ModelVariant, Screening
from reconnect2d.observability import metrics
from reconnect2d.observability.logging import get_logger
from reconnect2d.solver.eulerian import CFL, SolverState, stable_dt, step_rk4, velocities
from reconnect2d.solver.tracers import TracerSet, advect_tracers, field_sampler, periodic_distance
from reconnect2d.spectral.grid import ScalarPair

log = get_logger(__name__)

OutputHook = Callable[[SolverState, DiagnosticsRecord], None]
AbortHook = Callable[[SolverState], Optional[str]]


@dataclass
class EulerianResult:
    state: SolverState
    records: list[DiagnosticsRecord] = field(default_factory=list)
    events: dict[str, Optional[float]] = field(default_factory=dict)
    reference: Optional[SolverState] = None
    companion_gaps: list[dict[str, float]] = field(default_factory=list)
    tracers: Optional[TracerSet] = None
    reference_tracers: Optional[TracerSet] = None
    steps: int = 0

    @property
    def max_tracer_deviation(self) -> Optional[float]:
        values = [r.tracer_deviation for r in self.records if r.tracer_deviation is not None]
        return max(values) if values else None


def seed_tracers(sigma: ScalarPair, count: int, level: float = 0.5) -> np.ndarray:
    """Nodes where |sigma+| >= level * max, thinned evenly to ``count`` points."""
    plus = np.abs(sigma.plus.values)
    rows, cols = np.nonzero(plus >= level * plus.max())
    pick = np.linspace(0, len(rows) - 1, min(count, len(rows))).round().astype(int)
    x = sigma.grid.coords
    return np.stack((x[cols[pick]], x[rows[pick]]), axis=-1)


def tracer_deviation(a: TracerSet, b: TracerSet, box: float) -> float:
    xp, xm = a.current()
    yp, ym = b.current()
    return float(max(periodic_distance(xp, yp, box).max(), periodic_distance(xm, ym, box).max()))


def supports_intersect(sigma: ScalarPair, threshold: float) -> bool:
    theta = threshold * max(sigma.max_abs, 1e-300)
    return bool(np.any((np.abs(sigma.plus.values) > theta) & (np.abs(sigma.minus.values) > theta)))


def unscreened_companion(state: SolverState) -> SolverState:
    variant = ModelVariant(handedness=state.variant.handedness, screening=Screening.unscreened)
    return replace(state, variant=variant, step_count=0)


def _near_edge(tracers: TracerSet, box: float, h: float) -> bool:
    plus, minus = tracers.current()
    edge = 0.5 * box - 2.0 * h
    return bool(np.any(np.abs(plus) > edge) or np.any(np.abs(minus) > edge))


def integrate(
    state: SolverState,
    t_end: float,
    *,
    cadence: Optional[float] = None,
    dt: Optional[float] = None,
    cfl: float = CFL,
    max_halvings: int = 12,
    reference: Optional[SolverState] = None,
    tracer_count: int = 0,
    support_threshold: float = 1e-6,
    oracle: bool = False,
    gap_p: float = 2.0,
    on_output: Optional[OutputHook] = None,
    on_abort: Optional[AbortHook] = None,
) -> EulerianResult:
    """Advance ``state`` (and ``reference`` in lockstep, with the same steps) to ``t_end``.

    Diagnostics are recorded at t = 0 and every ``cadence``. A merger event is the first
    step at which the thresholded supports of sigma+ and sigma- share a node; a topology
    event is the first output whose F-component count differs from the initial one.
    """
    cadence = cadence if cadence is not None else (t_end / 50 if t_end > 0 else 1.0)
    grid = state.grid
    oracle_variant = state.variant if oracle else None
    result = EulerianResult(state=state, reference=reference)

    tracers = ref_tracers = None
    if tracer_count > 0:
        seeds = seed_tracers(state.sigma, tracer_count)
        tracers = TracerSet(seeds)
        ref_tracers = TracerSet(seeds) if reference is not None else None

    def record(s: SolverState) -> DiagnosticsRecord:
        nonlocal oracle_variant
        dev = tracer_deviation(tracers, ref_tracers, grid.box) if ref_tracers is not None else None
        try:
            rec = measure(
                s.sigma,
                support_threshold=support_threshold,
                oracle_variant=oracle_variant,
                tracer_deviation=dev,
            )
        except DomainError as exc:
            log.info("oracle_disabled", t=s.time, reason=str(exc))
            oracle_variant = None
            rec = measure(s.sigma, support_threshold=support_threshold, tracer_deviation=dev)
        result.records.append(rec)
        if result.reference is not None:
            a, b = s.sigma, result.reference.sigma
            result.companion_gaps.append(
                {
                    "t": s.time,
                    "l1": lp_distance(a.plus, b.plus, 1.0) + lp_distance(a.minus, b.minus, 1.0),
                    "l2": lp_distance(a.plus, b.plus, 2.0) + lp_distance(a.minus, b.minus, 2.0),
                    "lp": lp_distance(a.plus, b.plus, gap_p) + lp_distance(a.minus, b.minus, gap_p),
                }
            )
        if on_output is not None:
            on_output(s, rec)
        return rec

    first = record(state)
    components0 = first.components_F
    result.events = {"merger": None, "components_change": None}
    if supports_intersect(state.sigma, support_threshold):
        result.events["merger"] = state.time

    next_output = state.time + cadence
    escaped = False
    while state.time < t_end - 1e-12:
        target = min(next_output, t_end)
        h = dt if dt is not None else stable_dt(state, cfl)
        if reference is not None and dt is None:
            h = min(h, stable_dt(result.reference, cfl))
        h = min(h, target - state.time)
        if tracers is not None:
            v_start = velocities(state)
            r_start = velocities(result.reference) if result.reference is not None else None

        prev, prev_ref = state, result.reference

        def advance(step: float):
            new = step_rk4(prev, step, cfl=cfl)
            new_ref = step_rk4(prev_ref, step, cfl=cfl) if prev_ref is not None else None
            return new, new_ref

        try:
            (state, ref), h_used = step_with_halving(advance, h, max_halvings=max_halvings, solver="eulerian")
        except NumericAbort as exc:
            metrics.numeric_aborts.labels(solver="eulerian").inc()
            dump = on_abort(prev) if on_abort is not None else None
            log.error("numeric_abort", t=prev.time, dump=dump)
            raise NumericAbort(str(exc), last_good_time=prev.time, dump_path=dump) from exc
        result.reference = ref
        result.steps += 1
        metrics.solver_steps.labels(solver="eulerian").inc()

        if tracers is not None:
            v_end = velocities(state)
            tracers = advect_tracers(
                tracers, field_sampler(v_start[0], v_end[0], h_used), field_sampler(v_start[1], v_end[1], h_used), h_used, box=grid.box
            )
            if ref_tracers is not None:
                r_end = velocities(ref)
                ref_tracers = advect_tracers(
                    ref_tracers,
                    field_sampler(r_start[0], r_end[0], h_used),
                    field_sampler(r_start[1], r_end[1], h_used),
                    h_used,
                    box=grid.box,
                )
            if not escaped and _near_edge(tracers, grid.box, grid.spacing):
                escaped = True
                log.warning("tracer_escaped", t=state.time)

        if result.events["merger"] is None and supports_intersect(state.sigma, support_threshold):
            result.events["merger"] = state.time
            log.info("merger_detected", t=state.time, solver="eulerian")

        if state.time >= target - 1e-12:
            rec = record(state)
            if result.events["components_change"] is None and rec.components_F != components0:
                result.events["components_change"] = state.time
                log.info("components_changed", t=state.time, before=components0, after=rec.components_F)
            next_output += cadence

    metrics.simulated_time.labels(solver="eulerian").set(state.time)
    result.state = state
    result.tracers = tracers
    result.reference_tracers = ref_tracers
    return result


def advance_to(state: SolverState, t_end: float, *, cfl: float = CFL, max_halvings: int = 12) -> SolverState:
    """Plain CFL-stepped advance without diagnostics."""
    while state.time < t_end - 1e-12:
        h = min(stable_dt(state, cfl), t_end - state.time)
        prev = state
        state, _ = step_with_halving(lambda s: step_rk4(prev, s, cfl=cfl), h, max_halvings=max_halvings)
        metrics.solver_steps.labels(solver="eulerian").inc()
    return state


def merger_summary(result: EulerianResult) -> dict[str, float]:
    """E_j monotonicity and oracle agreement over the records taken before merger."""
    records = result.records
    merger = result.events.get("merger")
    pre = [r for r in records if merger is None or r.t <= merger]
    increasing = all(b.E1 > a.E1 and b.E2 > a.E2 for a, b in zip(pre, pre[1:]))
    worst = 0.0
    by_time = {r.t: r for r in records}
    for t, d1, d2 in moment_derivatives(pre):
        rec = by_time[t]
        if rec.oracle_E1 is None or rec.oracle_E2 is None:
            continue
        size = math.hypot(rec.oracle_E1, rec.oracle_E2)
        if size > 0:
            worst = max(worst, max(abs(d1 - rec.oracle_E1), abs(d2 - rec.oracle_E2)) / size)
    peak = max(r.linf_plus for r in records)
    return {
        "moments_increasing": float(increasing),
        "oracle_rel_error": worst,
        "max_symmetry_defect_rel": max(r.symmetry_defect for r in records) / peak if peak > 0 else 0.0,
        "final_overlap": records[-1].overlap,
        "merger_time": merger if merger is not None else math.nan,
    }
