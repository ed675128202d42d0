"""Executes one scenario end to end: hypothesis gate, integration, artifacts and manifest."""
from __future__ import annotations

import time
import uuid
from pathlib import Path
from typing import Any, Optional

from reconnect2d import __version__
from reconnect2d.config import Settings, load_settings
from reconnect2d.contour.background import rotation_rate
from reconnect2d.contour.simulation import run_contours
from reconnect2d.core.errors import HypothesisCheckError
from reconnect2d.diagnostics.records import norm_drifts
from reconnect2d.diagnostics.topology import trichotomy_report
from reconnect2d.domain.models import RunManifest, RunStatus, RunSummary, Scenario, ScenarioKind
from reconnect2d.io.snapshots import (
    write_contour_snapshot,
    write_diagnostics_csv,
    write_manifest,
    write_pair_snapshot,
    write_table_csv,
)
from reconnect2d.observability import metrics
from reconnect2d.observability.logging import bind_run_id, clear_run_id, get_logger
from reconnect2d.point_vortex import merger_rate, pv_integrate
from reconnect2d.scenarios.presets import (
    build_initial_contours,
    build_initial_pair,
    build_point_vortex,
    contour_mode,
    require_hypotheses,
)
from reconnect2d.solver.eulerian import SolverState
from reconnect2d.solver.simulation import integrate, merger_summary, unscreened_companion

log = get_logger("runner")

CONTOUR_COLUMNS = ("t", "overlap_area", "area_plus", "area_minus", "zeta", "dzeta", "ellipse_angle", "ellipse_residual")
DEFAULT_PV_DT = 1e-3


def _blank(v: Optional[float]) -> Any:
    return "" if v is None else v


class ScenarioRunner:
    """Runs scenarios into per-run directories under ``settings.output_root``."""

    def __init__(self, settings: Settings | None = None):
        self.settings = settings or load_settings()

    def run_dir(self, scenario: Scenario, out_dir: str | Path | None = None) -> Path:
        if out_dir is not None:
            return Path(out_dir)
        if scenario.out.dir is not None:
            return Path(scenario.out.dir)
        return Path(self.settings.output_root) / scenario.label

    def run(self, scenario: Scenario, out_dir: str | Path | None = None) -> RunSummary:
        root = self.run_dir(scenario, out_dir)
        root.mkdir(parents=True, exist_ok=True)
        bind_run_id(uuid.uuid4().hex, scenario=scenario.label, kind=scenario.kind.value)
        manifest = RunManifest(
            scenario=scenario.model_dump(mode="json", exclude={"hypotheses"}),
            code_version=__version__,
            resolution=scenario.resolution(),
            status=RunStatus.running,
        )
        write_manifest(manifest, root)
        log.info("run_started", dir=str(root), resolution=scenario.resolution())

        start = time.perf_counter()
        status = RunStatus.aborted
        summary: RunSummary | None = None
        try:
            with metrics.run_latency.time():
                checked = require_hypotheses(scenario)
                manifest.hypotheses = checked.hypotheses
                summary = self._dispatch(checked, root)
            status = RunStatus.complete
            return summary
        except HypothesisCheckError as exc:
            manifest.hypotheses = exc.report
            raise
        finally:
            manifest.status = status
            manifest.wall_time_s = time.perf_counter() - start
            if summary is not None:
                summary.status = status
                manifest.drifts = summary.drifts
                manifest.events = summary.events
                manifest.measured = summary.measured
            write_manifest(manifest, root)
            metrics.runs.labels(kind=scenario.kind.value, status=status.value).inc()
            metrics.dump_metrics(root / self.settings.metrics_file)
            log.info("run_finished", status=status.value, wall_time_s=round(manifest.wall_time_s, 3))
            clear_run_id()

    def _dispatch(self, scenario: Scenario, root: Path) -> RunSummary:
        if scenario.kind is ScenarioKind.eulerian:
            return self._run_eulerian(scenario, root)
        if scenario.kind is ScenarioKind.contour:
            return self._run_contour(scenario, root)
        return self._run_point_vortex(scenario, root)

    # ------------------------------------------------------------------
    # Eulerian
    # ------------------------------------------------------------------

    def _run_eulerian(self, scenario: Scenario, root: Path) -> RunSummary:
        sigma = build_initial_pair(scenario)
        state = SolverState(sigma, scenario.variant, nu_plus=scenario.model.nu_plus, nu_minus=scenario.model.nu_minus)
        diag = scenario.diagnostics
        reference = unscreened_companion(state) if diag.reference else None

        def on_output(s: SolverState, rec) -> None:
            if scenario.out.snapshots:
                target = write_pair_snapshot(s.sigma, root)
                log.debug("output_written", t=s.time, dir=str(target))

        def on_abort(s: SolverState) -> str:
            return str(write_pair_snapshot(s.sigma, root / "abort"))

        result = integrate(
            state,
            scenario.time.t_end,
            cadence=scenario.time.cadence,
            dt=scenario.time.dt,
            cfl=self.settings.cfl,
            max_halvings=self.settings.max_halvings,
            reference=reference,
            tracer_count=diag.tracers,
            support_threshold=diag.support_threshold,
            oracle=diag.oracle,
            on_output=on_output,
            on_abort=on_abort,
        )
        write_diagnostics_csv(result.records, root / "diagnostics.csv")
        if result.companion_gaps:
            write_table_csv(
                ("t", "l1", "l2", "lp"),
                ((g["t"], g["l1"], g["l2"], g["lp"]) for g in result.companion_gaps),
                root / "companion_gaps.csv",
            )

        measured: dict[str, Any] = dict(merger_summary(result))
        measured["components_F_initial"] = result.records[0].components_F
        measured["components_F_final"] = result.records[-1].components_F
        if result.max_tracer_deviation is not None:
            measured["max_tracer_deviation"] = result.max_tracer_deviation
        if result.events.get("merger") is not None:
            measured["trichotomy"] = trichotomy_report(result.state.sigma.F).model_dump()
        return RunSummary(
            scenario=scenario.label,
            kind=scenario.kind,
            final_time=result.state.time,
            steps=result.steps,
            drifts=norm_drifts(result.records[0], result.records[-1]),
            events=result.events,
            measured=measured,
        )

    # ------------------------------------------------------------------
    # Contour dynamics
    # ------------------------------------------------------------------

    def _run_contour(self, scenario: Scenario, root: Path) -> RunSummary:
        state = build_initial_contours(scenario, self.settings.threads)
        mode = contour_mode(scenario)

        def on_output(s) -> None:
            if scenario.out.snapshots:
                write_contour_snapshot(s.plus, s.minus, s.time, root)

        result = run_contours(
            state,
            mode,
            t_end=scenario.time.t_end,
            cadence=scenario.time.cadence,
            dt=scenario.time.dt,
            cfl=self.settings.cfl,
            max_halvings=self.settings.max_halvings,
            on_output=on_output,
        )
        write_table_csv(
            CONTOUR_COLUMNS,
            (
                (s.t, s.overlap_area, s.area_plus, s.area_minus)
                + tuple(_blank(v) for v in (s.zeta, s.dzeta, s.ellipse_angle, s.ellipse_residual))
                for s in result.samples
            ),
            root / "contour_diagnostics.csv",
        )

        measured: dict[str, Any] = {
            "first_touch": result.first_touch,
            "last_touch": result.last_touch,
            "max_zeta": result.max_zeta,
            "stop_reason": result.stop_reason,
        }
        if scenario.hypotheses is not None:
            for key in ("predicted_first_touch", "predicted_separation"):
                if key in scenario.hypotheses.measured:
                    measured[key] = scenario.hypotheses.measured[key]
        fitted = [(s.t, s.ellipse_angle) for s in result.samples if s.ellipse_angle is not None]
        if len(fitted) >= 2:
            rotation = rotation_rate([t for t, _ in fitted], [a for _, a in fitted])
            measured["rotation"] = rotation.model_dump()
            measured["max_ellipse_residual"] = max(s.ellipse_residual or 0.0 for s in result.samples)
        return RunSummary(
            scenario=scenario.label,
            kind=scenario.kind,
            final_time=result.state.time,
            steps=result.state.step_count,
            drifts=result.area_drift(),
            events={"merger": result.first_touch, "separation": result.last_touch},
            measured=measured,
        )

    # ------------------------------------------------------------------
    # Point vortex
    # ------------------------------------------------------------------

    def _run_point_vortex(self, scenario: Scenario, root: Path) -> RunSummary:
        s0 = build_point_vortex(scenario)
        traj = pv_integrate(s0, scenario.time.dt or DEFAULT_PV_DT, scenario.time.t_end)
        write_table_csv(("t", "x", "y"), zip(traj.times, traj.xs, traj.ys), root / "trajectory.csv")
        slope, _, residual = traj.affine_fit()
        measured = {
            "predicted_merger_time": traj.predicted,
            "merger_time": traj.merger_time,
            "relative_error": traj.relative_error,
            "merger_rate": merger_rate(s0.x, s0.y),
            "x2_slope": slope,
            "x2_affine_residual": residual,
        }
        log.info(
            "merger_time_compared",
            measured=traj.merger_time,
            predicted=traj.predicted,
            relative_error=traj.relative_error,
        )
        return RunSummary(
            scenario=scenario.label,
            kind=scenario.kind,
            final_time=float(traj.times[-1]),
            steps=len(traj.times) - 1,
            drifts={"x_over_y": traj.ratio_drift},
            events={"merger": traj.merger_time},
            measured=measured,
        )


def run_scenario(scenario: Scenario, settings: Settings | None = None, out_dir: str | Path | None = None) -> RunSummary:
    return ScenarioRunner(settings).run(scenario, out_dir)


