"""Parameter sweeps over resistivity or data scale, fanned out to a bounded process pool."""
from __future__ import annotations

import time
import uuid
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Any, Iterable, Literal

from pydantic import BaseModel, Field

from reconnect2d import __version__
from reconnect2d.config import Settings, load_settings
from reconnect2d.core.errors import ConfigurationError
from reconnect2d.diagnostics.stability import check_eps_values, eps_point, fit_order, nu_point
from reconnect2d.domain.models import (
    RIGHT_SCREENED,
    RIGHT_UNSCREENED,
    Handedness,
    PresetId,
    RunManifest,
    RunStatus,
    Scenario,
    ScenarioKind,
)
from reconnect2d.io.snapshots import write_manifest, write_table_csv
from reconnect2d.observability import metrics
from reconnect2d.observability.logging import bind_run_id, clear_run_id, get_logger
from reconnect2d.scenarios.presets import build_initial_pair

log = get_logger("sweep")

SweepParam = Literal["nu", "eps"]
DEFAULT_P = 1.5
PREDICTED_NU_ORDER = 0.5


class SweepResult(BaseModel):
    """Per-value metrics of a sweep and the fitted log-log slopes."""

    param: SweepParam
    values: list[float]
    metric: list[float]
    secondary: list[float]
    columns: tuple[str, str, str]
    order: float
    secondary_order: float
    predicted_order: float
    histories: dict[str, list[float]] = Field(default_factory=dict)

    def rows(self) -> list[tuple[Any, ...]]:
        out: list[tuple[Any, ...]] = list(zip(self.values, self.metric, self.secondary))
        out.append(("order", self.order, self.secondary_order))
        return out


def parse_values(text: str) -> list[float]:
    """Comma-separated floats; fractions such as ``1/8`` are accepted."""
    values = []
    for raw in text.split(","):
        item = raw.strip()
        if not item:
            continue
        try:
            if "/" in item:
                num, den = item.split("/", 1)
                values.append(float(num) / float(den))
            else:
                values.append(float(item))
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigurationError("values", f"not a number: {item!r}") from exc
    if not values:
        raise ConfigurationError("values", "at least one value is required")
    return values


def _check(scenario: Scenario, param: str, values: list[float]) -> list[float]:
    if param not in ("nu", "eps"):
        raise ConfigurationError("param", f"must be 'nu' or 'eps', got {param!r}")
    if scenario.kind is not ScenarioKind.eulerian:
        raise ConfigurationError("init.preset", f"sweeps run on grid presets, got {scenario.init.preset.value}")
    if param == "eps":
        if scenario.variant.handedness is not Handedness.right:
            raise ConfigurationError("model.handedness", "the eps sweep compares right-handed screened and unscreened runs")
        return check_eps_values(values)
    if len(values) < 3:
        raise ConfigurationError("values", "need at least three values")
    if any(v <= 0 for v in values):
        raise ConfigurationError("values", "must be > 0")
    return sorted(values, reverse=True)


def _eps_base(scenario: Scenario) -> Scenario:
    """The eps = 1 data of a screened smooth-merger scenario."""
    if scenario.init.preset is not PresetId.right_smooth_merger_screened:
        return scenario
    init = scenario.init.model_copy(update={"params": {**scenario.init.params, "eps": 1.0}})
    return scenario.model_copy(update={"init": init})


def _sweep_point(param: str, scenario: Scenario, value: float, cfl: float, max_halvings: int, p: float) -> dict[str, Any]:
    tau = build_initial_pair(scenario)
    T = scenario.time.t_end
    if param == "nu":
        ratio = scenario.model.nu_minus / scenario.model.nu_plus if scenario.model.nu_plus > 0 else None
        pt = nu_point(tau, scenario.variant, value, T, cfl=cfl, max_halvings=max_halvings, nu_ratio=ratio)
        return {"value": value, "metric": pt.l2, "secondary": pt.l1, "history": pt.history}
    pt = eps_point(tau, value, p, T, variants=(RIGHT_SCREENED, RIGHT_UNSCREENED), cfl=cfl, max_halvings=max_halvings)
    return {"value": value, "metric": pt.gap, "secondary": pt.overlap_gap, "history": []}


class SweepRunner:
    """Runs one scenario per sweep value; results land in a single sweep directory."""

    def __init__(self, settings: Settings | None = None):
        self.settings = settings or load_settings()

    def sweep_dir(self, scenario: Scenario, param: str, out_dir: str | Path | None = None) -> Path:
        if out_dir is not None:
            return Path(out_dir)
        if scenario.out.dir is not None:
            return Path(scenario.out.dir)
        return Path(self.settings.output_root) / f"{scenario.label}-sweep-{param}"

    def _points(self, param: str, scenario: Scenario, values: list[float], p: float) -> list[dict[str, Any]]:
        args = (self.settings.cfl, self.settings.max_halvings, p)
        workers = min(self.settings.threads, len(values))
        if workers <= 1:
            return [_sweep_point(param, scenario, v, *args) for v in values]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(_sweep_point, param, scenario, v, *args) for v in values]
            return [f.result() for f in futures]

    def run(
        self,
        scenario: Scenario,
        param: SweepParam,
        values: Iterable[float],
        *,
        p: float = DEFAULT_P,
        out_dir: str | Path | None = None,
    ) -> SweepResult:
        values = _check(scenario, param, list(values))
        if param == "eps":
            scenario = _eps_base(scenario)
        if param == "eps" and not 1 < p < 2:
            raise ConfigurationError("p", f"must satisfy 1 < p < 2, got {p}")
        root = self.sweep_dir(scenario, param, out_dir)
        root.mkdir(parents=True, exist_ok=True)
        bind_run_id(uuid.uuid4().hex, scenario=scenario.label, kind=f"sweep-{param}")
        manifest = RunManifest(
            scenario=scenario.model_dump(mode="json", exclude={"hypotheses"}),
            code_version=__version__,
            resolution=scenario.resolution(),
            status=RunStatus.running,
            measured={"param": param, "values": values},
        )
        write_manifest(manifest, root)
        log.info("sweep_started", param=param, values=values, workers=min(self.settings.threads, len(values)))

        start = time.perf_counter()
        status = RunStatus.aborted
        try:
            points = self._points(param, scenario, values, p)
            metric = [pt["metric"] for pt in points]
            secondary = [pt["secondary"] for pt in points]
            columns = ("nu", "l2_gap", "l1_gap") if param == "nu" else ("eps", "lp_gap", "overlap_gap")
            result = SweepResult(
                param=param,
                values=values,
                metric=metric,
                secondary=secondary,
                columns=columns,
                order=fit_order(values, metric),
                secondary_order=fit_order(values, secondary),
                predicted_order=PREDICTED_NU_ORDER if param == "nu" else 2.0 / p + 1.0,
                histories={f"{pt['value']:g}": pt["history"] for pt in points if pt["history"]},
            )
            write_table_csv(columns, result.rows(), root / "sweep.csv")
            manifest.measured = result.model_dump(mode="json")
            status = RunStatus.complete
            log.info("sweep_finished", param=param, order=result.order, predicted=result.predicted_order)
            return result
        finally:
            manifest.status = status
            manifest.wall_time_s = time.perf_counter() - start
            write_manifest(manifest, root)
            metrics.runs.labels(kind="sweep", status=status.value).inc()
            metrics.dump_metrics(root / self.settings.metrics_file)
            clear_run_id()


def run_sweep(
    scenario: Scenario,
    param: SweepParam,
    values: Iterable[float],
    settings: Settings | None = None,
    *,
    p: float = DEFAULT_P,
    out_dir: str | Path | None = None,
) -> SweepResult:
    return SweepRunner(settings).run(scenario, param, values, p=p, out_dir=out_dir)
