from __future__ import annotations

import math
from contextlib import contextmanager
from pathlib import Path
from typing import Any, Iterator, Optional

import orjson
import typer
from pydantic import ValidationError
from rich import print
from rich.markup import escape
from rich.table import Table

from reconnect2d.config import Settings, load_settings
from reconnect2d.core.errors import ConfigurationError, Reconnect2DError
from reconnect2d.domain.models import Scenario
from reconnect2d.harness.report import build_report
from reconnect2d.harness.runner import ScenarioRunner
from reconnect2d.harness.sweep import SweepRunner, parse_values
from reconnect2d.kernels.bessel import CHECK_RADII, kernel_checks
from reconnect2d.observability.logging import configure_logging

app = typer.Typer(help="reconnect2d - simulator and verification lab for coupled active-scalar reconnection.")

_CONSTRAINTS = {
    "greater_than_equal": ("ge", "must be ≥ {}"),
    "greater_than": ("gt", "must be > {}"),
    "less_than_equal": ("le", "must be ≤ {}"),
    "less_than": ("lt", "must be < {}"),
}


def _reason(err: dict[str, Any]) -> str:
    kind = err.get("type", "")
    ctx = err.get("ctx") or {}
    if kind in _CONSTRAINTS:
        key, template = _CONSTRAINTS[kind]
        return template.format(ctx.get(key))
    if kind == "extra_forbidden":
        return "unknown key"
    if kind == "missing":
        return "required key is missing"
    if kind == "enum":
        return f"must be one of {ctx.get('expected')}"
    msg = str(err.get("msg", "invalid value"))
    return msg.removeprefix("Value error, ")


def parse_config(path: str | Path) -> Scenario:
    """Read a JSON scenario file; any schema violation becomes a ConfigurationError naming the key."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError("config", f"{path} does not exist")
    try:
        data = orjson.loads(path.read_bytes())
    except orjson.JSONDecodeError as exc:
        raise ConfigurationError("config", f"invalid JSON: {exc}") from exc
    try:
        return Scenario.model_validate(data)
    except ValidationError as exc:
        err = exc.errors()[0]
        key = ".".join(str(part) for part in err["loc"]) or "config"
        raise ConfigurationError(key, _reason(err)) from exc


def _settings(threads: Optional[int]) -> Settings:
    settings = load_settings()
    if threads is not None:
        if threads < 1:
            raise ConfigurationError("threads", "must be ≥ 1")
        settings = settings.model_copy(update={"threads": threads})
    configure_logging(settings.log_level, settings.json_logs)
    return settings


@contextmanager
def _exit_on_error() -> Iterator[None]:
    try:
        yield
    except Reconnect2DError as exc:
        print(f"[red]error:[/red] {escape(str(exc))}")
        raise typer.Exit(code=exc.exit_code) from exc


def _fmt(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return "nan" if math.isnan(value) else f"{value:.6g}"
    return str(value)


@app.command()
def run(
    config: Path = typer.Option(..., "--config", "-c", help="Scenario JSON file."),
    out: Optional[Path] = typer.Option(None, "--out", help="Run directory; overrides out.dir."),
    threads: Optional[int] = typer.Option(None, envvar="RECONNECT2D_THREADS"),
):
    """Run one scenario and write its artifacts."""
    with _exit_on_error():
        settings = _settings(threads)
        scenario = parse_config(config)
        runner = ScenarioRunner(settings)
        summary = runner.run(scenario, out)

        t = Table(title=f"Run {summary.scenario} ({summary.kind.value})")
        t.add_column("quantity"); t.add_column("value")
        t.add_row("status", summary.status.value)
        t.add_row("final_time", _fmt(summary.final_time))
        t.add_row("steps", str(summary.steps))
        for name, value in summary.events.items():
            t.add_row(f"event.{name}", _fmt(value))
        for name, value in summary.drifts.items():
            t.add_row(f"drift.{name}", _fmt(value))
        for name, value in summary.measured.items():
            if not isinstance(value, dict):
                t.add_row(name, _fmt(value))
        print(t)
        print(f"artifacts in [bold]{escape(str(runner.run_dir(scenario, out)))}[/bold]")


@app.command()
def sweep(
    config: Path = typer.Option(..., "--config", "-c", help="Base scenario JSON file."),
    param: str = typer.Option(..., "--param", help="nu or eps"),
    values: str = typer.Option(..., "--values", help="Comma-separated values, e.g. 1e-3,1e-4,1e-5"),
    p: float = typer.Option(1.5, "--p", help="L^p exponent of the eps gap."),
    out: Optional[Path] = typer.Option(None, "--out"),
    threads: Optional[int] = typer.Option(None, envvar="RECONNECT2D_THREADS"),
):
    """Fan a scenario out over nu or eps and fit the convergence order."""
    with _exit_on_error():
        settings = _settings(threads)
        scenario = parse_config(config)
        result = SweepRunner(settings).run(scenario, param, parse_values(values), p=p, out_dir=out)

        t = Table(title=f"Sweep over {param}")
        for column in result.columns:
            t.add_column(column)
        for row in result.rows():
            t.add_row(*(_fmt(v) for v in row))
        print(t)
        print(f"order={result.order:.4g} (predicted {result.predicted_order:.4g})")


@app.command()
def report(
    dir: Path = typer.Option(..., "--dir", "-d", help="Finished run directory."),
):
    """Regenerate CSV summaries and PGM images from a run's snapshots."""
    with _exit_on_error():
        _settings(None)
        result = build_report(dir)
        t = Table(title=f"Report {result.run_dir}")
        t.add_column("artifact"); t.add_column("count")
        t.add_row("field snapshots", str(result.field_snapshots))
        t.add_row("contour snapshots", str(result.contour_snapshots))
        t.add_row("images", str(len(result.images)))
        t.add_row("tables", str(len(result.tables)))
        print(t)


@app.command()
def kernels():
    """Compare the K0/K1/G~ evaluation against the ascending series at sample radii."""
    t = Table(title="Bessel kernels")
    for column in ("r", "K0", "K1", "G~", "K0 rel err", "K1 rel err"):
        t.add_column(column)
    for check in kernel_checks(CHECK_RADII):
        t.add_row(
            f"{check.r:g}",
            f"{check.k0:.12g}",
            f"{check.k1:.12g}",
            f"{check.gtilde:.12g}",
            f"{check.k0_rel_error:.2e}",
            f"{check.k1_rel_error:.2e}",
        )
    print(t)


def main():
    """Entry point for the CLI."""
    app()
