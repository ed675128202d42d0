import math

import numpy as np
import pytest

from reconnect2d.config import Settings
from reconnect2d.core.errors import ConfigurationError, HypothesisCheckError
from reconnect2d.domain.models import (
    ContourSection,
    DiagnosticsSection,
    GridSection,
    Handedness,
    InitSection,
    ModelSection,
    OutSection,
    PresetId,
    RunStatus,
    Scenario,
    TimeSection,
)
from reconnect2d.harness.report import build_report, contour_F_raster
from reconnect2d.harness.runner import ScenarioRunner
from reconnect2d.harness.sweep import SweepRunner, parse_values
from reconnect2d.io.snapshots import read_diagnostics_csv, read_manifest, read_pgm
from reconnect2d.scenarios.presets import patch_contours, point_vortex_preset

pytestmark = pytest.mark.integration


@pytest.fixture
def settings(tmp_path):
    return Settings(threads=1, output_root=str(tmp_path / "runs"))


def _patch_smooth(n=32, t_end=0.2, **diagnostics):
    return Scenario(
        name="patch_smooth_small",
        model=ModelSection(handedness=Handedness.left, screened=False),
        grid=GridSection(n=n),
        time=TimeSection(t_end=t_end, output_every=0.1),
        init=InitSection(preset=PresetId.left_patch_smooth),
        diagnostics=DiagnosticsSection(**diagnostics),
    )


def test_eulerian_run_writes_artifacts(settings, tmp_path):
    summary = ScenarioRunner(settings).run(_patch_smooth())
    root = tmp_path / "runs" / "patch_smooth_small"
    assert summary.status is RunStatus.complete
    assert summary.final_time == pytest.approx(0.2)
    assert summary.steps >= 2
    snaps = sorted(p.name for p in (root / "snapshots").iterdir())
    assert snaps == ["t00000.000000", "t00000.100000", "t00000.200000"]
    records = read_diagnostics_csv(root / "diagnostics.csv")
    assert [r.t for r in records] == pytest.approx([0.0, 0.1, 0.2])
    manifest = read_manifest(root)
    assert manifest.status is RunStatus.complete
    assert manifest.hypotheses.checks == {"disjoint_at_start": True}
    assert manifest.resolution == {"n": 32, "box": None}
    assert set(manifest.drifts) >= {"l2_plus", "l2_minus"}
    assert (root / "metrics.prom").read_text().count("r2d_runs_total") > 0


def test_eulerian_run_with_companion_and_tracers(settings, tmp_path):
    scenario = _patch_smooth(t_end=0.1, tracers=8, reference=True)
    summary = ScenarioRunner(settings).run(scenario, tmp_path / "explicit")
    assert (tmp_path / "explicit" / "companion_gaps.csv").is_file()
    assert summary.measured["max_tracer_deviation"] >= 0.0
    assert not (tmp_path / "runs").exists()


def test_snapshots_can_be_disabled(settings, tmp_path):
    scenario = _patch_smooth(t_end=0.1).model_copy(update={"out": OutSection(snapshots=False)})
    ScenarioRunner(settings).run(scenario, tmp_path / "quiet")
    assert not (tmp_path / "quiet" / "snapshots").exists()
    assert (tmp_path / "quiet" / "diagnostics.csv").is_file()


def test_failed_checklist_marks_manifest_aborted(settings, tmp_path):
    scenario = Scenario(
        model=ModelSection(handedness=Handedness.right),
        grid=GridSection(n=128),
        time=TimeSection(t_end=0.1),
        init=InitSection(preset=PresetId.right_smooth_merger, params={"amplitude": 2.0}),
    )
    with pytest.raises(HypothesisCheckError):
        ScenarioRunner(settings).run(scenario, tmp_path / "bad")
    manifest = read_manifest(tmp_path / "bad")
    assert manifest.status is RunStatus.aborted
    assert manifest.hypotheses.checks["normalization"] is False
    assert not (tmp_path / "bad" / "diagnostics.csv").exists()


def test_point_vortex_run_measures_merger(settings, tmp_path):
    scenario = point_vortex_preset(dt=2e-3)
    summary = ScenarioRunner(settings).run(scenario, tmp_path / "pv")
    assert summary.merger_time == pytest.approx(4 * math.pi, rel=1e-3)
    assert summary.measured["relative_error"] < 1e-3
    assert summary.drifts["x_over_y"] < 1e-8
    assert (tmp_path / "pv" / "trajectory.csv").is_file()


def test_contour_run_and_report(settings, tmp_path):
    scenario = Scenario(
        name="patch_short",
        model=ModelSection(handedness=Handedness.left),
        contour=ContourSection(nodes=64),
        time=TimeSection(t_end=0.2, output_every=0.1),
        init=InitSection(preset=PresetId.left_patch_merger, params={"R": 0.05, "d": 0.025}),
    )
    root = tmp_path / "contour"
    summary = ScenarioRunner(settings).run(scenario, root)
    assert summary.final_time == pytest.approx(0.2)
    assert summary.events["merger"] is None
    assert abs(summary.drifts["area_plus"]) < 1e-3
    header = (root / "contour_diagnostics.csv").read_text().splitlines()[0]
    assert header.startswith("t,overlap_area,area_plus,area_minus,zeta")

    report = build_report(root)
    assert report.contour_snapshots == 3
    assert report.field_snapshots == 0
    assert len(report.images) == 6
    summary_rows = (root / "contour_summary.csv").read_text().splitlines()
    assert summary_rows[0] == "t,area_plus,area_minus,overlap_area,overlapping"
    assert len(summary_rows) == 4


def test_report_rebuilds_field_diagnostics(settings, tmp_path):
    root = tmp_path / "field"
    ScenarioRunner(settings).run(_patch_smooth(), root)
    before = read_diagnostics_csv(root / "diagnostics.csv")
    (root / "diagnostics.csv").unlink()
    report = build_report(root)
    assert report.field_snapshots == 3
    after = read_diagnostics_csv(root / "diagnostics.csv")
    assert [r.l2_plus for r in after] == pytest.approx([r.l2_plus for r in before])
    img = read_pgm(root / "snapshots" / "t00000.000000" / "F.pgm")
    assert img.shape == (32, 32)


def test_report_needs_snapshots(tmp_path, settings):
    scenario = _patch_smooth(t_end=0.1).model_copy(update={"out": OutSection(snapshots=False)})
    ScenarioRunner(settings).run(scenario, tmp_path / "nosnap")
    with pytest.raises(ConfigurationError, match="no snapshots"):
        build_report(tmp_path / "nosnap")


def test_contour_F_raster_is_half_strength():
    state = patch_contours(0.05, 0.025, 64)
    F = contour_F_raster(state.plus, state.minus, size=64)
    assert set(np.unique(F)) <= {-0.5, 0.0, 0.5}
    assert F.max() == 0.5 and F.min() == -0.5


def test_parse_values():
    assert parse_values("1/8, 1/4,") == [0.125, 0.25]
    assert parse_values("1e-3,1e-4") == [1e-3, 1e-4]
    for bad in ("", "a,b", "1/0"):
        with pytest.raises(ConfigurationError):
            parse_values(bad)


def test_nu_sweep_fits_an_order(settings, tmp_path):
    base = _patch_smooth(t_end=0.1)
    result = SweepRunner(settings).run(base, "nu", [2.5e-3, 1e-2, 5e-3], out_dir=tmp_path / "sweep")
    assert result.values == [1e-2, 5e-3, 2.5e-3]
    assert all(g > 0 for g in result.metric)
    assert math.isfinite(result.order)
    assert result.predicted_order == 0.5
    lines = (tmp_path / "sweep" / "sweep.csv").read_text().splitlines()
    assert lines[0] == "nu,l2_gap,l1_gap"
    assert lines[-1].startswith("order,")
    assert read_manifest(tmp_path / "sweep").status is RunStatus.complete


@pytest.mark.parametrize(
    "param,values,key",
    [
        ("kappa", [1.0, 2.0, 3.0], "param"),
        ("nu", [1e-3, 1e-4], "values"),
        ("nu", [1e-3, 0.0, 1e-4], "values"),
        ("eps", [1 / 4, 1 / 8, 1 / 16], "model.handedness"),
    ],
)
def test_sweep_rejects_bad_requests(settings, tmp_path, param, values, key):
    with pytest.raises(ConfigurationError) as info:
        SweepRunner(settings).run(_patch_smooth(), param, values, out_dir=tmp_path / "s")
    assert info.value.key == key
    assert not (tmp_path / "s").exists()


def test_sweep_needs_grid_preset(settings):
    with pytest.raises(ConfigurationError) as info:
        SweepRunner(settings).run(point_vortex_preset(), "nu", [1e-2, 1e-3, 1e-4])
    assert info.value.key == "init.preset"
