"""Desk-scale acceptance runs. Minutes each; deselected unless ``-m slow`` is given."""
import math

import pytest

from reconnect2d.config import Settings
from reconnect2d.contour.background import analytic_background, rotation_rate
from reconnect2d.contour.dynamics import ContourPairState
from reconnect2d.contour.simulation import run_contours
from reconnect2d.diagnostics.records import norm_drifts
from reconnect2d.diagnostics.stability import inviscid_order, lagrangian_sweep, stability_gap
from reconnect2d.domain.models import RIGHT_UNSCREENED, ContourMode
from reconnect2d.harness.runner import ScenarioRunner
from reconnect2d.scenarios.presets import (
    build_initial_pair,
    left_patch_merger,
    point_vortex_preset,
    right_smooth_merger,
    right_smooth_merger_screened,
    smooth_merger_pair,
)
from reconnect2d.solver.eulerian import SolverState
from reconnect2d.solver.simulation import integrate
from reconnect2d.spectral.grid import TorusGrid

pytestmark = [pytest.mark.slow, pytest.mark.timeout(0)]


@pytest.fixture
def runner(tmp_path):
    return ScenarioRunner(Settings(threads=2, output_root=str(tmp_path)))


def test_screened_norms_are_conserved():
    scenario = right_smooth_merger(n=256, t_end=5.0, screened=True)
    state = SolverState(build_initial_pair(scenario), scenario.variant)
    result = integrate(state, 5.0, cadence=0.5)
    drifts = norm_drifts(result.records[0], result.records[-1])
    assert max(abs(v) for v in drifts.values()) < 1e-3


def test_point_vortex_merger(runner):
    summary = runner.run(point_vortex_preset())
    assert summary.merger_time == pytest.approx(4 * math.pi, rel=1e-2)
    assert summary.drifts["x_over_y"] < 1e-8
    assert summary.measured["x2_affine_residual"] < 1e-6


def test_kirchhoff_ellipse_rotates_rigidly():
    bg = analytic_background(0.0, 1.0, 20.0, nodes=512)
    state = ContourPairState(bg.plus, bg.minus, R=1.0, d=20.0)
    # one full turn of the shape at the measured rate 2/9
    t_end = 9 * math.pi
    result = run_contours(state, ContourMode.unscreened_euler, t_end=t_end, cadence=t_end / 48, track_background=False)
    fit = rotation_rate([s.t for s in result.samples], [s.ellipse_angle for s in result.samples])
    assert fit.constancy < 1e-2
    assert max(s.ellipse_residual for s in result.samples) < 5e-3
    assert max(result.area_drift().values()) < 1e-5


def test_left_patch_merger(runner):
    summary = runner.run(left_patch_merger(R=0.05, nodes=512, t_end=9 * math.pi / 4))
    first, last = summary.events["merger"], summary.events["separation"]
    assert first is not None and 0 < first < 9 * math.pi / 4
    assert last is None or first < last < 9 * math.pi / 4
    assert summary.measured["max_zeta"] < 0.1


def test_right_smooth_merger(runner):
    summary = runner.run(right_smooth_merger(n=256))
    m = summary.measured
    assert summary.merger_time is not None
    assert m["moments_increasing"] == 1.0
    assert m["oracle_rel_error"] < 1e-2
    assert m["max_symmetry_defect_rel"] < 1e-8
    assert m["components_F_initial"] == 4
    assert m["components_F_final"] == 2


def test_screened_smooth_merger_reproduces_merger(runner):
    summary = runner.run(right_smooth_merger_screened(eps=1 / 8, n=256))
    assert summary.merger_time is not None
    assert summary.measured["final_overlap"] > 0


def test_stability_scaling():
    base = smooth_merger_pair(TorusGrid(256, 12.8))
    res = stability_gap(base, [1 / 4, 1 / 8, 1 / 16], p=1.5, T=1.0)
    assert res.predicted_slope == pytest.approx(7 / 3)
    assert res.passes, res.slope
    lag = lagrangian_sweep(base, [1 / 4, 1 / 8, 1 / 16], T=1.0)
    assert all(r >= 3.0 for r in lag.ratios), lag.ratios


def test_inviscid_limit_order():
    tau = smooth_merger_pair(TorusGrid(256, 12.8))
    res = inviscid_order(tau, RIGHT_UNSCREENED, [1e-3, 1e-4, 1e-5], T=1.0)
    assert res.l2_order >= 0.45
