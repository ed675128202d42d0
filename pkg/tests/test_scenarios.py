import math

import numpy as np
import pytest

from reconnect2d.core.errors import ConfigurationError, HypothesisCheckError, ResolutionError
from reconnect2d.domain.models import (
    ContourMode,
    GridSection,
    Handedness,
    InitSection,
    ModelSection,
    PresetId,
    Scenario,
    ScenarioKind,
    TimeSection,
)
from reconnect2d.scenarios.presets import (
    build_initial_contours,
    build_initial_pair,
    build_point_vortex,
    check_hypotheses,
    contour_mode,
    eps_sweep,
    grid_for,
    left_patch_merger,
    left_patch_smooth,
    nu_sweep,
    point_vortex_preset,
    resolve_params,
    right_smooth_merger,
    right_smooth_merger_screened,
    smooth_merger_pair,
    smooth_step,
)
from reconnect2d.spectral.grid import TorusGrid


def _smooth(n=128, **params):
    return Scenario(
        model=ModelSection(handedness=Handedness.right),
        grid=GridSection(n=n),
        time=TimeSection(t_end=1.0),
        init=InitSection(preset=PresetId.right_smooth_merger, params=params),
    )


def test_smooth_step_is_a_step():
    t = np.array([-1.0, 0.0, 0.5, 1.0, 2.0])
    assert smooth_step(t).tolist() == pytest.approx([0.0, 0.0, 0.5, 1.0, 1.0])


def test_smooth_merger_passes_checklist():
    scenario = right_smooth_merger(n=128, t_end=1.0)
    report = scenario.hypotheses
    assert report.passed, report.failed()
    assert set(report.checks) == {"sign_in_Q", "symmetry", "normalization", "plateau", "morse", "upper_half_plane"}
    assert report.measured["max_abs_plus"] == pytest.approx(1.0)
    assert report.measured["maximizers"] == 1.0
    assert scenario.diagnostics.oracle


def test_smooth_merger_under_resolved():
    with pytest.raises(ResolutionError):
        smooth_merger_pair(TorusGrid(64, 12.8))


def test_wrong_amplitude_fails_normalization():
    with pytest.raises(HypothesisCheckError) as info:
        right_smooth_merger(amplitude=2.0, n=128)
    assert "normalization" in str(info.value)
    assert info.value.report.checks["normalization"] is False


def test_flat_dome_fails_morse():
    report = check_hypotheses(_smooth(kappa=0.0))
    assert report.checks["morse"] is False


def test_unknown_param_is_rejected():
    with pytest.raises(ConfigurationError) as info:
        resolve_params(_smooth(width=3.0))
    assert info.value.key == "init.params.width"


def test_left_handed_smooth_merger_is_rejected():
    scenario = _smooth().model_copy(update={"model": ModelSection(handedness=Handedness.left)})
    with pytest.raises(ConfigurationError):
        check_hypotheses(scenario)


def test_default_box_follows_scale():
    assert grid_for(_smooth(scale=0.5)).box == pytest.approx(6.4)
    assert grid_for(_smooth()).box == pytest.approx(12.8)


def test_screened_preset_is_rescaled_data():
    scenario = right_smooth_merger_screened(eps=0.25, n=128, t_end=1.0)
    tau = build_initial_pair(scenario)
    assert tau.grid.box == pytest.approx(12.8 * 0.25)
    base = smooth_merger_pair(TorusGrid(128, 12.8))
    assert np.array_equal(tau.plus.values, base.plus.values)
    assert scenario.hypotheses.measured["eps"] == 0.25
    assert scenario.diagnostics.oracle
    with pytest.raises(ConfigurationError):
        right_smooth_merger_screened(eps=1.5, n=128)


def test_patch_merger_preset():
    scenario = left_patch_merger(R=0.05, nodes=128)
    assert scenario.kind is ScenarioKind.contour
    assert scenario.time.t_end == pytest.approx(9 * math.pi / 2)
    report = scenario.hypotheses
    assert report.passed
    assert report.measured["initial_gap"] == pytest.approx(0.025, abs=2 * math.pi * 0.1 / 128)
    assert 0 < report.measured["predicted_first_touch"] < report.measured["predicted_separation"]
    state = build_initial_contours(scenario)
    assert state.plus.size == 128 and state.R == 0.05
    assert contour_mode(scenario) is ContourMode.screened_left


@pytest.mark.parametrize("d", [0.01, 0.04])
def test_patch_merger_window(d):
    with pytest.raises(ConfigurationError) as info:
        left_patch_merger(R=0.05, d=d, nodes=128)
    assert info.value.key == "init.params.d"


def test_patch_radius_above_small_scale_bound():
    with pytest.raises(ConfigurationError) as info:
        left_patch_merger(R=0.5, nodes=128)
    assert info.value.key == "init.params.R"


def test_patch_smooth_preset_starts_disjoint():
    scenario = left_patch_smooth(n=128)
    assert scenario.hypotheses.checks["disjoint_at_start"]
    tau = build_initial_pair(scenario)
    assert tau.grid.box == pytest.approx(16.0)
    assert tau.plus.max_abs == pytest.approx(1.0) and tau.minus.max_abs == pytest.approx(1.0)


def test_point_vortex_preset():
    scenario = point_vortex_preset()
    assert scenario.kind is ScenarioKind.point_vortex
    assert scenario.hypotheses.measured["predicted_merger_time"] == pytest.approx(4 * math.pi)
    assert scenario.time.t_end == pytest.approx(6 * math.pi)
    s = build_point_vortex(scenario)
    assert (s.x, s.y) == (-1.0, 1.0)


def test_sweep_builders():
    base = right_smooth_merger(n=128, t_end=0.5)
    runs = nu_sweep(base, [1e-3, 1e-4])
    assert [r.model.nu_plus for r in runs] == [1e-3, 1e-4]
    assert runs[0].name == "right_smooth_merger_nu0.001"
    screened = eps_sweep([0.5, 0.25], n=128, t_end=0.5)
    assert [s.init.params["eps"] for s in screened] == [0.5, 0.25]
