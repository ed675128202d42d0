"""Initial configurations and the hypothesis checklist each merger statement needs.

Every constructor returns a validated ``Scenario`` whose ``hypotheses`` field holds the
checklist result; a failing property raises ``HypothesisCheckError`` before any run starts.
"""
from __future__ import annotations

import math
from typing import Any, Iterable, Optional

import numpy as np
from scipy import ndimage

from reconnect2d.contour.background import analytic_background, background_overlap_window
from reconnect2d.contour.dynamics import ContourPairState
from reconnect2d.contour.geometry import contours_overlap
from reconnect2d.core.errors import ConfigurationError, HypothesisCheckError, ResolutionError
from reconnect2d.diagnostics.fields import overlap_integral, symmetry_defect
from reconnect2d.diagnostics.moments import quadrant_mask, quadrant_moments
from reconnect2d.domain.models import (
    ContourMode,
    ContourSection,
    DiagnosticsSection,
    GridSection,
    Handedness,
    HypothesisReport,
    InitSection,
    ModelSection,
    PresetId,
    Scenario,
    TimeSection,
)
from reconnect2d.observability.logging import get_logger
from reconnect2d.point_vortex import PointVortexState, pv_merger_time
from reconnect2d.solver.rescale import similarity_rescale
from reconnect2d.spectral.grid import ScalarPair, TorusGrid

log = get_logger(__name__)

SMOOTH_BOX = 12.8
SMOOTH_CENTER = 2.0
SUPPORT_AREA = 2.0
PLATEAU_EPS_MAX = 0.5
MIN_BUMP_CELLS = 12
R0_DEFAULT = 0.1
NU_SWEEP = (1e-3, 1e-4, 1e-5)
EPS_SWEEP = (1 / 4, 1 / 8, 1 / 16)

PRESET_DEFAULTS: dict[PresetId, dict[str, Any]] = {
    PresetId.right_smooth_merger: {"scale": 1.0, "amplitude": 1.0, "taper": 0.1, "kappa": 0.08},
    PresetId.right_smooth_merger_screened: {"eps": 1 / 8, "amplitude": 1.0, "taper": 0.1, "kappa": 0.08},
    PresetId.left_patch_merger: {"R": 0.05, "d": 0.025, "R0": R0_DEFAULT},
    PresetId.left_patch_smooth: {"R": 1.0, "d": 0.5, "taper": 0.15},
    PresetId.point_vortex: {"x0": -1.0, "y0": 1.0},
}


def resolve_params(scenario: Scenario) -> dict[str, Any]:
    """Preset defaults overridden by ``init.params``; unknown keys are rejected."""
    preset = scenario.init.preset
    defaults = PRESET_DEFAULTS[preset]
    unknown = set(scenario.init.params) - set(defaults)
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigurationError(f"init.params.{key}", f"unknown parameter for preset {preset.value}")
    params = {**defaults, **scenario.init.params}
    if preset is PresetId.left_patch_merger and "d" not in scenario.init.params:
        params["d"] = 0.5 * params["R"]
    return params


def default_box(preset: PresetId, params: dict[str, Any]) -> Optional[float]:
    if preset is PresetId.right_smooth_merger:
        return SMOOTH_BOX * params["scale"]
    if preset is PresetId.right_smooth_merger_screened:
        return SMOOTH_BOX * params["eps"]
    if preset is PresetId.left_patch_smooth:
        return 16.0 * params["R"]
    return None


def grid_for(scenario: Scenario) -> TorusGrid:
    if scenario.grid is None:
        raise ConfigurationError("grid", f"preset {scenario.init.preset.value} has no grid")
    box = scenario.grid.box or default_box(scenario.init.preset, resolve_params(scenario))
    return TorusGrid(scenario.grid.n, box)


# ============================================================================
# Profiles
# ============================================================================


def smooth_step(t: np.ndarray) -> np.ndarray:
    """C-infinity step: 0 for t <= 0, 1 for t >= 1."""
    t = np.clip(np.asarray(t, dtype=np.float64), 0.0, 1.0)
    with np.errstate(divide="ignore"):
        f = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
        g = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return f / (f + g)


def tapered_profile(s: np.ndarray, taper: float) -> np.ndarray:
    """1 inside s <= 1 - taper, smoothly down to 0 at s = 1."""
    return smooth_step((1.0 - s) / taper)


def _dome(grid: TorusGrid, center: tuple[float, float], radius: float, taper: float, kappa: float) -> np.ndarray:
    X, Y = grid.mesh
    s = np.hypot(X - center[0], Y - center[1]) / radius
    return (1.0 - kappa * s * s) * tapered_profile(s, taper)


def _snap(grid: TorusGrid, x: float) -> float:
    return -0.5 * grid.box + grid.node_index(x) * grid.spacing


# ============================================================================
# Right-handed smooth merger
# ============================================================================


def _smooth_params(grid: TorusGrid, scale: float) -> tuple[tuple[float, float], float]:
    c = _snap(grid, SMOOTH_CENTER * scale)
    return (c, c), math.sqrt(SUPPORT_AREA / math.pi) * scale


def smooth_merger_pair(grid: TorusGrid, scale: float = 1.0, amplitude: float = 1.0, taper: float = 0.1, kappa: float = 0.08) -> ScalarPair:
    """sigma+ = -bump at (2, 2) plus its odd mirror; sigma- is the x1-axis reflection."""
    if not 0 < taper <= 1:
        raise ConfigurationError("init.params.taper", "must satisfy 0 < taper <= 1")
    if not 0 <= kappa < 0.5:
        raise ConfigurationError("init.params.kappa", "must satisfy 0 <= kappa < 0.5")
    center, radius = _smooth_params(grid, scale)
    if 2.0 * radius / grid.spacing < MIN_BUMP_CELLS:
        raise ResolutionError("grid.n", f"support spans {2.0 * radius / grid.spacing:.1f} cells (< {MIN_BUMP_CELLS})")
    bump = amplitude * _dome(grid, center, radius, taper, kappa)
    plus = -bump + grid.reflect_x1(bump)
    return ScalarPair.from_arrays(grid, plus, grid.reflect_x2(plus))


def _morse_check(values: np.ndarray, mask: np.ndarray, h: float) -> tuple[bool, int]:
    depth = np.where(mask, -values, -np.inf)
    peak = depth.max()
    maximizers = int(np.count_nonzero(depth >= peak - 1e-12 * max(abs(peak), 1.0)))
    j, i = np.unravel_index(np.argmax(depth), depth.shape)
    f = -values
    fxx = (f[j, i + 1] - 2 * f[j, i] + f[j, i - 1]) / h**2
    fyy = (f[j + 1, i] - 2 * f[j, i] + f[j - 1, i]) / h**2
    fxy = (f[j + 1, i + 1] - f[j + 1, i - 1] - f[j - 1, i + 1] + f[j - 1, i - 1]) / (4 * h**2)
    definite = fxx < 0 and fyy < 0 and fxx * fyy - fxy * fxy > 0
    return maximizers == 1 and definite, maximizers


def smooth_merger_report(tau: ScalarPair, name: str, scale: float = 1.0) -> HypothesisReport:
    """Sign, symmetry, normalization, plateau and Morse properties of smooth merger data."""
    grid = tau.grid
    plus = tau.plus.values
    peak = tau.plus.max_abs
    theta = 1e-6 * max(peak, 1e-300)
    X, Y = grid.mesh
    q = quadrant_mask(grid)
    h2 = grid.cell_area

    support_q = q & (np.abs(plus) > theta)
    _, pieces = ndimage.label(support_q & (plus < 0))
    sign_ok = bool(np.all(plus[q] <= theta)) and bool(np.all(tau.minus.values[q] <= theta)) and pieces == 1

    defect = symmetry_defect(tau)
    area_q = float(np.count_nonzero(support_q)) * h2
    target_area = SUPPORT_AREA * scale**2
    area_tol = max(0.05, grid.spacing / (math.sqrt(SUPPORT_AREA / math.pi) * scale))
    E1, E2 = quadrant_moments(tau.plus)
    moment_floor = 0.5 * scale**3

    # support in Q outside D0 = {sigma+ <= -1/2}
    eps_plateau = float(np.count_nonzero(support_q & (plus > -0.5))) * h2
    morse_ok, maximizers = _morse_check(plus, q, grid.spacing)
    upper = bool(np.all(np.abs(plus[Y <= 0]) <= theta))

    return HypothesisReport(
        scenario=name,
        checks={
            "sign_in_Q": sign_ok,
            "symmetry": defect <= 1e-14 * max(peak, 1.0),
            "normalization": abs(peak - 1.0) <= 1e-12
            and abs(area_q - target_area) <= area_tol * target_area
            and min(abs(E1), abs(E2)) > moment_floor,
            "plateau": 0.0 < eps_plateau < PLATEAU_EPS_MAX * scale**2,
            "morse": morse_ok,
            "upper_half_plane": upper,
        },
        measured={
            "max_abs_plus": peak,
            "support_area_Q": area_q,
            "E1": E1,
            "E2": E2,
            "plateau_eps": eps_plateau,
            "maximizers": float(maximizers),
            "symmetry_defect": defect,
        },
        notes={"morse": "unique grid maximizer with negative-definite discrete Hessian"},
    )


def right_smooth_merger(
    scale: float = 1.0,
    amplitude: float = 1.0,
    taper: float = 0.1,
    kappa: float = 0.08,
    *,
    n: int = 256,
    t_end: float = 40.0,
    screened: bool = False,
    nu: float = 0.0,
    oracle: bool = True,
) -> Scenario:
    scenario = Scenario(
        name="right_smooth_merger",
        model=ModelSection(handedness=Handedness.right, screened=screened, nu_plus=nu, nu_minus=nu),
        grid=GridSection(n=n),
        time=TimeSection(t_end=t_end),
        init=InitSection(
            preset=PresetId.right_smooth_merger,
            params={"scale": scale, "amplitude": amplitude, "taper": taper, "kappa": kappa},
        ),
        diagnostics=DiagnosticsSection(oracle=oracle),
    )
    return require_hypotheses(scenario)


def right_smooth_merger_screened(
    eps: float = 1 / 8,
    amplitude: float = 1.0,
    taper: float = 0.1,
    kappa: float = 0.08,
    *,
    n: int = 256,
    t_end: float = 40.0,
    nu: float = 0.0,
    tracers: int = 0,
) -> Scenario:
    """The smooth merger data at length scale eps, screened right-handed law."""
    if not 0 < eps <= 1:
        raise ConfigurationError("init.params.eps", f"must satisfy 0 < eps <= 1, got {eps}")
    scenario = Scenario(
        name=f"right_smooth_merger_screened_eps{eps:g}",
        model=ModelSection(handedness=Handedness.right, screened=True, nu_plus=nu, nu_minus=nu),
        grid=GridSection(n=n),
        time=TimeSection(t_end=t_end),
        init=InitSection(
            preset=PresetId.right_smooth_merger_screened,
            params={"eps": eps, "amplitude": amplitude, "taper": taper, "kappa": kappa},
        ),
        diagnostics=DiagnosticsSection(tracers=tracers, reference=tracers > 0, oracle=True),
    )
    return require_hypotheses(scenario)


# ============================================================================
# Left-handed patches
# ============================================================================


def _check_patch_window(R: float, d: float, R0: Optional[float] = None) -> None:
    if not R > 0:
        raise ConfigurationError("init.params.R", "must be > 0")
    if R0 is not None and R > R0:
        raise ConfigurationError("init.params.R", f"must be <= R0 = {R0}")
    if not (R / 4 < d < 3 * R / 4):
        raise ConfigurationError("init.params.d", f"must lie in (R/4, 3R/4) = ({R / 4:g}, {3 * R / 4:g})")


def patch_contours(R: float, d: float, nodes: int, threads: int = 1) -> ContourPairState:
    bg = analytic_background(0.0, R, d, nodes)
    return ContourPairState(plus=bg.plus, minus=bg.minus, time=0.0, R=R, d=d, threads=threads)


def _min_gap(state: ContourPairState) -> float:
    diff = state.plus.nodes[:, None, :] - state.minus.nodes[None, :, :]
    return float(np.sqrt((diff**2).sum(axis=-1)).min())


def patch_merger_report(state: ContourPairState, name: str, predict: bool = True) -> HypothesisReport:
    gap = _min_gap(state)
    spacing = 2.0 * math.pi * 2.0 * state.R / state.plus.size
    disjoint = not contours_overlap(state.plus, state.minus).overlapping
    measured = {"initial_gap": gap, "d": state.d, "R": state.R}
    if predict:
        start, end = background_overlap_window(state.R, state.d)
        measured["predicted_first_touch"] = start if start is not None else math.nan
        measured["predicted_separation"] = end if end is not None else math.nan
    return HypothesisReport(
        scenario=name,
        checks={
            "parameter_window": state.R / 4 < state.d < 3 * state.R / 4,
            "disjoint_at_start": disjoint,
            "initial_gap": abs(gap - state.d) <= spacing,
        },
        measured=measured,
    )


def left_patch_merger(
    R: float = 0.05,
    d: Optional[float] = None,
    nodes: int = 512,
    *,
    screened: bool = True,
    t_end: Optional[float] = None,
    R0: float = R0_DEFAULT,
) -> Scenario:
    """Ellipse (semi-axes R, 2R) centred at (d + 2R, 0) next to the disk of radius R at the origin."""
    d = 0.5 * R if d is None else d
    _check_patch_window(R, d, R0)
    scenario = Scenario(
        name="left_patch_merger",
        model=ModelSection(handedness=Handedness.left, screened=screened),
        contour=ContourSection(nodes=nodes),
        time=TimeSection(t_end=9.0 * math.pi / 2.0 if t_end is None else t_end, output_every=0.1),
        init=InitSection(preset=PresetId.left_patch_merger, params={"R": R, "d": d, "R0": R0}),
    )
    return require_hypotheses(scenario)


def smooth_patch_pair(grid: TorusGrid, R: float, d: float, taper: float = 0.15) -> ScalarPair:
    """Mollified indicators of the patch-merger ellipse (plus) and disk (minus)."""
    X, Y = grid.mesh
    s_ellipse = np.hypot((X - (d + 2.0 * R)) / R, Y / (2.0 * R))
    s_disk = np.hypot(X, Y) / R
    return ScalarPair.from_arrays(grid, tapered_profile(s_ellipse, taper), tapered_profile(s_disk, taper))


def left_patch_smooth(
    R: float = 1.0,
    d: float = 0.5,
    taper: float = 0.15,
    *,
    n: int = 256,
    screened: bool = False,
    t_end: float = 9.0 * math.pi / 2.0,
) -> Scenario:
    _check_patch_window(R, d)
    scenario = Scenario(
        name="left_patch_smooth",
        model=ModelSection(handedness=Handedness.left, screened=screened),
        grid=GridSection(n=n),
        time=TimeSection(t_end=t_end),
        init=InitSection(preset=PresetId.left_patch_smooth, params={"R": R, "d": d, "taper": taper}),
    )
    return require_hypotheses(scenario)


# ============================================================================
# Point vortices and sweeps
# ============================================================================


def point_vortex_preset(x0: float = -1.0, y0: float = 1.0, dt: float = 1e-3) -> Scenario:
    t_star = pv_merger_time(x0, y0)
    scenario = Scenario(
        name="point_vortex",
        model=ModelSection(handedness=Handedness.right, screened=False),
        time=TimeSection(dt=dt, t_end=1.5 * t_star),
        init=InitSection(preset=PresetId.point_vortex, params={"x0": x0, "y0": y0}),
    )
    return require_hypotheses(scenario)


def nu_sweep(base: Optional[Scenario] = None, values: Iterable[float] = NU_SWEEP) -> list[Scenario]:
    """Copies of ``base`` (default: the smooth merger) with nu+ = nu- = value."""
    base = base or right_smooth_merger(t_end=1.0)
    out = []
    for nu in values:
        model = base.model.model_copy(update={"nu_plus": float(nu), "nu_minus": float(nu)})
        out.append(base.model_copy(update={"model": model, "name": f"{base.label}_nu{nu:g}"}))
    return out


def eps_sweep(values: Iterable[float] = EPS_SWEEP, **kwargs: Any) -> list[Scenario]:
    return [right_smooth_merger_screened(eps, **kwargs) for eps in values]


# ============================================================================
# Building initial data from any scenario
# ============================================================================


def build_initial_pair(scenario: Scenario) -> ScalarPair:
    preset = scenario.init.preset
    params = resolve_params(scenario)
    grid = grid_for(scenario)
    keys = ("amplitude", "taper", "kappa")
    if preset is PresetId.right_smooth_merger:
        return smooth_merger_pair(grid, params["scale"], **{k: params[k] for k in keys})
    if preset is PresetId.right_smooth_merger_screened:
        base = smooth_merger_pair(grid.scaled(1.0 / params["eps"]), 1.0, **{k: params[k] for k in keys})
        return similarity_rescale(base, params["eps"]).on_grid(grid)
    if preset is PresetId.left_patch_smooth:
        _check_patch_window(params["R"], params["d"])
        return smooth_patch_pair(grid, params["R"], params["d"], params["taper"])
    raise ConfigurationError("init.preset", f"{preset.value} has no grid data")


def build_initial_contours(scenario: Scenario, threads: int = 1) -> ContourPairState:
    if scenario.init.preset is not PresetId.left_patch_merger:
        raise ConfigurationError("init.preset", f"{scenario.init.preset.value} has no contour data")
    params = resolve_params(scenario)
    _check_patch_window(params["R"], params["d"], params["R0"])
    return patch_contours(params["R"], params["d"], scenario.contour.nodes, threads)


def build_point_vortex(scenario: Scenario) -> PointVortexState:
    params = resolve_params(scenario)
    return PointVortexState(float(params["x0"]), float(params["y0"]))


def contour_mode(scenario: Scenario) -> ContourMode:
    if scenario.variant.handedness is not Handedness.left:
        raise ConfigurationError("model.handedness", "patch contour dynamics is implemented for the left-handed system")
    return ContourMode.screened_left if scenario.model.screened else ContourMode.unscreened_euler


def check_hypotheses(scenario: Scenario) -> HypothesisReport:
    preset = scenario.init.preset
    params = resolve_params(scenario)
    name = scenario.label
    if preset is PresetId.right_smooth_merger:
        if scenario.variant.handedness is not Handedness.right:
            raise ConfigurationError("model.handedness", "smooth merger data are for the right-handed system")
        return smooth_merger_report(build_initial_pair(scenario), name, params["scale"])
    if preset is PresetId.right_smooth_merger_screened:
        base_grid = grid_for(scenario).scaled(1.0 / params["eps"])
        keys = ("amplitude", "taper", "kappa")
        base = smooth_merger_pair(base_grid, 1.0, **{k: params[k] for k in keys})
        report = smooth_merger_report(base, name)
        build_initial_pair(scenario)
        report.measured["eps"] = params["eps"]
        return report
    if preset is PresetId.left_patch_merger:
        contour_mode(scenario)
        return patch_merger_report(build_initial_contours(scenario), name)
    if preset is PresetId.left_patch_smooth:
        tau = build_initial_pair(scenario)
        gap = overlap_integral(tau)
        return HypothesisReport(
            scenario=name,
            checks={"disjoint_at_start": gap == 0.0},
            measured={"overlap": gap, "R": params["R"], "d": params["d"]},
        )
    state = build_point_vortex(scenario)
    t_star = pv_merger_time(state.x, state.y)
    return HypothesisReport(
        scenario=name,
        checks={"second_quadrant": state.x < 0 < state.y},
        measured={"x0": state.x, "y0": state.y, "predicted_merger_time": t_star},
    )


def require_hypotheses(scenario: Scenario) -> Scenario:
    """Attach the checklist to the scenario; raise when any property fails."""
    report = check_hypotheses(scenario)
    if not report.passed:
        failed = report.failed()
        log.warning("hypothesis_failed", scenario=scenario.label, failed=failed)
        raise HypothesisCheckError(", ".join(failed), report)
    return scenario.model_copy(update={"hypotheses": report})
