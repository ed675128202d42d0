import math

import numpy as np
import pytest

from reconnect2d.core.errors import ConfigurationError, NumericAbort, StepSizeError
from reconnect2d.core.retry import step_with_halving
from reconnect2d.diagnostics.fields import lp_norm, symmetry_defect
from reconnect2d.domain.models import LEFT_UNSCREENED, RIGHT_SCREENED, RIGHT_UNSCREENED
from reconnect2d.scenarios.presets import smooth_merger_pair
from reconnect2d.solver import simulation
from reconnect2d.solver.eulerian import SolverState, rhs, stable_dt, step_rk4
from reconnect2d.solver.simulation import advance_to, integrate
from reconnect2d.spectral.grid import ScalarField, ScalarPair, TorusGrid


def _eigenmode_state(grid):
    X, Y = grid.mesh
    sigma = ScalarPair.from_arrays(grid, np.cos(X) + np.cos(Y), np.zeros_like(X))
    return SolverState(sigma, LEFT_UNSCREENED)


def test_zero_field_is_unchanged(grid32):
    zero = ScalarPair(ScalarField.zeros(grid32), ScalarField.zeros(grid32))
    state = SolverState(zero, RIGHT_SCREENED)
    assert stable_dt(state) == math.inf
    out = step_rk4(state, 0.3)
    assert np.all(out.sigma.plus.values == 0) and np.all(out.sigma.minus.values == 0)
    assert out.time == pytest.approx(0.3)
    assert out.step_count == 1


def test_rhs_vanishes_for_steady_eigenmode(grid32):
    tend = rhs(_eigenmode_state(grid32))
    assert tend.plus.max_abs < 1e-12
    assert tend.minus.max_abs == 0.0


def test_eigenmode_stays_steady_over_many_steps(grid32):
    state = _eigenmode_state(grid32)
    initial = state.sigma.plus.values.copy()
    dt = 0.9 * stable_dt(state)
    for _ in range(100):
        state = step_rk4(state, dt)
    assert np.max(np.abs(state.sigma.plus.values - initial)) < 1e-10 * np.max(np.abs(initial))


def test_tendency_integrates_to_zero(random_pair):
    for variant in (RIGHT_SCREENED, RIGHT_UNSCREENED, LEFT_UNSCREENED):
        tend = rhs(SolverState(random_pair, variant))
        assert abs(tend.plus.values.sum()) < 1e-10 * tend.plus.max_abs * tend.grid.n**2
        assert abs(tend.minus.values.sum()) < 1e-10 * tend.minus.max_abs * tend.grid.n**2


def test_pure_diffusion_matches_heat_kernel(grid32):
    X, _ = grid32.mesh
    sigma = ScalarPair.from_arrays(grid32, np.sin(2 * X), np.sin(X))
    state = SolverState(sigma, RIGHT_SCREENED, nu_plus=0.01, nu_minus=0.02, advection=False)
    for _ in range(10):
        state = step_rk4(state, 0.1)
    assert np.allclose(state.sigma.plus.values, math.exp(-0.01 * 4 * 1.0) * np.sin(2 * X), rtol=0, atol=1e-12)
    assert np.allclose(state.sigma.minus.values, math.exp(-0.02 * 1.0) * np.sin(X), rtol=0, atol=1e-12)


def test_resistive_l2_norm_does_not_grow(random_pair):
    state = SolverState(random_pair, RIGHT_SCREENED, nu_plus=1e-2, nu_minus=1e-2)
    norms = [lp_norm(state.sigma.plus, 2.0)]
    for _ in range(10):
        state = step_rk4(state, 0.5 * stable_dt(state))
        norms.append(lp_norm(state.sigma.plus, 2.0))
    assert all(b <= a * (1 + 1e-12) for a, b in zip(norms, norms[1:]))


def test_step_above_cfl_is_rejected(random_pair):
    state = SolverState(random_pair, RIGHT_UNSCREENED)
    with pytest.raises(StepSizeError) as info:
        step_rk4(state, 4.0 * stable_dt(state))
    assert info.value.dt_max == pytest.approx(stable_dt(state))


def test_halving_recovers_from_cfl_violation(random_pair):
    state = SolverState(random_pair, RIGHT_UNSCREENED)
    dt = 3.0 * stable_dt(state)
    new, used = step_with_halving(lambda h: step_rk4(state, h), dt, max_halvings=4)
    assert used == pytest.approx(dt / 4)
    assert new.time == pytest.approx(used)


def test_halving_gives_up_after_budget(random_pair):
    state = SolverState(random_pair, RIGHT_UNSCREENED)
    with pytest.raises(StepSizeError):
        step_with_halving(lambda h: step_rk4(state, h), 100.0 * stable_dt(state), max_halvings=2)


def test_invalid_parameters(random_pair):
    with pytest.raises(ConfigurationError):
        SolverState(random_pair, RIGHT_SCREENED, nu_plus=-1.0)
    with pytest.raises(ConfigurationError):
        step_rk4(SolverState(random_pair, RIGHT_SCREENED), 0.0)


def test_rk4_is_fourth_order(random_pair):
    state = SolverState(random_pair, RIGHT_UNSCREENED)
    T = 0.4
    base = 0.5 * stable_dt(state)
    n_steps = math.ceil(T / base)

    def run(steps):
        s = state
        for _ in range(steps):
            s = step_rk4(s, T / steps, cfl=10.0)
        return s.sigma.plus.values

    ref = run(8 * n_steps)
    e1 = np.max(np.abs(run(n_steps) - ref))
    e2 = np.max(np.abs(run(2 * n_steps) - ref))
    assert 10.0 < e1 / e2 < 22.0


def test_symmetry_is_preserved_exactly():
    grid = TorusGrid(128, 12.8)
    sigma = smooth_merger_pair(grid)
    for variant in (RIGHT_UNSCREENED, RIGHT_SCREENED):
        state = SolverState(sigma, variant)
        for _ in range(10):
            state = step_rk4(state, 0.5 * stable_dt(state))
        assert symmetry_defect(state.sigma) < 1e-8 * state.sigma.max_abs


def test_integrate_with_zero_end_records_initial_only(random_pair):
    result = integrate(SolverState(random_pair, RIGHT_SCREENED), 0.0)
    assert len(result.records) == 1
    assert result.records[0].t == 0.0
    assert result.steps == 0


def test_integrate_output_cadence_and_conservation(random_pair):
    seen = []
    result = integrate(
        SolverState(random_pair, RIGHT_SCREENED),
        0.5,
        cadence=0.1,
        on_output=lambda s, rec: seen.append(rec.t),
    )
    assert seen == pytest.approx([0.0, 0.1, 0.2, 0.3, 0.4, 0.5])
    first, last = result.records[0], result.records[-1]
    assert abs(last.l2_plus - first.l2_plus) / first.l2_plus < 1e-3
    assert result.state.time == pytest.approx(0.5)


def test_integrate_with_reference_tracks_gaps(random_pair):
    main = SolverState(random_pair, RIGHT_SCREENED)
    companion = SolverState(random_pair, RIGHT_UNSCREENED)
    result = integrate(main, 0.2, cadence=0.1, reference=companion, tracer_count=8)
    assert [g["t"] for g in result.companion_gaps] == pytest.approx([0.0, 0.1, 0.2])
    assert result.companion_gaps[0]["l2"] == 0.0
    assert result.companion_gaps[-1]["l2"] > 0.0
    assert result.reference.time == pytest.approx(result.state.time)
    assert result.max_tracer_deviation is not None and result.max_tracer_deviation > 0.0


def test_numeric_abort_dumps_last_good_state(random_pair, monkeypatch):
    def explode(state, dt, *, cfl=0.5):
        raise NumericAbort("boom", last_good_time=state.time)

    monkeypatch.setattr(simulation, "step_rk4", explode)
    dumped = []

    def on_abort(state):
        dumped.append(state.time)
        return "/tmp/abort"

    with pytest.raises(NumericAbort) as info:
        integrate(SolverState(random_pair, RIGHT_SCREENED), 1.0, on_abort=on_abort)
    assert dumped == [0.0]
    assert info.value.dump_path == "/tmp/abort"
    assert info.value.last_good_time == 0.0


def test_advance_to_reaches_target(random_pair):
    state = advance_to(SolverState(random_pair, LEFT_UNSCREENED), 0.25)
    assert state.time == pytest.approx(0.25)
