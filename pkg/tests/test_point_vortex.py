import math

import pytest

from reconnect2d.core.errors import DomainError, SingularityError
from reconnect2d.point_vortex import (
    PointVortexState,
    merger_rate,
    pv_biot_savart_velocity,
    pv_configuration,
    pv_integrate,
    pv_merger_time,
    pv_rhs,
)


def test_merger_time_of_diagonal_start():
    assert merger_rate(-1.0, 1.0) == pytest.approx(-1 / (4 * math.pi))
    assert pv_merger_time(-1.0, 1.0) == pytest.approx(4 * math.pi)


@pytest.mark.parametrize("x,y", [(-1.0, 1.0), (-0.5, 2.0), (-3.0, 0.4)])
def test_closed_form_matches_biot_savart(x, y):
    s = PointVortexState(x, y)
    assert pv_biot_savart_velocity(s) == pytest.approx(pv_rhs(s), rel=1e-12)


def test_configuration_is_four_fold_symmetric():
    vortices = pv_configuration(PointVortexState(-1.0, 2.0))
    assert sum(v.strength for v in vortices) == 0.0
    assert {v.position for v in vortices} == {(-1.0, 2.0), (1.0, 2.0), (-1.0, -2.0), (1.0, -2.0)}


def test_integration_hits_predicted_merger():
    traj = pv_integrate(PointVortexState(-1.0, 1.0), dt=1e-3)
    assert traj.merger_time is not None
    assert traj.relative_error < 1e-3
    assert traj.ratio_drift < 1e-8
    slope, _, residual = traj.affine_fit()
    assert slope == pytest.approx(merger_rate(-1.0, 1.0), rel=1e-6)
    assert residual < 1e-6


def test_integration_to_fixed_time_does_not_merge():
    traj = pv_integrate(PointVortexState(-1.0, 1.0), dt=1e-2, t_end=1.0)
    assert traj.merger_time is None
    assert traj.relative_error is None
    assert traj.times[-1] == pytest.approx(1.0)
    assert traj.xs[-1] ** 2 == pytest.approx(1.0 + merger_rate(-1.0, 1.0), rel=1e-8)


@pytest.mark.parametrize("x,y", [(1.0, 1.0), (-1.0, -1.0), (0.0, 1.0)])
def test_start_outside_second_quadrant(x, y):
    with pytest.raises(DomainError):
        pv_integrate(PointVortexState(x, y), dt=1e-3)


def test_bad_step_and_singular_state():
    with pytest.raises(DomainError):
        pv_integrate(PointVortexState(-1.0, 1.0), dt=0.0)
    with pytest.raises(SingularityError):
        pv_rhs(PointVortexState(-1.0, 0.0))
