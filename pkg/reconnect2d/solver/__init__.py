from reconnect2d.solver.eulerian import SolverState, rhs, stable_dt, step_rk4, velocities
from reconnect2d.solver.rescale import scale_initial_data, similarity_rescale
from reconnect2d.solver.tracers import TracerSet, advect_tracers

__all__ = [
    "SolverState",
    "rhs",
    "stable_dt",
    "step_rk4",
    "velocities",
    "scale_initial_data",
    "similarity_rescale",
    "TracerSet",
    "advect_tracers",
]
