from reconnect2d.spectral.grid import ScalarField, ScalarPair, TorusGrid, VectorField, make_grid
from reconnect2d.spectral.operators import compute_velocities, dealias, op_B, op_S, op_U

__all__ = [
    "ScalarField",
    "ScalarPair",
    "TorusGrid",
    "VectorField",
    "make_grid",
    "compute_velocities",
    "dealias",
    "op_B",
    "op_S",
    "op_U",
]
