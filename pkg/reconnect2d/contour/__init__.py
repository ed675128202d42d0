from reconnect2d.contour.background import (
    BackgroundState,
    analytic_background,
    fit_ellipse,
    perturbation_norm,
    predicted_first_touch,
    rotation_rate,
)
from reconnect2d.contour.dynamics import ContourPairState, contour_velocity, step_contours
from reconnect2d.contour.geometry import OverlapResult, PatchContour, contours_overlap, reparametrize
from reconnect2d.contour.simulation import ContourRunResult, run_contours

__all__ = [
    "BackgroundState",
    "analytic_background",
    "fit_ellipse",
    "perturbation_norm",
    "predicted_first_touch",
    "rotation_rate",
    "ContourPairState",
    "contour_velocity",
    "step_contours",
    "OverlapResult",
    "PatchContour",
    "contours_overlap",
    "reparametrize",
    "ContourRunResult",
    "run_contours",
]
