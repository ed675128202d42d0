from reconnect2d.diagnostics.fields import lp_distance, lp_norm, overlap_integral, symmetry_defect
from reconnect2d.diagnostics.moments import moment_rhs_oracle, quadrant_moments
from reconnect2d.diagnostics.records import measure, moment_derivatives, norm_drifts
from reconnect2d.diagnostics.topology import TrichotomyReport, support_components, trichotomy_report

__all__ = [
    "lp_distance",
    "lp_norm",
    "overlap_integral",
    "symmetry_defect",
    "moment_rhs_oracle",
    "quadrant_moments",
    "measure",
    "moment_derivatives",
    "norm_drifts",
    "TrichotomyReport",
    "support_components",
    "trichotomy_report",
]
