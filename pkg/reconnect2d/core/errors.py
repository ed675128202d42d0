"""Exception hierarchy. Every error that can reach the command line carries its exit code."""
from __future__ import annotations

from typing import Any


class Reconnect2DError(Exception):
    """Base class for all reconnect2d failures."""

    exit_code: int = 1


class ConfigurationError(Reconnect2DError, ValueError):
    """Invalid scenario, grid or parameter value.

    Args:
        key: Dotted key path of the offending value (``model.handedness``).
        reason: Human-readable constraint that was violated.
    """

    exit_code = 2

    def __init__(self, key: str, reason: str):
        self.key = key
        self.reason = reason
        super().__init__(f"{key}: {reason}")


class ResolutionError(ConfigurationError):
    """Requested data would be under-resolved on the grid."""


class NumericAbort(Reconnect2DError):
    """Non-finite values appeared in the state; the last good state was dumped."""

    exit_code = 3

    def __init__(self, message: str, last_good_time: float, dump_path: str | None = None):
        self.last_good_time = last_good_time
        self.dump_path = dump_path
        super().__init__(message)


class StepSizeError(Reconnect2DError):
    """The requested step violates the CFL restriction."""

    exit_code = 3

    def __init__(self, dt: float, dt_max: float):
        self.dt = dt
        self.dt_max = dt_max
        super().__init__(f"dt={dt:.3e} exceeds CFL bound {dt_max:.3e}")


class GeometryError(Reconnect2DError):
    """Degenerate or self-intersecting contour."""

    exit_code = 3


class DomainError(Reconnect2DError, ValueError):
    """Argument outside the domain of a kernel or closed form."""

    exit_code = 3


class SingularityError(DomainError):
    """Point-vortex state reached the singular set y = 0."""


class HypothesisCheckError(Reconnect2DError):
    """A scenario failed one of the properties its merger statement requires."""

    exit_code = 4

    def __init__(self, prop: str, report: Any = None):
        self.prop = prop
        self.report = report
        super().__init__(f"hypothesis check failed: {prop}")
