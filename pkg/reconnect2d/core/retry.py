"""CFL step control: retry a step with a halved dt while it reports a step-size violation."""
from __future__ import annotations

from typing import Callable, TypeVar

from tenacity import Retrying, retry_if_exception_type, stop_after_attempt

from reconnect2d.core.errors import StepSizeError
from reconnect2d.observability import metrics
from reconnect2d.observability.logging import get_logger

T = TypeVar("T")
log = get_logger("retry")


def step_with_halving(
    step: Callable[[float], T],
    dt: float,
    *,
    max_halvings: int = 12,
    solver: str = "eulerian",
) -> tuple[T, float]:
    """
    Run ``step(dt)``, halving dt after every StepSizeError.

    Args:
        step: Callable advancing the state by the given dt
        dt: First dt to try
        max_halvings: Number of halvings before giving up
        solver: Label used for logs and metrics

    Returns:
        The step result and the dt that was accepted

    Raises:
        StepSizeError: If the step still fails after ``max_halvings`` halvings
    """
    retrying = Retrying(
        stop=stop_after_attempt(max_halvings + 1),
        retry=retry_if_exception_type(StepSizeError),
        reraise=True,
    )

    for attempt_state in retrying:
        with attempt_state:
            attempt = attempt_state.retry_state.attempt_number
            dt_try = dt / 2 ** (attempt - 1)
            if attempt > 1:
                metrics.dt_halvings.labels(solver=solver).inc()
                log.info("dt_halved", solver=solver, attempt=attempt, dt=dt_try)
            result = step(dt_try)
            return result, dt_try

    raise AssertionError("unreachable")  # pragma: no cover
