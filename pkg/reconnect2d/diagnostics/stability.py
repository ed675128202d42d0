"""Scaling experiments: screened/unscreened gap in eps, Lagrangian deviation, inviscid-limit order."""
from __future__ import annotations

import math
from typing import Iterable, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field

from reconnect2d.core.errors import ConfigurationError
from reconnect2d.domain.models import RIGHT_SCREENED, RIGHT_UNSCREENED, ModelVariant
from reconnect2d.observability.logging import get_logger
from reconnect2d.solver.eulerian import CFL, SolverState
from reconnect2d.solver.rescale import similarity_rescale
from reconnect2d.solver.simulation import integrate
from reconnect2d.spectral.grid import ScalarPair

log = get_logger(__name__)


def fit_order(x: Sequence[float], y: Sequence[float]) -> float:
    """Slope of log y against log x; NaN when any y vanishes."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if len(x) < 2 or len(x) != len(y):
        raise ConfigurationError("values", "need at least two paired samples")
    if np.any(y <= 0):
        return math.nan
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


class StabilityResult(BaseModel):
    p: float
    T: float
    eps: list[float]
    gaps: list[float]
    overlap_gaps: list[float] = Field(default_factory=list)
    slope: float
    predicted_slope: float

    @property
    def passes(self) -> bool:
        return self.slope >= self.predicted_slope - 0.3


class LagrangianResult(BaseModel):
    eps: list[float]
    deviations: list[float]
    ratios: list[float]


class InviscidResult(BaseModel):
    T: float
    nu: list[float]
    l2_gaps: list[float]
    l1_gaps: list[float]
    l2_order: float
    l1_order: float
    gap_histories: dict[str, list[float]] = Field(default_factory=dict)


def check_eps_values(eps: Sequence[float]) -> list[float]:
    eps = sorted((float(e) for e in eps), reverse=True)
    if len(eps) < 3:
        raise ConfigurationError("eps", "need at least three values")
    if any(not 0 < e <= 1 for e in eps):
        raise ConfigurationError("eps", "values must lie in (0, 1]")
    if any(abs(a / b - 2.0) > 1e-9 for a, b in zip(eps, eps[1:])):
        raise ConfigurationError("eps", "values must halve successively")
    return eps


def _pair_run(tau: ScalarPair, variants: tuple[ModelVariant, ModelVariant], T: float, *, p: float = 2.0,
              tracers: int = 0, cfl: float = CFL, max_halvings: int = 12):
    main = SolverState(tau, variants[0])
    companion = SolverState(tau, variants[1])
    return integrate(
        main,
        T,
        cadence=T / 10 if T > 0 else None,
        cfl=cfl,
        max_halvings=max_halvings,
        reference=companion,
        tracer_count=tracers,
        gap_p=p,
    )


class EpsPoint(BaseModel):
    eps: float
    gap: float
    overlap_gap: float


class NuPoint(BaseModel):
    nu: float
    l2: float
    l1: float
    history: list[float] = Field(default_factory=list)


def eps_point(
    base: ScalarPair,
    eps: float,
    p: float = 1.5,
    T: float = 1.0,
    *,
    variants: tuple[ModelVariant, ModelVariant] = (RIGHT_SCREENED, RIGHT_UNSCREENED),
    cfl: float = CFL,
    max_halvings: int = 12,
) -> EpsPoint:
    tau = similarity_rescale(base, eps)
    run = _pair_run(tau, variants, T, p=p, cfl=cfl, max_halvings=max_halvings)
    a, b = run.state.sigma, run.reference.sigma
    overlap_gap = abs(tau.grid.cell_area * float(np.sum(a.plus.values * a.minus.values - b.plus.values * b.minus.values)))
    log.info("sweep_point_done", param="eps", value=eps, gap=run.companion_gaps[-1]["lp"])
    return EpsPoint(eps=eps, gap=run.companion_gaps[-1]["lp"], overlap_gap=overlap_gap)


def stability_gap(
    base: ScalarPair,
    eps_values: Iterable[float],
    p: float = 1.5,
    T: float = 1.0,
    *,
    variants: tuple[ModelVariant, ModelVariant] = (RIGHT_SCREENED, RIGHT_UNSCREENED),
    cfl: float = CFL,
    max_halvings: int = 12,
) -> StabilityResult:
    """||sigma_screened - sigma_unscreened||_p at time T for data tau(x/eps), and its log-log slope.

    ``base`` is the eps = 1 data; each eps run uses the same node values on a box eps times
    smaller, so every run is equally resolved.
    """
    if not 1 < p < 2:
        raise ConfigurationError("p", f"must satisfy 1 < p < 2, got {p}")
    eps = check_eps_values(eps_values)
    points = [eps_point(base, e, p, T, variants=variants, cfl=cfl, max_halvings=max_halvings) for e in eps]
    gaps = [pt.gap for pt in points]
    return StabilityResult(
        p=p,
        T=T,
        eps=eps,
        gaps=gaps,
        overlap_gaps=[pt.overlap_gap for pt in points],
        slope=fit_order(eps, gaps),
        predicted_slope=2.0 / p + 1.0,
    )


def lagrangian_deviation(tau: ScalarPair, T: float, tracers: int = 32, *, cfl: float = CFL) -> float:
    """sup over markers and output times of |X(t) - Y(t)|, screened X against unscreened Y."""
    if tracers <= 0:
        raise ConfigurationError("diagnostics.tracers", "must be > 0")
    run = _pair_run(tau, (RIGHT_SCREENED, RIGHT_UNSCREENED), T, tracers=tracers, cfl=cfl)
    return run.max_tracer_deviation or 0.0


def lagrangian_sweep(base: ScalarPair, eps_values: Iterable[float], T: float = 1.0, tracers: int = 32) -> LagrangianResult:
    eps = check_eps_values(eps_values)
    devs = [lagrangian_deviation(similarity_rescale(base, e), T, tracers) for e in eps]
    ratios = [a / b if b > 0 else math.inf for a, b in zip(devs, devs[1:])]
    return LagrangianResult(eps=eps, deviations=devs, ratios=ratios)


def nu_point(
    tau: ScalarPair,
    variant: ModelVariant,
    nu: float,
    T: float = 1.0,
    *,
    cfl: float = CFL,
    max_halvings: int = 12,
    nu_ratio: Optional[float] = None,
) -> NuPoint:
    """Gap at time T between the run with nu+ = nu (nu- = nu_ratio * nu) and the ideal run."""
    if nu < 0:
        raise ConfigurationError("model.nu_plus", "must be >= 0")
    viscous = SolverState(tau, variant, nu_plus=nu, nu_minus=nu * (1.0 if nu_ratio is None else nu_ratio))
    ideal = SolverState(tau, variant)
    run = integrate(viscous, T, cadence=T / 10 if T > 0 else None, cfl=cfl, max_halvings=max_halvings, reference=ideal)
    last = run.companion_gaps[-1]
    log.info("sweep_point_done", param="nu", value=nu, l2=last["l2"])
    return NuPoint(nu=nu, l2=last["l2"], l1=last["l1"], history=[g["l2"] for g in run.companion_gaps])


def inviscid_order(
    tau: ScalarPair,
    variant: ModelVariant,
    nu_values: Iterable[float],
    T: float = 1.0,
    *,
    cfl: float = CFL,
    max_halvings: int = 12,
    nu_ratio: Optional[float] = None,
) -> InviscidResult:
    """Fitted order in nu of the gap to the ideal solution, in discrete L2 and L1.

    ``nu_ratio`` sets nu- = nu_ratio * nu+; the default uses nu- = nu+.
    """
    nus = sorted((float(v) for v in nu_values), reverse=True)
    if len(nus) < 3:
        raise ConfigurationError("nu", "need at least three values")
    points = [nu_point(tau, variant, nu, T, cfl=cfl, max_halvings=max_halvings, nu_ratio=nu_ratio) for nu in nus]
    l2 = [pt.l2 for pt in points]
    l1 = [pt.l1 for pt in points]
    return InviscidResult(
        T=T,
        nu=nus,
        l2_gaps=l2,
        l1_gaps=l1,
        l2_order=fit_order(nus, l2),
        l1_order=fit_order(nus, l1),
        gap_histories={f"{pt.nu:g}": pt.history for pt in points},
    )
