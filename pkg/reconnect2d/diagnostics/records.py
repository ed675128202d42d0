from __future__ import annotations

import math

from reconnect2d.diagnostics.fields import lp_norm, overlap_integral, symmetry_defect
from reconnect2d.diagnostics.moments import moment_rhs_oracle, quadrant_moments
from reconnect2d.diagnostics.topology import relative_components
from reconnect2d.domain.models import DiagnosticsRecord, ModelVariant
from reconnect2d.spectral.grid import ScalarPair

NORMS = {"l1": 1.0, "l2": 2.0, "linf": math.inf}


def measure(
    sigma: ScalarPair,
    *,
    support_threshold: float = 1e-6,
    oracle_variant: ModelVariant | None = None,
    tracer_deviation: float | None = None,
) -> DiagnosticsRecord:
    values: dict = {"t": sigma.time}
    for species, f in (("plus", sigma.plus), ("minus", sigma.minus)):
        for name, p in NORMS.items():
            values[f"{name}_{species}"] = lp_norm(f, p)
    values["E1"], values["E2"] = quadrant_moments(sigma.plus)
    values["overlap"] = overlap_integral(sigma)
    values["components_F"] = relative_components(sigma.F, support_threshold)
    values["symmetry_defect"] = symmetry_defect(sigma)
    if oracle_variant is not None:
        values["oracle_E1"], values["oracle_E2"] = moment_rhs_oracle(sigma, oracle_variant)
    values["tracer_deviation"] = tracer_deviation
    return DiagnosticsRecord(**values)


def norm_drifts(first: DiagnosticsRecord, last: DiagnosticsRecord) -> dict[str, float]:
    """Relative change of every norm between two records."""
    drifts = {}
    for species in ("plus", "minus"):
        for name in NORMS:
            key = f"{name}_{species}"
            ref = getattr(first, key)
            drifts[key] = abs(getattr(last, key) - ref) / ref if ref > 0 else 0.0
    return drifts


def moment_derivatives(records: list[DiagnosticsRecord]) -> list[tuple[float, float, float]]:
    """Centred differences (t, dE1/dt, dE2/dt) at the interior samples."""
    out = []
    for prev, cur, nxt in zip(records, records[1:], records[2:]):
        dt = nxt.t - prev.t
        out.append((cur.t, (nxt.E1 - prev.E1) / dt, (nxt.E2 - prev.E2) / dt))
    return out
