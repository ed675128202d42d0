"""Domain models: model variants, the scenario schema, diagnostics rows and run metadata."""
from __future__ import annotations

import math
from enum import Enum
from typing import Any, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


# ============================================================================
# Enums
# ============================================================================


class Handedness(str, Enum):
    """Sign convention of the equation of state."""

    right = "right"
    left = "left"


class Screening(str, Enum):
    """Whether the (I - Laplacian)^-1 inversion enters the velocity law."""

    screened = "screened"
    unscreened = "unscreened"


class ContourMode(str, Enum):
    """Velocity law used by contour dynamics."""

    unscreened_euler = "unscreened_euler"
    screened_left = "screened_left"


class ScenarioKind(str, Enum):
    """Which integrator a scenario runs on."""

    eulerian = "eulerian"
    contour = "contour"
    point_vortex = "point_vortex"


class PresetId(str, Enum):
    """Initial-data constructors known to the harness."""

    right_smooth_merger = "right_smooth_merger"
    right_smooth_merger_screened = "right_smooth_merger_screened"
    left_patch_merger = "left_patch_merger"
    left_patch_smooth = "left_patch_smooth"
    point_vortex = "point_vortex"

    @property
    def kind(self) -> ScenarioKind:
        if self is PresetId.left_patch_merger:
            return ScenarioKind.contour
        if self is PresetId.point_vortex:
            return ScenarioKind.point_vortex
        return ScenarioKind.eulerian


class RunStatus(str, Enum):
    """Lifecycle marker stored in the run manifest."""

    running = "running"
    complete = "complete"
    aborted = "aborted"


# ============================================================================
# Model variant
# ============================================================================


class ModelVariant(BaseModel):
    """One of the four right/left, screened/unscreened velocity laws."""

    model_config = ConfigDict(frozen=True)

    handedness: Handedness
    screening: Screening

    @property
    def screened(self) -> bool:
        return self.screening is Screening.screened

    @property
    def label(self) -> str:
        return f"{self.handedness.value}+{self.screening.value}"

    @classmethod
    def of(cls, handedness: str | Handedness, screened: bool) -> "ModelVariant":
        return cls(
            handedness=Handedness(handedness),
            screening=Screening.screened if screened else Screening.unscreened,
        )


RIGHT_SCREENED = ModelVariant.of("right", True)
RIGHT_UNSCREENED = ModelVariant.of("right", False)
LEFT_SCREENED = ModelVariant.of("left", True)
LEFT_UNSCREENED = ModelVariant.of("left", False)


# ============================================================================
# Scenario schema (the JSON config file)
# ============================================================================


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ModelSection(_Section):
    handedness: Handedness = Field(description="right | left")
    screened: bool = Field(default=True)
    nu_plus: float = Field(default=0.0, ge=0, description="Resistivity of the plus species.")
    nu_minus: float = Field(default=0.0, ge=0, description="Resistivity of the minus species.")

    @property
    def variant(self) -> ModelVariant:
        return ModelVariant.of(self.handedness, self.screened)


class GridSection(_Section):
    n: int = Field(default=256, description="Points per side, a power of two >= 16.")
    box: Optional[float] = Field(default=None, gt=0, description="Side length; preset default when omitted.")

    @field_validator("n")
    @classmethod
    def _power_of_two(cls, v: int) -> int:
        if v < 16 or v & (v - 1):
            raise ValueError("must be a power of two >= 16")
        return v


class ContourSection(_Section):
    nodes: int = Field(default=512, ge=64, description="Nodes per patch boundary.")


class TimeSection(_Section):
    dt: Optional[float] = Field(default=None, gt=0, description="Fixed step; CFL step when omitted.")
    t_end: float = Field(ge=0)
    output_every: Optional[float] = Field(default=None, gt=0)

    @property
    def cadence(self) -> float:
        if self.output_every is not None:
            return self.output_every
        return self.t_end / 50 if self.t_end > 0 else 1.0


class InitSection(_Section):
    preset: PresetId
    params: dict[str, Any] = Field(default_factory=dict)


class DiagnosticsSection(_Section):
    support_threshold: float = Field(default=1e-6, gt=0, lt=1, description="Support threshold relative to max|f|.")
    tracers: int = Field(default=0, ge=0, description="Lagrangian markers seeded on the plus support.")
    reference: bool = Field(default=False, description="Advance the unscreened companion for tracer deviation.")
    oracle: bool = Field(default=False, description="Evaluate the moment-derivative oracle at each output.")


class OutSection(_Section):
    dir: Optional[str] = None
    snapshots: bool = True


class Scenario(_Section):
    """Full run configuration. Serializes to the config file schema."""

    name: Optional[str] = None
    model: ModelSection
    grid: Optional[GridSection] = None
    contour: Optional[ContourSection] = None
    time: TimeSection
    init: InitSection
    diagnostics: DiagnosticsSection = Field(default_factory=DiagnosticsSection)
    out: OutSection = Field(default_factory=OutSection)
    hypotheses: Optional["HypothesisReport"] = None

    @model_validator(mode="after")
    def _resolution_for_kind(self) -> "Scenario":
        kind = self.init.preset.kind
        if kind is ScenarioKind.contour:
            if self.grid is not None:
                raise ValueError("contour presets take a contour section, not grid")
            if self.contour is None:
                self.contour = ContourSection()
        elif kind is ScenarioKind.eulerian:
            if self.contour is not None:
                raise ValueError("grid presets take a grid section, not contour")
            if self.grid is None:
                self.grid = GridSection()
        return self

    @property
    def kind(self) -> ScenarioKind:
        return self.init.preset.kind

    @property
    def variant(self) -> ModelVariant:
        return self.model.variant

    @property
    def label(self) -> str:
        return self.name or self.init.preset.value

    def resolution(self) -> dict[str, Any]:
        if self.grid is not None:
            return {"n": self.grid.n, "box": self.grid.box}
        if self.contour is not None:
            return {"nodes": self.contour.nodes}
        return {"dt": self.time.dt}


# ============================================================================
# Diagnostics and run metadata
# ============================================================================

DIAGNOSTICS_COLUMNS = (
    "t",
    "l1_plus",
    "l2_plus",
    "linf_plus",
    "l1_minus",
    "l2_minus",
    "linf_minus",
    "E1",
    "E2",
    "overlap",
    "components_F",
    "symmetry_defect",
)


class DiagnosticsRecord(BaseModel):
    """One time sample of the measured quantities."""

    t: float
    l1_plus: float
    l2_plus: float
    linf_plus: float
    l1_minus: float
    l2_minus: float
    linf_minus: float
    E1: float
    E2: float
    overlap: float
    components_F: int
    symmetry_defect: float
    oracle_E1: Optional[float] = None
    oracle_E2: Optional[float] = None
    tracer_deviation: Optional[float] = None

    @model_validator(mode="after")
    def _finite(self) -> "DiagnosticsRecord":
        for key in DIAGNOSTICS_COLUMNS:
            if not math.isfinite(float(getattr(self, key))):
                raise ValueError(f"{key} is not finite")
        return self

    def row(self) -> tuple[Any, ...]:
        return tuple(getattr(self, key) for key in DIAGNOSTICS_COLUMNS)


class HypothesisReport(BaseModel):
    """Outcome of a preset's hypothesis checklist."""

    scenario: str
    checks: dict[str, bool] = Field(default_factory=dict)
    measured: dict[str, float] = Field(default_factory=dict)
    notes: dict[str, str] = Field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def failed(self) -> list[str]:
        return [name for name, ok in self.checks.items() if not ok]


class RunSummary(BaseModel):
    """What a finished (or aborted) run reports back."""

    scenario: str
    kind: ScenarioKind
    status: RunStatus = RunStatus.complete
    final_time: float = 0.0
    steps: int = 0
    drifts: dict[str, float] = Field(default_factory=dict, description="Relative drift per norm and species.")
    events: dict[str, Optional[float]] = Field(default_factory=dict, description="Detected event times.")
    measured: dict[str, Any] = Field(default_factory=dict)

    @property
    def merger_time(self) -> Optional[float]:
        return self.events.get("merger")


class RunManifest(BaseModel):
    """Metadata written once per run directory."""

    scenario: dict[str, Any]
    code_version: str
    resolution: dict[str, Any]
    status: RunStatus
    wall_time_s: float = 0.0
    drifts: dict[str, float] = Field(default_factory=dict)
    events: dict[str, Optional[float]] = Field(default_factory=dict)
    hypotheses: Optional[HypothesisReport] = None
    measured: dict[str, Any] = Field(default_factory=dict)


Scenario.model_rebuild()
