from typing import List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from qvacuum.core.config import settings
from qvacuum.core.exceptions import FockValidationError

EXPERIMENTS = (
    "algebra-check",
    "bogoliubov-check",
    "vacuum-check",
    "thermo-scan",
    "entangle-report",
    "overlap-scaling",
    "verify-all",
)

# Experiments that evaluate the entropy operator at the configured epsilons
ENTROPY_EXPERIMENTS = frozenset({"thermo-scan", "entangle-report", "verify-all"})


class MomentumConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    label: Union[int, str]
    omega: float
    epsilon: float
    partner: Optional[Union[int, str]] = None

    @field_validator("omega")
    @classmethod
    def omega_positive(cls, value: float) -> float:
        if not value > 0:
            raise ValueError("omega must be positive")
        return value

    @property
    def partner_label(self) -> Union[int, str]:
        return self.label if self.partner is None else self.partner

class Grid(BaseModel):
    """Either explicit ``values`` or ``steps`` points evenly spaced over [start, stop]."""
    model_config = ConfigDict(extra="forbid")

    start: Optional[float] = None
    stop: Optional[float] = None
    steps: Optional[int] = Field(None, ge=1)
    values: Optional[List[float]] = None

    @model_validator(mode="before")
    @classmethod
    def accept_plain_list(cls, data):
        if isinstance(data, (list, tuple)):
            return {"values": list(data)}
        return data

    @model_validator(mode="after")
    def one_form(self) -> "Grid":
        ranged = (self.start, self.stop, self.steps)
        if self.values is not None:
            if any(v is not None for v in ranged):
                raise ValueError("give either values or start/stop/steps, not both")
            if not self.values:
                raise ValueError("values must not be empty")
        elif any(v is None for v in ranged):
            raise ValueError("start, stop and steps are all required without values")
        return self

    def points(self) -> Tuple[float, ...]:
        if self.values is not None:
            return tuple(float(v) for v in self.values)
        return tuple(float(v) for v in np.linspace(self.start, self.stop, self.steps))

class OverlapConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    epsilon: float = 1.0
    epsilon_prime: float = 0.0
    n_pairs_max: int = Field(10, ge=1)

class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    momenta: List[MomentumConfig] = Field(min_length=1)
    cutoff: Optional[int] = Field(None, ge=1)
    tolerance: float = Field(1e-8, gt=0.0, lt=1.0)
    margin: int = Field(2, ge=0)
    beta_grid: Grid = Grid(start=0.2, stop=5.0, steps=15)
    omega_grid: Grid = Grid(values=[1.0])
    epsilon_grid: Grid = Grid(values=[0.2, 0.5, 1.0])
    overlap: OverlapConfig = OverlapConfig()
    experiments: List[str] = Field(default_factory=list)
    output_dir: str = "reports"
    format: Literal["csv", "json"] = "csv"
    # Reserved; every experiment is deterministic
    seed: int = 0

    @field_validator("beta_grid", "omega_grid")
    @classmethod
    def grid_positive(cls, grid: Grid, info) -> Grid:
        if any(not v > 0 for v in grid.points()):
            raise ValueError(f"{info.field_name} values must be positive")
        return grid

    @field_validator("experiments")
    @classmethod
    def known_experiments(cls, names: List[str]) -> List[str]:
        unknown = [n for n in names if n not in EXPERIMENTS]
        if unknown:
            raise ValueError(f"unknown experiments {unknown}; choose from {list(EXPERIMENTS)}")
        return names

    @model_validator(mode="after")
    def cutoff_admissible(self) -> "RunConfig":
        planned = self.planned_cutoff
        if self.cutoff is not None and self.cutoff < planned:
            raise ValueError(
                f"cutoff {self.cutoff} violates tanh^(2(N+1))(max|eps|) < tolerance; "
                f"minimal admissible cutoff is {planned}"
            )
        for name in self.experiments:
            self.check_entropy_guard(name, error=ValueError)
        return self

    @property
    def planned_cutoff(self) -> int:
        from qvacuum.services.vacuum import plan_cutoff

        return plan_cutoff(self.max_abs_epsilon, self.tolerance)

    @property
    def max_abs_epsilon(self) -> float:
        return max(abs(m.epsilon) for m in self.momenta)

    def residual_cutoff(self, epsilon: Optional[float] = None) -> int:
        """Explicit cutoff when given, else the residual-level plan for ``epsilon``."""
        from qvacuum.services.vacuum import plan_residual_cutoff

        if self.cutoff is not None:
            return self.cutoff
        return plan_residual_cutoff(self.max_abs_epsilon if epsilon is None else epsilon, self.tolerance)

    def check_entropy_guard(self, experiment: str, error=FockValidationError) -> None:
        if experiment not in ENTROPY_EXPERIMENTS:
            return
        for m in self.momenta:
            if abs(m.epsilon) < settings.EPSILON_MIN:
                raise error(
                    f"momenta[{m.label}].epsilon={m.epsilon:g} is below epsilon_min={settings.EPSILON_MIN:g}, "
                    f"which {experiment} needs for the entropy operator"
                )
        for eps in self.epsilon_grid.points():
            if abs(eps) < settings.EPSILON_MIN:
                raise error(
                    f"epsilon_grid value {eps:g} is below epsilon_min={settings.EPSILON_MIN:g}, "
                    f"which {experiment} needs for the entropy operator"
                )


def _describe(error: ValidationError) -> str:
    parts = []
    for item in error.errors():
        location = ".".join(str(part) for part in item["loc"]) or "config"
        parts.append(f"{location}: {item['msg']}")
    return "; ".join(parts)


def parse_config(text: str) -> RunConfig:
    """Validate a JSON run config; field errors surface as FockValidationError naming the field."""
    try:
        return RunConfig.model_validate_json(text)
    except ValidationError as e:
        raise FockValidationError(f"Invalid run config: {_describe(e)}") from e


def with_tolerance(cfg: RunConfig, tolerance: float) -> RunConfig:
    """Re-validate ``cfg`` with a new tolerance; the cutoff rule is checked again."""
    data = cfg.model_dump()
    data["tolerance"] = tolerance
    try:
        return RunConfig.model_validate(data)
    except ValidationError as e:
        raise FockValidationError(f"Invalid run config: {_describe(e)}") from e
