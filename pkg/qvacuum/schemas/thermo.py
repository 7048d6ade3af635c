import math

from pydantic import BaseModel, ConfigDict, field_validator


class ThermoParams(BaseModel):
    """Inverse temperature beta = 1/T and mode frequency omega."""
    model_config = ConfigDict(frozen=True)

    beta: float
    omega: float

    @field_validator("beta", "omega")
    @classmethod
    def strictly_positive(cls, value: float, info) -> float:
        if not (math.isfinite(value) and value > 0):
            raise ValueError(f"{info.field_name} must be positive and finite")
        return value

    @property
    def beta_omega(self) -> float:
        return self.beta * self.omega


class ThermoPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    beta: float
    omega: float
    epsilon_star: float
    sinh2_star: float
    bose_einstein: float
    free_energy: float

    @property
    def deviation(self) -> float:
        return abs(self.sinh2_star - self.bose_einstein)
