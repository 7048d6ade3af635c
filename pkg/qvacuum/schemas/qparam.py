import math

from pydantic import BaseModel, ConfigDict, model_validator

from qvacuum.core.exceptions import FockValidationError


class QParam(BaseModel):
    """Real deformation parameter, q = exp(2 epsilon)."""
    model_config = ConfigDict(frozen=True)

    epsilon: float
    q: float

    @model_validator(mode="after")
    def check_consistency(self) -> "QParam":
        if not (math.isfinite(self.q) and self.q > 0):
            raise ValueError("q must be a positive real number")
        # Compared in log space; exp/log round-off grows with |epsilon|
        implied = 0.5 * math.log(self.q)
        if not math.isclose(implied, self.epsilon, rel_tol=1e-12, abs_tol=1e-14):
            raise ValueError(
                f"q={self.q!r} is inconsistent with epsilon={self.epsilon!r} (q implies {implied!r})"
            )
        return self

    @classmethod
    def from_epsilon(cls, epsilon: float) -> "QParam":
        return cls(epsilon=epsilon, q=math.exp(2 * epsilon))

    @classmethod
    def from_q(cls, q: float) -> "QParam":
        if isinstance(q, complex):
            # Modulus-one deformations are not supported
            raise FockValidationError("only real q is supported")
        if not q > 0:
            raise FockValidationError("q must be a positive real number")
        return cls(epsilon=0.5 * math.log(q), q=q)

    def inverse(self) -> "QParam":
        return QParam.from_epsilon(-self.epsilon)
