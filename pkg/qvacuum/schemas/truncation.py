from pydantic import BaseModel, ConfigDict, Field


class TruncationReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    leaked_norm: float = Field(0.0, ge=0.0, le=1.0)
    # Norm carried by basis states with some mode at its cutoff
    boundary_norm: float = Field(0.0, ge=0.0)
    safe_subspace_margin: int = Field(0, ge=0)

    def combine(self, other: "TruncationReport") -> "TruncationReport":
        return TruncationReport(
            leaked_norm=min(1.0, self.leaked_norm + other.leaked_norm),
            boundary_norm=self.boundary_norm + other.boundary_norm,
            safe_subspace_margin=min(self.safe_subspace_margin, other.safe_subspace_margin),
        )
