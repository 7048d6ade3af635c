from typing import Dict, Tuple

from pydantic import BaseModel, ConfigDict, Field


class WnEntry(BaseModel):
    model_config = ConfigDict(frozen=True)

    # One occupation per pair, in squeeze-set order
    occupations: Tuple[int, ...]
    weight: float = Field(ge=0.0)

    @property
    def total(self) -> int:
        return sum(self.occupations)

class WnTable(BaseModel):
    """Weights of the n-pair entangled components of the vacuum."""
    model_config = ConfigDict(frozen=True)

    entries: Tuple[WnEntry, ...]
    aggregated: Tuple[float, ...]
    tail_bound: float = Field(ge=0.0)
    off_diagonal_weight: float = Field(0.0, ge=0.0)

    def weight(self, occupations: Tuple[int, ...]) -> float:
        for entry in self.entries:
            if entry.occupations == tuple(occupations):
                return entry.weight
        return 0.0

    def as_dict(self) -> Dict[Tuple[int, ...], float]:
        return {entry.occupations: entry.weight for entry in self.entries}

    def aggregated_weight(self, n: int) -> float:
        return self.aggregated[n] if 0 <= n < len(self.aggregated) else 0.0

    def partial_sum(self, n_max: int) -> float:
        return float(sum(self.aggregated[: n_max + 1]))

    def total_weight(self) -> float:
        return float(sum(entry.weight for entry in self.entries))
