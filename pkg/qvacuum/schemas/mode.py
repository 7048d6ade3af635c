import enum
from typing import Union

from pydantic import BaseModel, ConfigDict


class Sector(str, enum.Enum):
    PLUS = "+"
    MINUS = "-"

    @property
    def sign(self) -> int:
        return 1 if self is Sector.PLUS else -1

    def flip(self) -> "Sector":
        return Sector.MINUS if self is Sector.PLUS else Sector.PLUS

class Species(str, enum.Enum):
    PARTICLE = "particle"
    ANTIPARTICLE = "antiparticle"

class ModeId(BaseModel):
    """One bosonic ladder: momentum label, horizon sector and particle species."""
    model_config = ConfigDict(frozen=True)

    momentum_label: Union[int, str]
    sector: Sector = Sector.PLUS
    species: Species = Species.PARTICLE

    def with_sector(self, sector: Sector) -> "ModeId":
        return self.model_copy(update={"sector": sector})

    def __str__(self) -> str:
        bar = "~" if self.species is Species.ANTIPARTICLE else ""
        return f"{bar}{self.momentum_label}{self.sector.value}"
