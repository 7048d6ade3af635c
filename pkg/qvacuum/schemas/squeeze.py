from typing import List, Tuple, Union

from pydantic import BaseModel, ConfigDict

from qvacuum.schemas.mode import ModeId, Sector, Species


class PairSpec(BaseModel):
    """Couples (p, sigma, particle) with (p~, -sigma, antiparticle) at strength epsilon."""
    model_config = ConfigDict(frozen=True)

    momentum_label: Union[int, str]
    partner_label: Union[int, str]
    sector: Sector = Sector.PLUS
    epsilon: float

    @property
    def particle_mode(self) -> ModeId:
        return ModeId(momentum_label=self.momentum_label, sector=self.sector, species=Species.PARTICLE)

    @property
    def antiparticle_mode(self) -> ModeId:
        return ModeId(
            momentum_label=self.partner_label,
            sector=self.sector.flip(),
            species=Species.ANTIPARTICLE,
        )

    @property
    def modes(self) -> Tuple[ModeId, ModeId]:
        return self.particle_mode, self.antiparticle_mode

    def with_epsilon(self, epsilon: float) -> "PairSpec":
        return self.model_copy(update={"epsilon": epsilon})

class SqueezeSet(BaseModel):
    model_config = ConfigDict(frozen=True)

    pairs: Tuple[PairSpec, ...]

    @classmethod
    def for_momenta(cls, momenta: List[Tuple[Union[int, str], float]], both_sectors: bool = True) -> "SqueezeSet":
        """One pair per sector for each (label, epsilon); the partner label is the label itself."""
        sectors = (Sector.PLUS, Sector.MINUS) if both_sectors else (Sector.PLUS,)
        pairs = [
            PairSpec(momentum_label=label, partner_label=label, sector=sector, epsilon=epsilon)
            for label, epsilon in momenta
            for sector in sectors
        ]
        return cls(pairs=tuple(pairs))

    @classmethod
    def single(cls, epsilon: float, label: Union[int, str] = 0) -> "SqueezeSet":
        return cls.for_momenta([(label, epsilon)], both_sectors=False)

    def modes(self) -> List[ModeId]:
        return [mode for pair in self.pairs for mode in pair.modes]

    def with_epsilon(self, epsilon: float) -> "SqueezeSet":
        return SqueezeSet(pairs=tuple(pair.with_epsilon(epsilon) for pair in self.pairs))

    @property
    def max_abs_epsilon(self) -> float:
        return max((abs(pair.epsilon) for pair in self.pairs), default=0.0)
