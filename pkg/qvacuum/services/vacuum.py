"""
The epsilon-vacuum |0(eps)> = G(eps)|0_M> and its condensate structure.
"""
import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from qvacuum.core.config import settings
from qvacuum.core.exceptions import FockValidationError, NumericError
from qvacuum.schemas.squeeze import PairSpec, SqueezeSet
from qvacuum.schemas.truncation import TruncationReport
from qvacuum.services.bogoliubov import (
    DressedPair,
    dressed_ops_closed,
    generator,
    pair_space,
)
from qvacuum.services.fock_space import (
    FockSpaceSpec,
    StateVector,
    basis_state,
    exp_apply,
    expectation,
    inner,
    zero_op,
)

logger = logging.getLogger(__name__)

BRUTE_FORCE_MAX_PAIRS = 3


@dataclass(frozen=True, eq=False)
class VacuumPair:
    minkowski: StateVector
    dressed: StateVector
    squeeze: SqueezeSet
    truncation: TruncationReport
    annihilation_residual: float

    @property
    def space(self) -> FockSpaceSpec:
        return self.minkowski.space

    def dressed_ops(self) -> List[DressedPair]:
        return dressed_ops_closed(self.space, self.squeeze)


def plan_cutoff(max_epsilon: float, tol: float = None) -> int:
    """Smallest cutoff N >= 1 with tanh^(2(N+1))(eps) < tol."""
    tol = settings.DEFAULT_TOLERANCE if tol is None else tol
    if not 0 < tol < 1:
        raise FockValidationError("Tolerance must lie in (0, 1)")
    t2 = math.tanh(abs(max_epsilon)) ** 2
    if t2 == 0.0:
        return 1
    if t2 >= 1.0:
        raise FockValidationError(f"epsilon={max_epsilon} is too large for a finite cutoff")
    cutoff = max(1, math.ceil(math.log(tol) / math.log(t2)) - 1)
    while t2 ** (cutoff + 1) >= tol:
        cutoff += 1
    while cutoff > 1 and t2 ** cutoff < tol:
        cutoff -= 1
    return cutoff


def plan_residual_cutoff(max_epsilon: float, tol: float = None) -> int:
    """
    Smallest cutoff N with (N+1) tanh^N(|eps|) < tol.

    tanh^N bounds the amplitude on the top rung and N+1 the ladder factor
    number-type operators pick up there.
    """
    tol = settings.DEFAULT_TOLERANCE if tol is None else tol
    cutoff = plan_cutoff(max_epsilon, tol)
    t = math.tanh(abs(max_epsilon))
    if t == 0.0:
        return cutoff
    while (cutoff + 1) * t ** cutoff >= tol:
        cutoff += 1
    return cutoff


def cutoff_is_sufficient(cutoff: int, epsilon: float, tol: float) -> bool:
    return math.tanh(abs(epsilon)) ** (2 * (cutoff + 1)) < tol


def _check_cutoffs(space: FockSpaceSpec, S: SqueezeSet, tol: float) -> None:
    for pair in S.pairs:
        cutoff = min(space.cutoff_of(m) for m in pair.modes)
        if not cutoff_is_sufficient(cutoff, pair.epsilon, tol):
            required = plan_cutoff(pair.epsilon, tol)
            raise FockValidationError(
                f"Cutoff {cutoff} too small for epsilon={pair.epsilon} at tolerance {tol:g}; "
                f"need at least {required}"
            )


def normalization_constant(S: SqueezeSet) -> float:
    """Z = prod_pairs cosh(eps); with both sectors per momentum this is prod_p cosh^2(eps(p))."""
    return math.prod(math.cosh(pair.epsilon) for pair in S.pairs)


def minkowski_vacuum(space: FockSpaceSpec) -> StateVector:
    return basis_state(space)


def annihilation_residual(state: StateVector, dressed: Sequence[DressedPair]) -> float:
    """max over pairs of ||d(eps)|psi>|| and ||dbar(eps)|psi>||."""
    residual = 0.0
    for dp in dressed:
        residual = max(residual, dp.d.apply(state).norm(), dp.d_bar.apply(state).norm())
    return residual


def epsilon_vacuum(space: FockSpaceSpec, S: SqueezeSet, tol: float = None) -> VacuumPair:
    tol = settings.DEFAULT_TOLERANCE if tol is None else tol
    _check_cutoffs(space, S, tol)

    vacuum = minkowski_vacuum(space)
    g = generator(space, S)
    dressed, report = exp_apply(g, vacuum, tol)

    residual = annihilation_residual(dressed, dressed_ops_closed(space, S))
    if residual > tol:
        logger.warning(f"Annihilation residual {residual:.2e} exceeds tolerance {tol:g}")
    logger.info(
        f"Built epsilon-vacuum on dimension {space.dimension}: residual {residual:.2e}, "
        f"boundary norm {report.boundary_norm:.2e}"
    )
    return VacuumPair(
        minkowski=vacuum,
        dressed=dressed,
        squeeze=S,
        truncation=report,
        annihilation_residual=residual,
    )


def reconstruct_minkowski(
    vp: VacuumPair,
    tol: float = None,
    leak_budget: float = 1e-6,
) -> Tuple[StateVector, float]:
    """
    Rebuild |0_M> as (1/Z) exp[sum tanh(eps) d^dag(eps) dbar^dag(eps)] |0(eps)>.

    Returns the reconstructed state and |<0_M|r>| / ||r||.
    """
    tol = settings.DEFAULT_TOLERANCE if tol is None else tol
    if vp.truncation.boundary_norm > leak_budget:
        raise NumericError(
            f"Truncation leak {vp.truncation.boundary_norm:.2e} above budget {leak_budget:.1e}",
            residual=vp.truncation.boundary_norm,
        )

    pairing = zero_op(vp.space)
    for dp in vp.dressed_ops():
        pairing = pairing + (dp.d_dag @ dp.d_bar_dag) * math.tanh(dp.pair.epsilon)
    raised, report = exp_apply(pairing, vp.dressed, tol)
    reconstructed = raised * (1.0 / normalization_constant(vp.squeeze))

    norm = reconstructed.norm()
    if norm == 0.0:
        raise NumericError("Reconstructed state vanished")
    fidelity = abs(inner(vp.minkowski, reconstructed)) / norm
    logger.info(f"Condensate reconstruction fidelity 1 - {1.0 - fidelity:.2e}")
    return reconstructed, fidelity


def single_pair_vacuum(epsilon: float, cutoff: int, tol: float = None) -> VacuumPair:
    S = SqueezeSet.single(epsilon)
    return epsilon_vacuum(pair_space(S, cutoff), S, tol)


def overlap_vacua(
    epsilon: float,
    epsilon_prime: float,
    n_pairs: int,
    cutoff: Optional[int] = None,
    tol: float = None,
) -> List[float]:
    """
    |<0(eps)|0(eps')>| for 1..n_pairs pairs.

    The single-pair overlap is computed from two constructed vacua; the
    multi-pair values follow from factorisation over pairs.
    """
    tol = settings.DEFAULT_TOLERANCE if tol is None else tol
    if n_pairs < 1:
        raise FockValidationError("n_pairs must be at least 1")
    largest = max(abs(epsilon), abs(epsilon_prime))
    if cutoff is None:
        cutoff = plan_residual_cutoff(largest, tol)
    elif not cutoff_is_sufficient(cutoff, largest, tol):
        raise FockValidationError(
            f"Cutoff {cutoff} too small for epsilon={largest}; need at least {plan_cutoff(largest, tol)}"
        )

    first = single_pair_vacuum(epsilon, cutoff, tol)
    second = single_pair_vacuum(epsilon_prime, cutoff, tol)
    single = abs(inner(first.dressed, second.dressed))

    expected = 1.0 / math.cosh(epsilon - epsilon_prime)
    if abs(single - expected) > 10 * tol:
        raise NumericError(
            f"Single-pair overlap {single!r} deviates from 1/cosh(eps - eps') = {expected!r}",
            residual=abs(single - expected),
        )
    return [single ** k for k in range(1, n_pairs + 1)]


def overlap_brute_force(epsilon: float, epsilon_prime: float, n_pairs: int, cutoff: int, tol: float = None) -> float:
    """Overlap of two explicitly constructed n_pairs-pair vacua (small n_pairs only)."""
    if not 1 <= n_pairs <= BRUTE_FORCE_MAX_PAIRS:
        raise FockValidationError(f"Explicit construction supports 1 to {BRUTE_FORCE_MAX_PAIRS} pairs, got {n_pairs}")
    S = SqueezeSet.for_momenta([(k, epsilon) for k in range(n_pairs)], both_sectors=False)
    space = pair_space(S, cutoff)
    first = epsilon_vacuum(space, S, tol)
    second = epsilon_vacuum(space, S.with_epsilon(epsilon_prime), tol)
    return abs(inner(first.dressed, second.dressed))


def fit_log_slope(overlaps: Sequence[float]) -> float:
    """Least-squares slope of ln(overlap) against pair count."""
    counts = np.arange(1, len(overlaps) + 1, dtype=float)
    if len(overlaps) < 2:
        return float(math.log(overlaps[0]))
    slope, _ = np.polyfit(counts, np.log(np.asarray(overlaps, dtype=float)), 1)
    return float(slope)


def minkowski_overlap(vp: VacuumPair) -> float:
    return abs(inner(vp.minkowski, vp.dressed))


def dressed_number_expectation(vp: VacuumPair, pair: PairSpec, barred: bool = False) -> float:
    """<0_M| d^dag(eps) d(eps) |0_M> (or the dbar version) for ``pair``."""
    for dp in vp.dressed_ops():
        if dp.pair == pair:
            op = dp.bar_number() if barred else dp.number()
            return float(expectation(op, vp.minkowski).real)
    raise FockValidationError(f"Pair {pair} is not part of the vacuum's squeeze set")
