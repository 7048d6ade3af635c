"""
Entanglement structure of |0_M> read in the dressed basis.

The dressed-basis amplitudes <n(eps)|0_M> equal <n|G^-1|0_M>, so the vacuum is
represented by G^-1|0_M> in the plain occupation basis and every quantity here
is read off that vector.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from qvacuum.core.config import settings
from qvacuum.core.exceptions import FockValidationError, NumericError
from qvacuum.schemas.mode import Sector
from qvacuum.schemas.squeeze import SqueezeSet
from qvacuum.schemas.truncation import TruncationReport
from qvacuum.schemas.wn import WnEntry, WnTable
from qvacuum.services.bogoliubov import generator
from qvacuum.services.fock_space import (
    StateVector,
    basis_state,
    exp_apply,
    inner,
    partial_trace,
    von_neumann_entropy,
)
from qvacuum.services.vacuum import VacuumPair

logger = logging.getLogger(__name__)

# Reduced-state eigenvalues below this are dropped from the entropy sum
EIGEN_FLOOR = 1e-14


@dataclass(frozen=True, eq=False)
class ExpansionTerm:
    total_n: int
    state: StateVector
    amplitude: float
    # pair occupations -> amplitude of that configuration
    profile: Dict[Tuple[int, ...], float]


def _pair_weight(epsilon: float, n: int) -> float:
    return math.sinh(epsilon) ** (2 * n) / math.cosh(epsilon) ** (2 * (n + 1))


def _aggregate(entries: List[WnEntry], max_total: int) -> Tuple[float, ...]:
    aggregated = [0.0] * (max_total + 1)
    for entry in entries:
        if entry.total <= max_total:
            aggregated[entry.total] += entry.weight
    return tuple(aggregated)


def wn_analytic(S: SqueezeSet, max_total_n: int) -> WnTable:
    """W_n = prod_pairs sinh^(2 n)(eps) / cosh^(2(n+1))(eps) for every configuration with sum n <= max_total_n."""
    if max_total_n < 0:
        raise FockValidationError("max_total_n must be non-negative")
    n_pairs = len(S.pairs)
    entries = []
    for occupations in itertools.product(range(max_total_n + 1), repeat=n_pairs):
        if sum(occupations) > max_total_n:
            continue
        weight = math.prod(_pair_weight(pair.epsilon, n) for pair, n in zip(S.pairs, occupations))
        entries.append(WnEntry(occupations=occupations, weight=weight))
    aggregated = _aggregate(entries, max_total_n)
    tail = max(0.0, 1.0 - math.fsum(aggregated))
    return WnTable(entries=tuple(entries), aggregated=aggregated, tail_bound=tail)


def dressed_representation(vp: VacuumPair, tol: float = None) -> Tuple[StateVector, TruncationReport]:
    """G^-1|0_M> in the plain occupation basis."""
    tol = settings.DEFAULT_TOLERANCE if tol is None else tol
    g = generator(vp.space, vp.squeeze)
    return exp_apply(-g, vp.minkowski, tol)


def _pair_columns(vp: VacuumPair) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    space = vp.space
    particle = np.array([space.mode_index(p.particle_mode) for p in vp.squeeze.pairs], dtype=int)
    antiparticle = np.array([space.mode_index(p.antiparticle_mode) for p in vp.squeeze.pairs], dtype=int)
    others = np.array(
        [k for k in range(space.n_modes) if k not in set(particle) | set(antiparticle)],
        dtype=int,
    )
    return particle, antiparticle, others


def _truncation_tail(vp: VacuumPair) -> float:
    space = vp.space
    return math.fsum(
        math.tanh(abs(pair.epsilon)) ** (2 * (min(space.cutoff_of(m) for m in pair.modes) + 1))
        for pair in vp.squeeze.pairs
    )


def wn_from_state(vp: VacuumPair, tol: float = None, leak_budget: float = 1e-6) -> WnTable:
    """
    Empirical W_n: squared norms of the fixed dressed-occupation components of |0_M>.

    Components that are not pair-diagonal (n_particle != n_antiparticle within a
    pair, or unpaired modes occupied) are summed into ``off_diagonal_weight``.
    """
    tol = settings.DEFAULT_TOLERANCE if tol is None else tol
    tail = _truncation_tail(vp)
    if tail > leak_budget:
        raise NumericError(f"Missing-tail bound {tail:.2e} exceeds budget {leak_budget:.1e}", residual=tail)

    state, _ = dressed_representation(vp, tol)
    weights = np.abs(state.amplitudes) ** 2
    table = vp.space.occupation_table
    particle, antiparticle, others = _pair_columns(vp)

    diagonal = np.all(table[:, particle] == table[:, antiparticle], axis=1)
    if others.size:
        diagonal &= np.all(table[:, others] == 0, axis=1)
    off_diagonal = float(weights[~diagonal].sum())

    configs, inverse = np.unique(table[diagonal][:, particle], axis=0, return_inverse=True)
    summed = np.bincount(inverse.ravel(), weights=weights[diagonal], minlength=len(configs))
    entries = [
        WnEntry(occupations=tuple(int(n) for n in config), weight=float(w))
        for config, w in zip(configs, summed)
    ]
    max_total = max(entry.total for entry in entries)
    return WnTable(
        entries=tuple(entries),
        aggregated=_aggregate(entries, max_total),
        tail_bound=tail,
        off_diagonal_weight=off_diagonal,
    )


def expansion_term(vp: VacuumPair, total_n: int, tol: float = None) -> ExpansionTerm:
    """
    Component of |0_M> with 2 * total_n dressed excitations (total_n particles
    and total_n antiparticles), normalized, with its raw amplitude.
    """
    if total_n < 0 or total_n > min(vp.space.cutoffs):
        raise FockValidationError(f"total_n={total_n} outside [0, {min(vp.space.cutoffs)}]")
    state, _ = dressed_representation(vp, tol)
    table = vp.space.occupation_table
    in_shell = table.sum(axis=1) == 2 * total_n
    projected = np.where(in_shell, state.amplitudes, 0.0)
    amplitude = float(np.linalg.norm(projected))

    particle, antiparticle, _ = _pair_columns(vp)
    profile = {}
    for index in np.flatnonzero(in_shell & (np.abs(state.amplitudes) > 0)):
        row = table[index]
        if np.array_equal(row[particle], row[antiparticle]):
            profile[tuple(int(n) for n in row[particle])] = float(state.amplitudes[index].real)

    projection = StateVector(vp.space, projected)
    if amplitude > 0.0:
        projection = projection.normalized()
    return ExpansionTerm(total_n=total_n, state=projection, amplitude=amplitude, profile=profile)


def bell_structure_check(vp: VacuumPair, tol: float = None) -> float:
    """
    |<Bell|psi_1>|^2 between the normalized one-pair component and the equal
    superposition of its two cross-sector configurations.
    """
    tol = settings.DEFAULT_TOLERANCE if tol is None else tol
    pairs = vp.squeeze.pairs
    if len(pairs) != 2 or {p.sector for p in pairs} != {Sector.PLUS, Sector.MINUS} \
            or len({p.momentum_label for p in pairs}) != 1:
        raise FockValidationError("Bell structure check needs one momentum with both sector pairs")

    term = expansion_term(vp, 1, tol)
    if term.amplitude <= tol:
        raise FockValidationError("The one-pair component vanishes (epsilon = 0); no entangled term to check")

    space = vp.space
    ideal = None
    for pair in pairs:
        excited = basis_state(space, {pair.particle_mode: 1, pair.antiparticle_mode: 1})
        ideal = excited if ideal is None else ideal + excited
    ideal = ideal.normalized()
    return abs(inner(ideal, term.state)) ** 2


def sector_entanglement_entropy(vp: VacuumPair, tol: float = None) -> float:
    """Von Neumann entropy of |0_M> (dressed basis) reduced to the (+) sector modes."""
    state, _ = dressed_representation(vp, tol)
    keep = [m for m in vp.space.modes if m.sector is Sector.PLUS]
    rho = partial_trace(state, keep)
    entropy = von_neumann_entropy(rho, EIGEN_FLOOR)
    logger.info(f"Sector entanglement entropy {entropy:.10f} from a {rho.dimension}-dimensional reduced state")
    return entropy
