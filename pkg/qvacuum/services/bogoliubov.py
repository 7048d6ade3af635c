"""
Bogoliubov (two-mode squeezing) transformations of paired modes.

Sign convention: g = sum eps (d dbar - d^dag dbar^dag), so that
exp(g) d exp(-g) = d cosh(eps) + dbar^dag sinh(eps).
"""
import logging
import math
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from qvacuum.core.config import settings
from qvacuum.core.exceptions import FockValidationError
from qvacuum.schemas.mode import ModeId, Sector, Species
from qvacuum.schemas.qparam import QParam
from qvacuum.schemas.squeeze import PairSpec, SqueezeSet
from qvacuum.schemas.truncation import TruncationReport
from qvacuum.services.fock_space import (
    FockSpaceSpec,
    Operator,
    StateVector,
    annihilation_op,
    basis_state,
    build_space,
    commutator,
    exp_apply,
    number_op,
    safe_indices,
    verify_anti_hermitian,
    zero_op,
)
from qvacuum.services.q_hopf import DoubledSpace, isolate_sectors

logger = logging.getLogger(__name__)

LadderMap = Mapping[ModeId, Operator]


@dataclass(frozen=True, eq=False)
class DressedPair:
    """d(eps) and dbar(eps) for one pair, both as annihilation-type operators."""
    pair: PairSpec
    d: Operator
    d_bar: Operator

    @property
    def d_dag(self) -> Operator:
        return self.d.dag()

    @property
    def d_bar_dag(self) -> Operator:
        return self.d_bar.dag()

    def number(self) -> Operator:
        return self.d_dag @ self.d

    def bar_number(self) -> Operator:
        return self.d_bar_dag @ self.d_bar


def pair_space(S: SqueezeSet, cutoff: Union[int, Sequence[int]]) -> FockSpaceSpec:
    """Fock space over the modes of ``S`` in pair order."""
    return build_space(S.modes(), cutoff)


def validate_squeeze_set(space: FockSpaceSpec, S: SqueezeSet) -> None:
    seen: Dict[ModeId, PairSpec] = {}
    for pair in S.pairs:
        particle, antiparticle = pair.modes
        for mode in (particle, antiparticle):
            if mode not in space:
                raise FockValidationError(f"Pair mode {mode} is not part of the space")
            if mode in seen:
                raise FockValidationError(f"Mode {mode} appears in more than one pair")
            seen[mode] = pair

    # eps is a function of the momentum and must agree between p and its partner p~
    eps_by_label: Dict[Union[int, str], set] = defaultdict(set)
    for pair in S.pairs:
        eps_by_label[pair.momentum_label].add(pair.epsilon)
    for label, values in eps_by_label.items():
        if len(values) > 1:
            raise FockValidationError(f"Momentum {label} carries several epsilon values {sorted(values)}")
    for pair in S.pairs:
        partner = eps_by_label.get(pair.partner_label)
        if partner and pair.epsilon not in partner:
            raise FockValidationError(
                f"epsilon({pair.momentum_label}) differs from epsilon({pair.partner_label})"
            )


def smear(F: np.ndarray, ops: Sequence[Operator], tol: float = 1e-12) -> List[Operator]:
    """
    d_p = sum_k F[k, p] a_k for a unitary mixing matrix F.

    Raises FockValidationError with ||F F^dag - I||_max when F is not unitary.
    """
    F = np.asarray(F, dtype=complex)
    n = len(ops)
    if F.shape != (n, n):
        raise FockValidationError(f"Smearing matrix has shape {F.shape}, expected ({n}, {n})")
    if n and any(op.space != ops[0].space for op in ops):
        raise FockValidationError("Smeared operators must share one Fock space")
    deviation = float(np.max(np.abs(F @ F.conj().T - np.eye(n)), initial=0.0))
    if deviation > tol:
        raise FockValidationError(f"Smearing matrix is not unitary: ||FF^dag - I||_max = {deviation:.3e}")

    smeared = []
    for p in range(n):
        total = zero_op(ops[0].space)
        for k in range(n):
            if F[k, p] != 0:
                total = total + ops[k] * complex(F[k, p])
        smeared.append(total)
    return smeared


def _ladders(space: FockSpaceSpec, pair: PairSpec, ops: Optional[LadderMap]) -> Tuple[Operator, Operator]:
    particle, antiparticle = pair.modes
    if ops is None:
        return annihilation_op(space, particle), annihilation_op(space, antiparticle)
    try:
        return ops[particle], ops[antiparticle]
    except KeyError as e:
        raise FockValidationError(f"No ladder operator supplied for mode {e.args[0]}")


def generator(
    space: FockSpaceSpec,
    S: SqueezeSet,
    ops: Optional[LadderMap] = None,
    tol: float = 1e-12,
) -> Operator:
    """g(eps) = sum_pairs eps (d dbar - d^dag dbar^dag), flagged anti-hermitian."""
    validate_squeeze_set(space, S)
    g = zero_op(space)
    for pair in S.pairs:
        if pair.epsilon == 0.0:
            continue
        d, d_bar = _ladders(space, pair, ops)
        g = g + (d @ d_bar - d.dag() @ d_bar.dag()) * pair.epsilon
    return verify_anti_hermitian(g, tol)


def number_ops_for_pair(space: FockSpaceSpec, pair: PairSpec) -> Tuple[Operator, Operator]:
    particle, antiparticle = pair.modes
    return number_op(space, particle), number_op(space, antiparticle)


def pair_charge(space: FockSpaceSpec, pair: PairSpec) -> Operator:
    """Q = N_d - N_dbar, conserved by the pair's squeezing."""
    n_d, n_bar = number_ops_for_pair(space, pair)
    return n_d - n_bar


def dressed_ops_closed(
    space: FockSpaceSpec,
    S: SqueezeSet,
    ops: Optional[LadderMap] = None,
) -> List[DressedPair]:
    """
    Closed-form dressed operators, one DressedPair per pair of ``S``:

        d(eps)    = d cosh(eps) + dbar^dag sinh(eps)
        dbar(eps) = dbar cosh(eps) + d^dag sinh(eps)
    """
    validate_squeeze_set(space, S)
    dressed = []
    for pair in S.pairs:
        d, d_bar = _ladders(space, pair, ops)
        dressed.append(_mix(pair, d, d_bar, pair.epsilon))
    return dressed


def _mix(pair: PairSpec, d: Operator, d_bar: Operator, epsilon: float) -> DressedPair:
    c, s = math.cosh(epsilon), math.sinh(epsilon)
    return DressedPair(
        pair=pair,
        d=d * c + d_bar.dag() * s,
        d_bar=d_bar * c + d.dag() * s,
    )


def redress(dressed: DressedPair, epsilon: float) -> DressedPair:
    """Apply a further Bogoliubov step of strength ``epsilon`` to already dressed operators."""
    pair = dressed.pair.with_epsilon(dressed.pair.epsilon + epsilon)
    return _mix(pair, dressed.d, dressed.d_bar, epsilon)


def bch_second_order(g: Operator, op: Operator) -> Operator:
    """1/2 [g, [g, op]]."""
    return commutator(g, commutator(g, op)) * 0.5


def dressed_ops_conjugated(
    space: FockSpaceSpec,
    S: SqueezeSet,
    op: Operator,
    tol: float = None,
    margin: int = None,
    max_occupation: Optional[int] = None,
    columns: Optional[np.ndarray] = None,
) -> Tuple[Operator, TruncationReport]:
    """
    G op G^-1 evaluated column by column with nested exp_apply.

    Only the columns of the safe subspace (or ``columns``) are computed; the
    rest of the returned matrix is left empty. The TruncationReport combines
    the bookkeeping of every exponential applied.
    """
    tol = settings.DEFAULT_TOLERANCE if tol is None else tol
    g = generator(space, S)
    if columns is None:
        columns = safe_indices(space, margin, modes=S.modes(), max_occupation=max_occupation)

    # Each column passes through two exponentials
    inner_tol = tol / 4
    rows, cols, values = [], [], []
    report = TruncationReport(safe_subspace_margin=min(space.cutoffs))
    for j in columns:
        e_j = basis_state(space, space.multi_index(int(j)))
        back, r1 = exp_apply(-g, e_j, inner_tol)
        moved = op.apply(back)
        column, r2 = exp_apply(g, moved, inner_tol)
        report = report.combine(r1).combine(r2)
        nonzero = np.flatnonzero(np.abs(column.amplitudes) > tol * 1e-6)
        rows.extend(nonzero.tolist())
        cols.extend([int(j)] * nonzero.size)
        values.extend(column.amplitudes[nonzero].tolist())

    matrix = sp.csr_matrix((values, (rows, cols)), shape=(space.dimension, space.dimension), dtype=complex)
    logger.info(f"Conjugated operator on {len(columns)} columns, boundary norm {report.boundary_norm:.2e}")
    return Operator(space, matrix), report


def assemble_from_coproducts(
    d: DoubledSpace,
    q: QParam,
    particle_mode: ModeId,
    antiparticle_mode: ModeId,
    sector: Sector = Sector.PLUS,
) -> DressedPair:
    """
    Dressed operators assembled from deformed coproducts.

    a(sigma) for the particle and abar(-sigma) for the antiparticle are isolated
    with the inverse sector-isolation matrix, then combined with eps = ln(q)/2.
    """
    if particle_mode.species is not Species.PARTICLE or antiparticle_mode.species is not Species.ANTIPARTICLE:
        raise FockValidationError("Expected a particle mode and an antiparticle mode")
    a_plus, a_minus = isolate_sectors(d, q, particle_mode)
    b_plus, b_minus = isolate_sectors(d, q, antiparticle_mode)
    if sector is Sector.PLUS:
        a, a_bar = a_plus, b_minus
    else:
        a, a_bar = a_minus, b_plus

    pair = PairSpec(
        momentum_label=particle_mode.momentum_label,
        partner_label=antiparticle_mode.momentum_label,
        sector=sector,
        epsilon=q.epsilon,
    )
    return _mix(pair, a, a_bar, q.epsilon)
