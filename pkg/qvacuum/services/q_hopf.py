"""
q-deformation layer: q-numbers, Casimirs, plain and deformed coproducts.

Everything is written in the fundamental representation, where the central
element H is the scalar 1/2. There h(1) and h_q(1) coincide as algebras and
the deformation only shows up in the coproduct of a and a^dagger.
"""
import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from qvacuum.core.config import settings
from qvacuum.core.exceptions import FockValidationError, NumericError
from qvacuum.schemas.mode import ModeId, Sector
from qvacuum.schemas.qparam import QParam
from qvacuum.services.fock_space import (
    FockSpaceSpec,
    Operator,
    annihilation_op,
    build_space,
    creation_op,
    number_op,
)

logger = logging.getLogger(__name__)

# Central element in the fundamental representation
H_FUNDAMENTAL = 0.5


@dataclass(frozen=True)
class DoubledSpace:
    """A base space and its (+)/(-) copy; (+) modes come first in basis order."""
    base: FockSpaceSpec
    doubled: FockSpaceSpec

    @property
    def plus_modes(self) -> Tuple[ModeId, ...]:
        return tuple(m.with_sector(Sector.PLUS) for m in self.base.modes)

    @property
    def minus_modes(self) -> Tuple[ModeId, ...]:
        return tuple(m.with_sector(Sector.MINUS) for m in self.base.modes)

    def copy_of(self, mode: ModeId, sector: Sector) -> ModeId:
        if mode not in self.base:
            raise FockValidationError(f"Mode {mode} is not part of the base space")
        return mode.with_sector(sector)

    def default_mode(self, mode: Optional[ModeId]) -> ModeId:
        if mode is not None:
            return mode
        if self.base.n_modes != 1:
            raise FockValidationError("Base space has several modes; pass the mode explicitly")
        return self.base.modes[0]


def double_space(base: FockSpaceSpec) -> DoubledSpace:
    plus = [m.with_sector(Sector.PLUS) for m in base.modes]
    minus = [m.with_sector(Sector.MINUS) for m in base.modes]
    if len(set(plus)) != len(plus):
        raise FockValidationError("Base modes must differ in momentum or species, not only in sector")
    doubled = build_space(plus + minus, list(base.cutoffs) * 2)
    return DoubledSpace(base=base, doubled=doubled)


def lift(O: Operator, d: DoubledSpace, sector: Sector) -> Operator:
    """O (x) 1 for the (+) sector, 1 (x) O for the (-) sector."""
    if O.space != d.base:
        raise FockValidationError("Operator does not act on the base space of the doubling")
    identity = sp.identity(d.base.dimension, dtype=complex, format="csr")
    if sector is Sector.PLUS:
        matrix = sp.kron(O.matrix, identity, format="csr")
    else:
        matrix = sp.kron(identity, O.matrix, format="csr")
    return Operator(d.doubled, matrix)


def q_number(x: float, q: QParam) -> float:
    """[x]_q = (q^x - q^-x) / (q - q^-1), continued to x at q = 1."""
    if abs(q.q - 1.0) < settings.Q_LIMIT_WINDOW:
        return float(x)
    # sinh form keeps full precision close to q = 1
    log_q = 2.0 * q.epsilon
    return math.sinh(x * log_q) / math.sinh(log_q)


def _single_mode(space: FockSpaceSpec, mode: Optional[ModeId]) -> ModeId:
    if mode is not None:
        return mode
    if space.n_modes != 1:
        raise FockValidationError("Casimir is built per mode; pass the mode for multi-mode spaces")
    return space.modes[0]


def casimir(space: FockSpaceSpec, mode: Optional[ModeId] = None) -> Operator:
    """C = 2 N H - a^dagger a with H = 1/2."""
    mode = _single_mode(space, mode)
    a = annihilation_op(space, mode)
    return number_op(space, mode) * (2 * H_FUNDAMENTAL) - a.dag() @ a


def casimir_q(space: FockSpaceSpec, q: QParam, mode: Optional[ModeId] = None) -> Operator:
    """C_q = N [2H]_q - a_q^dagger a_q; a_q = a in the fundamental representation."""
    mode = _single_mode(space, mode)
    a_q = annihilation_op(space, mode)
    return number_op(space, mode) * q_number(2 * H_FUNDAMENTAL, q) - a_q.dag() @ a_q


def coproduct_central(h: float = H_FUNDAMENTAL) -> float:
    return h + h


def coproduct_plain(O: Union[Operator, float], d: DoubledSpace) -> Union[Operator, float]:
    """Delta O = O (x) 1 + 1 (x) O; scalars stand for the central element."""
    if isinstance(O, (int, float)):
        return coproduct_central(float(O))
    return lift(O, d, Sector.PLUS) + lift(O, d, Sector.MINUS)


def coproduct_deformed(
    d: DoubledSpace,
    q: QParam,
    mode: Optional[ModeId] = None,
    creation: bool = False,
) -> Operator:
    """Delta a_q = q^(1/2) a(+) + q^(-1/2) a(-), or its adjoint when ``creation``."""
    mode = d.default_mode(mode)
    space = d.doubled
    build = creation_op if creation else annihilation_op
    plus = build(space, d.copy_of(mode, Sector.PLUS))
    minus = build(space, d.copy_of(mode, Sector.MINUS))
    return plus * math.exp(q.epsilon) + minus * math.exp(-q.epsilon)


def sector_isolation_matrix(q: QParam) -> Tuple[np.ndarray, np.ndarray]:
    """
    M with (Delta a_q, Delta a_{1/q})^T = M (a(+), a(-))^T, and its inverse.

    det M = 2 sinh(2 epsilon); the matrix is singular in the undeformed case.
    """
    e_plus, e_minus = math.exp(q.epsilon), math.exp(-q.epsilon)
    M = np.array([[e_plus, e_minus], [e_minus, e_plus]])
    det = 2.0 * math.sinh(2.0 * q.epsilon)
    if abs(det) < 1e-14:
        logger.error(f"Sector isolation requested at epsilon={q.epsilon}")
        raise NumericError("Sector isolation matrix is singular at epsilon = 0", residual=abs(det))
    M_inv = np.array([[e_plus, -e_minus], [-e_minus, e_plus]]) / det
    return M, M_inv


def isolate_sectors(
    d: DoubledSpace,
    q: QParam,
    mode: Optional[ModeId] = None,
    creation: bool = False,
) -> Tuple[Operator, Operator]:
    """Recover (a(+), a(-)) from the q and 1/q deformed coproducts."""
    _, M_inv = sector_isolation_matrix(q)
    forward = coproduct_deformed(d, q, mode, creation)
    backward = coproduct_deformed(d, q.inverse(), mode, creation)
    plus = forward * float(M_inv[0, 0]) + backward * float(M_inv[0, 1])
    minus = forward * float(M_inv[1, 0]) + backward * float(M_inv[1, 1])
    return plus, minus
