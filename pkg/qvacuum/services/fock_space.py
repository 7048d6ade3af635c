"""
Truncated multi-mode bosonic Fock space.

Basis states are occupation multi-indices ordered lexicographically in mode
declaration order (the first declared mode is the most significant digit), so
single-mode ladders embed into the full space by Kronecker products with
identities. Operators are kept sparse; exponentials only ever act on vectors.
"""
import logging
import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from qvacuum.core.config import settings
from qvacuum.core.exceptions import FockValidationError, NumericError, ResourceLimitError
from qvacuum.schemas.mode import ModeId
from qvacuum.schemas.truncation import TruncationReport

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FockSpaceSpec:
    modes: Tuple[ModeId, ...]
    cutoffs: Tuple[int, ...]

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(c + 1 for c in self.cutoffs)

    @property
    def dimension(self) -> int:
        return math.prod(self.dims)

    @property
    def n_modes(self) -> int:
        return len(self.modes)

    def __contains__(self, mode: ModeId) -> bool:
        return mode in self.modes

    def mode_index(self, mode: ModeId) -> int:
        try:
            return self.modes.index(mode)
        except ValueError:
            raise FockValidationError(f"Mode {mode} is not part of this space")

    def cutoff_of(self, mode: ModeId) -> int:
        return self.cutoffs[self.mode_index(mode)]

    def multi_index(self, index: int) -> Tuple[int, ...]:
        if not 0 <= index < self.dimension:
            raise FockValidationError(f"Basis index {index} out of range [0, {self.dimension})")
        return tuple(int(n) for n in np.unravel_index(index, self.dims))

    def index(self, occupations: Sequence[int]) -> int:
        if len(occupations) != self.n_modes:
            raise FockValidationError(
                f"Expected {self.n_modes} occupations, got {len(occupations)}"
            )
        for n, cutoff, mode in zip(occupations, self.cutoffs, self.modes):
            if not 0 <= n <= cutoff:
                raise FockValidationError(f"Occupation {n} of mode {mode} outside [0, {cutoff}]")
        return int(np.ravel_multi_index(tuple(occupations), self.dims))

    @cached_property
    def occupation_table(self) -> np.ndarray:
        """(dimension, n_modes) array: row i is the multi-index of basis state i."""
        table = np.stack(np.unravel_index(np.arange(self.dimension), self.dims), axis=1)
        table.setflags(write=False)
        return table


@dataclass(frozen=True, eq=False)
class StateVector:
    space: FockSpaceSpec
    amplitudes: np.ndarray

    __array_ufunc__ = None

    def __post_init__(self):
        amplitudes = np.asarray(self.amplitudes, dtype=complex)
        if amplitudes.shape != (self.space.dimension,):
            raise FockValidationError(
                f"State has shape {amplitudes.shape}, space dimension is {self.space.dimension}"
            )
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        norm = self.norm()
        if norm == 0.0:
            raise NumericError("Cannot normalize the zero vector")
        return StateVector(self.space, self.amplitudes / norm)

    def is_normalized(self, tol: float) -> bool:
        return abs(self.norm() - 1.0) <= tol

    def amplitude(self, occupations: Sequence[int]) -> complex:
        return complex(self.amplitudes[self.space.index(occupations)])

    def __add__(self, other: "StateVector") -> "StateVector":
        _check_same_space(self.space, other.space)
        return StateVector(self.space, self.amplitudes + other.amplitudes)

    def __sub__(self, other: "StateVector") -> "StateVector":
        _check_same_space(self.space, other.space)
        return StateVector(self.space, self.amplitudes - other.amplitudes)

    def __mul__(self, scalar: complex) -> "StateVector":
        return StateVector(self.space, self.amplitudes * scalar)

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class Operator:
    """Sparse operator on a FockSpaceSpec.

    ``hermitian_tol`` / ``anti_hermitian_tol`` are set only by the verify_*
    helpers and record the tolerance the property was checked at.
    """
    space: FockSpaceSpec
    matrix: sp.csr_matrix
    hermitian_tol: Optional[float] = None
    anti_hermitian_tol: Optional[float] = None

    __array_ufunc__ = None

    def __post_init__(self):
        matrix = sp.csr_matrix(self.matrix, dtype=complex)
        dim = self.space.dimension
        if matrix.shape != (dim, dim):
            raise FockValidationError(f"Operator shape {matrix.shape} does not match dimension {dim}")
        object.__setattr__(self, "matrix", matrix)

    @property
    def is_hermitian(self) -> bool:
        return self.hermitian_tol is not None

    @property
    def is_anti_hermitian(self) -> bool:
        return self.anti_hermitian_tol is not None

    def dag(self) -> "Operator":
        return Operator(
            self.space,
            self.matrix.conj().T.tocsr(),
            hermitian_tol=self.hermitian_tol,
            anti_hermitian_tol=self.anti_hermitian_tol,
        )

    def apply(self, state: StateVector) -> StateVector:
        _check_same_space(self.space, state.space)
        return StateVector(self.space, self.matrix @ state.amplitudes)

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def __add__(self, other: "Operator") -> "Operator":
        _check_same_space(self.space, other.space)
        return Operator(self.space, self.matrix + other.matrix)

    def __sub__(self, other: "Operator") -> "Operator":
        _check_same_space(self.space, other.space)
        return Operator(self.space, self.matrix - other.matrix)

    def __neg__(self) -> "Operator":
        return Operator(self.space, -self.matrix, self.hermitian_tol, self.anti_hermitian_tol)

    def __mul__(self, scalar: complex) -> "Operator":
        if isinstance(scalar, (Operator, StateVector)):
            return NotImplemented
        if isinstance(scalar, (int, float)):
            # Real scaling keeps verified flags, with the tolerance scaled alike
            scale = abs(float(scalar))
            return Operator(
                self.space,
                self.matrix * scalar,
                None if self.hermitian_tol is None else self.hermitian_tol * scale,
                None if self.anti_hermitian_tol is None else self.anti_hermitian_tol * scale,
            )
        return Operator(self.space, self.matrix * scalar)

    __rmul__ = __mul__

    def __truediv__(self, scalar: complex) -> "Operator":
        return Operator(self.space, self.matrix / scalar)

    def __matmul__(self, other: Union["Operator", StateVector]):
        if isinstance(other, StateVector):
            return self.apply(other)
        _check_same_space(self.space, other.space)
        return Operator(self.space, self.matrix @ other.matrix)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    kept_modes: Tuple[ModeId, ...]
    matrix: np.ndarray

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.matrix))

    def validate(self, tol: float) -> None:
        """Hermitian, unit trace, no eigenvalue below -tol."""
        if np.max(np.abs(self.matrix - self.matrix.conj().T), initial=0.0) > tol:
            raise NumericError("Density matrix is not hermitian")
        trace = self.trace()
        if abs(trace - 1.0) > tol:
            raise NumericError(f"Density matrix trace {trace.real:.3e} differs from 1", residual=abs(trace - 1.0))
        min_eig = float(np.min(self.eigenvalues()))
        if min_eig < -tol:
            raise NumericError(f"Density matrix has negative eigenvalue {min_eig:.3e}", residual=-min_eig)

    def eigenvalues(self) -> np.ndarray:
        if self.dimension > settings.DENSE_EIGEN_LIMIT:
            raise ResourceLimitError(
                f"Density matrix dimension {self.dimension} exceeds dense limit {settings.DENSE_EIGEN_LIMIT}"
            )
        return scipy.linalg.eigvalsh(self.matrix)


def _check_same_space(a: FockSpaceSpec, b: FockSpaceSpec) -> None:
    if a is not b and a != b:
        raise FockValidationError("Operands live on different Fock spaces")


def build_space(
    modes: Sequence[ModeId],
    cutoff: Union[int, Sequence[int], Mapping[ModeId, int]],
    max_dimension: Optional[int] = None,
) -> FockSpaceSpec:
    """
    Build a truncated Fock space over ``modes``.

    Parameters
    ----------
    modes : sequence of ModeId
        Modes in basis order. Each (momentum, sector, species) triple may appear once.
    cutoff : int, sequence of int or mapping
        Maximum occupation N_max, either shared or per mode.
    max_dimension : int, optional
        Hard limit on the number of basis states; defaults to ``settings.MAX_DIMENSION``.
    """
    modes = tuple(modes)
    if not modes:
        raise FockValidationError("A Fock space needs at least one mode")
    if len(set(modes)) != len(modes):
        seen = set()
        duplicates = [str(m) for m in modes if m in seen or seen.add(m)]
        raise FockValidationError(f"Duplicate modes: {', '.join(duplicates)}")

    if isinstance(cutoff, Mapping):
        cutoffs = tuple(int(cutoff[m]) for m in modes)
    elif isinstance(cutoff, (int, np.integer)):
        cutoffs = (int(cutoff),) * len(modes)
    else:
        cutoffs = tuple(int(c) for c in cutoff)
        if len(cutoffs) != len(modes):
            raise FockValidationError(f"Got {len(cutoffs)} cutoffs for {len(modes)} modes")
    if min(cutoffs) < 1:
        raise FockValidationError("Every cutoff must be at least 1")

    limit = settings.MAX_DIMENSION if max_dimension is None else max_dimension
    dimension = math.prod(c + 1 for c in cutoffs)
    if dimension > limit:
        raise ResourceLimitError(f"Fock space dimension {dimension} exceeds limit {limit}")

    space = FockSpaceSpec(modes=modes, cutoffs=cutoffs)
    logger.debug(f"Built Fock space with {len(modes)} modes, dimension {dimension}")
    return space


def _embed(space: FockSpaceSpec, mode: ModeId, single: sp.spmatrix) -> sp.csr_matrix:
    k = space.mode_index(mode)
    before = math.prod(space.dims[:k])
    after = math.prod(space.dims[k + 1:])
    return sp.kron(
        sp.kron(sp.identity(before, dtype=complex, format="csr"), single, format="csr"),
        sp.identity(after, dtype=complex, format="csr"),
        format="csr",
    )


def annihilation_op(space: FockSpaceSpec, mode: ModeId) -> Operator:
    """a with <n-1|a|n> = sqrt(n) on ``mode``, identity elsewhere."""
    n_max = space.cutoff_of(mode)
    ladder = sp.diags(np.sqrt(np.arange(1, n_max + 1, dtype=complex)), 1, format="csr")
    return Operator(space, _embed(space, mode, ladder))


def creation_op(space: FockSpaceSpec, mode: ModeId) -> Operator:
    return annihilation_op(space, mode).dag()


def number_op(space: FockSpaceSpec, mode: ModeId) -> Operator:
    n_max = space.cutoff_of(mode)
    diagonal = sp.diags(np.arange(n_max + 1, dtype=complex), 0, format="csr")
    return Operator(space, _embed(space, mode, diagonal), hermitian_tol=0.0)


def identity_op(space: FockSpaceSpec) -> Operator:
    return Operator(space, sp.identity(space.dimension, dtype=complex, format="csr"), hermitian_tol=0.0)


def zero_op(space: FockSpaceSpec) -> Operator:
    return Operator(space, sp.csr_matrix((space.dimension, space.dimension), dtype=complex))


def commutator(A: Operator, B: Operator) -> Operator:
    _check_same_space(A.space, B.space)
    return Operator(A.space, A.matrix @ B.matrix - B.matrix @ A.matrix)


def verify_hermitian(A: Operator, tol: float) -> Operator:
    deviation = _max_abs(A.matrix - A.matrix.conj().T)
    if deviation > tol:
        raise NumericError(f"Operator is not hermitian: max deviation {deviation:.3e}", residual=deviation)
    return replace(A, hermitian_tol=tol)


def verify_anti_hermitian(A: Operator, tol: float) -> Operator:
    deviation = _max_abs(A.matrix + A.matrix.conj().T)
    if deviation > tol:
        raise NumericError(f"Operator is not anti-hermitian: max deviation {deviation:.3e}", residual=deviation)
    return replace(A, anti_hermitian_tol=tol)


def _max_abs(matrix: sp.spmatrix) -> float:
    matrix = sp.csr_matrix(matrix)
    matrix.eliminate_zeros()
    return float(np.max(np.abs(matrix.data), initial=0.0))


def basis_state(space: FockSpaceSpec, occupations: Union[Sequence[int], Mapping[ModeId, int]] = None) -> StateVector:
    if occupations is None:
        occupations = (0,) * space.n_modes
    elif isinstance(occupations, Mapping):
        occ = [0] * space.n_modes
        for mode, n in occupations.items():
            occ[space.mode_index(mode)] = n
        occupations = occ
    amplitudes = np.zeros(space.dimension, dtype=complex)
    amplitudes[space.index(occupations)] = 1.0
    return StateVector(space, amplitudes)


def inner(u: StateVector, v: StateVector) -> complex:
    """<u|v>, conjugate-linear in ``u``."""
    _check_same_space(u.space, v.space)
    return complex(np.vdot(u.amplitudes, v.amplitudes))


def expectation(A: Operator, v: StateVector) -> complex:
    return inner(v, A.apply(v))


def safe_indices(
    space: FockSpaceSpec,
    margin: Optional[int] = None,
    modes: Optional[Iterable[ModeId]] = None,
    max_occupation: Optional[int] = None,
) -> np.ndarray:
    """Basis indices whose involved modes sit at least ``margin`` rungs below their cutoff.

    ``max_occupation`` additionally caps every involved mode's occupation; it is
    used for conjugation checks where amplitudes climb the ladder binomially.
    """
    margin = settings.SAFE_MARGIN if margin is None else margin
    columns = range(space.n_modes) if modes is None else [space.mode_index(m) for m in modes]
    columns = list(columns)
    table = space.occupation_table[:, columns]
    limits = np.array([space.cutoffs[k] - margin for k in columns])
    if max_occupation is not None:
        limits = np.minimum(limits, max_occupation)
    mask = np.all(table <= limits, axis=1)
    return np.flatnonzero(mask)


def max_deviation_on_safe(
    A: Operator,
    B: Operator,
    margin: Optional[int] = None,
    modes: Optional[Iterable[ModeId]] = None,
    max_occupation: Optional[int] = None,
) -> float:
    """max |(A - B)|e_j>| entry over safe basis states e_j."""
    _check_same_space(A.space, B.space)
    columns = safe_indices(A.space, margin, modes, max_occupation)
    if columns.size == 0:
        raise FockValidationError("Safe subspace is empty; increase the cutoff or lower the margin")
    difference = (A.matrix - B.matrix).tocsc()[:, columns]
    return _max_abs(difference)


def boundary_norm(v: StateVector) -> float:
    """Norm of the components with some mode at its cutoff."""
    table = v.space.occupation_table
    on_boundary = np.any(table == np.array(v.space.cutoffs), axis=1)
    return float(np.linalg.norm(v.amplitudes[on_boundary]))


def truncation_report(v: StateVector, tol: float, leaked_norm: float = 0.0) -> TruncationReport:
    significant = np.abs(v.amplitudes) > tol
    if np.any(significant):
        highest = v.space.occupation_table[significant].max(axis=0)
        margin = int(np.min(np.array(v.space.cutoffs) - highest))
    else:
        margin = min(v.space.cutoffs)
    return TruncationReport(
        leaked_norm=min(1.0, leaked_norm),
        boundary_norm=boundary_norm(v),
        safe_subspace_margin=max(0, margin),
    )


def exp_apply(
    A: Operator,
    v: StateVector,
    tol: float = None,
    max_terms: int = None,
) -> Tuple[StateVector, TruncationReport]:
    """
    Apply exp(A) to ``v`` without forming the matrix exponential.

    The exponent is split into ``s`` steps with ||A/s|| <= settings.EXP_STEP_NORM.
    Each step sums the Taylor series of exp(A/s) until the a-priori remainder
    bound ``b^(J+1) ||w|| / (J+1)! / (1 - b/(J+2))`` drops below the step share
    of ``tol``; for operators not flagged anti-hermitian the share is further
    divided by the growth bound exp(||A||).

    Returns
    -------
    (StateVector, TruncationReport)
        The result and its truncation bookkeeping. ``leaked_norm`` is
        | ||w|| - ||v|| | when A is flagged anti-hermitian, else 0.
    """
    tol = settings.DEFAULT_TOLERANCE if tol is None else tol
    max_terms = settings.EXP_MAX_TERMS if max_terms is None else max_terms
    if not tol > 0:
        raise FockValidationError("exp_apply tolerance must be positive")
    if max_terms < 1:
        raise FockValidationError(f"exp_apply needs at least one Taylor term, got max_terms={max_terms}")
    _check_same_space(A.space, v.space)

    matrix = A.matrix
    # ||A||_2 <= sqrt(||A||_1 ||A||_inf)
    norm_bound = math.sqrt(spla.norm(matrix, 1) * spla.norm(matrix, np.inf))
    if norm_bound == 0.0:
        return StateVector(v.space, v.amplitudes.copy()), truncation_report(v, tol)

    steps = max(1, math.ceil(norm_bound / settings.EXP_STEP_NORM))
    b = norm_bound / steps
    growth = 1.0 if A.is_anti_hermitian else math.exp(min(norm_bound, 700.0))
    step_tol = tol / (steps * growth)
    scaled = matrix / steps

    w = np.array(v.amplitudes, dtype=complex)
    for step in range(steps):
        w_norm = np.linalg.norm(w)
        if w_norm == 0.0:
            break
        term = w
        total = w.copy()
        coefficient = 1.0  # b^j / j!
        converged = False
        for j in range(1, max_terms + 1):
            term = scaled @ term / j
            total += term
            coefficient *= b / j
            remainder = coefficient * b / (j + 1) * w_norm / (1.0 - b / (j + 2))
            if remainder <= step_tol or not np.any(term):
                converged = True
                break
        if not converged:
            logger.error(f"exp_apply did not converge in step {step}: remainder {remainder:.3e}")
            raise NumericError(
                f"Taylor series did not converge within {max_terms} terms",
                residual=remainder,
            )
        w = total
    logger.debug(f"exp_apply: ||A|| <= {norm_bound:.3e}, {steps} steps")

    result = StateVector(v.space, w)
    leaked = abs(result.norm() - v.norm()) if A.is_anti_hermitian else 0.0
    return result, truncation_report(result, tol, leaked)


def partial_trace(v: StateVector, keep: Iterable[ModeId]) -> DensityMatrix:
    """Reduced state on ``keep``; its trace equals ||v||^2."""
    space = v.space
    keep = set(keep)
    if not keep:
        raise FockValidationError("partial_trace needs at least one mode to keep")
    keep_axes = sorted(space.mode_index(m) for m in keep)
    if len(keep_axes) == space.n_modes:
        raise FockValidationError("partial_trace must trace out at least one mode")
    rest_axes = [k for k in range(space.n_modes) if k not in keep_axes]

    kept_dim = math.prod(space.dims[k] for k in keep_axes)
    if kept_dim > settings.DENSE_EIGEN_LIMIT:
        raise ResourceLimitError(
            f"Reduced state dimension {kept_dim} exceeds dense limit {settings.DENSE_EIGEN_LIMIT}"
        )
    psi = v.amplitudes.reshape(space.dims)
    psi = np.transpose(psi, keep_axes + rest_axes).reshape(kept_dim, -1)
    rho = psi @ psi.conj().T
    return DensityMatrix(kept_modes=tuple(space.modes[k] for k in keep_axes), matrix=rho)


def von_neumann_entropy(rho: DensityMatrix, tol: float = None) -> float:
    """-sum lambda ln lambda; eigenvalues <= tol contribute nothing."""
    tol = settings.DEFAULT_TOLERANCE if tol is None else tol
    eigenvalues = rho.eigenvalues()
    min_eig = float(eigenvalues.min())
    if min_eig < -tol:
        raise NumericError(f"Density matrix has negative eigenvalue {min_eig:.3e}", residual=-min_eig)
    positive = eigenvalues[eigenvalues > tol]
    return float(-np.sum(positive * np.log(positive)))


def purity(rho: DensityMatrix) -> float:
    return float(np.real(np.trace(rho.matrix @ rho.matrix)))


def occupation_mapping(space: FockSpaceSpec, index: int) -> Dict[ModeId, int]:
    return dict(zip(space.modes, space.multi_index(index)))


def restrict_to_safe(
    A: Operator,
    margin: Optional[int] = None,
    modes: Optional[Iterable[ModeId]] = None,
    max_occupation: Optional[int] = None,
) -> Operator:
    """P A P with P the projector onto the safe subspace."""
    keep = np.zeros(A.space.dimension)
    keep[safe_indices(A.space, margin, modes, max_occupation)] = 1.0
    projector = sp.diags(keep, format="csr")
    return Operator(A.space, (projector @ A.matrix @ projector).tocsr())
