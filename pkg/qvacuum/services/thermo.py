"""
Thermal reading of the condensate: entropy operator, dressed-frame
Hamiltonian, free energy and its Bose-Einstein stationary point.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import List, Mapping, Optional, Sequence, Union

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from qvacuum.core.config import settings
from qvacuum.core.exceptions import FockValidationError, NumericError
from qvacuum.schemas.mode import Sector
from qvacuum.schemas.squeeze import SqueezeSet
from qvacuum.schemas.thermo import ThermoParams, ThermoPoint
from qvacuum.services.bogoliubov import dressed_ops_closed, pair_space
from qvacuum.services.fock_space import (
    FockSpaceSpec,
    Operator,
    expectation,
    verify_hermitian,
    zero_op,
)
from qvacuum.services.vacuum import minkowski_vacuum

logger = logging.getLogger(__name__)

OmegaSpec = Union[float, Mapping[Union[int, str], float]]


def _xlogx(x: float) -> float:
    return 0.0 if x == 0.0 else x * math.log(x)


def entropy_closed(epsilon: float) -> float:
    """cosh^2 ln cosh^2 - sinh^2 ln sinh^2; 0 at epsilon = 0."""
    s2 = math.sinh(epsilon) ** 2
    return _xlogx(1.0 + s2) - _xlogx(s2)


def bose_einstein_value(beta_omega: float) -> float:
    if not beta_omega > 0:
        raise FockValidationError(f"beta*omega must be positive, got {beta_omega}")
    return 1.0 / math.expm1(beta_omega)


def bose_einstein(tp: ThermoParams) -> float:
    return bose_einstein_value(tp.beta_omega)


def _omega_for(omega: OmegaSpec, label) -> float:
    value = omega.get(label) if isinstance(omega, Mapping) else omega
    if value is None:
        raise FockValidationError(f"No frequency given for momentum {label}")
    if not value > 0:
        raise FockValidationError(f"omega must be positive, got {value} for momentum {label}")
    return float(value)


def entropy_operator(
    space: FockSpaceSpec,
    S: SqueezeSet,
    sector: Sector,
    epsilon_min: Optional[float] = None,
) -> Operator:
    """
    S^(sigma)(eps) = Scal^(sigma) + Scalbar^(sigma) with

        Scal^(sigma) = -sum_p [d^dag d ln sinh^2(eps) - d d^dag ln cosh^2(eps)]

    over the dressed particle modes of sector sigma, and the same expression
    over the dressed antiparticle modes of sector sigma for the barred part.
    """
    epsilon_min = settings.EPSILON_MIN if epsilon_min is None else epsilon_min
    entropy = zero_op(space)
    for dp in dressed_ops_closed(space, S):
        pair = dp.pair
        has_particle = pair.sector is sector
        has_antiparticle = pair.sector.flip() is sector
        if not (has_particle or has_antiparticle):
            continue
        if abs(pair.epsilon) < epsilon_min:
            raise FockValidationError(
                f"|epsilon|={abs(pair.epsilon):g} below epsilon_min={epsilon_min:g}; "
                "use entropy_closed for the vanishing-deformation limit"
            )
        ln_s2 = math.log(math.sinh(pair.epsilon) ** 2)
        ln_c2 = math.log(math.cosh(pair.epsilon) ** 2)
        ladder = dp.d if has_particle else dp.d_bar
        entropy = entropy - (ladder.dag() @ ladder) * ln_s2 + (ladder @ ladder.dag()) * ln_c2
    return verify_hermitian(entropy, 1e-10)


def total_entropy_operator(space: FockSpaceSpec, S: SqueezeSet) -> Operator:
    """S_eps = S^(+) - S^(-)."""
    return entropy_operator(space, S, Sector.PLUS) - entropy_operator(space, S, Sector.MINUS)


def hamiltonian_sector(space: FockSpaceSpec, S: SqueezeSet, sector: Sector, omega: OmegaSpec) -> Operator:
    """H^(sigma)(eps) = sum_p Omega [d^dag(eps) d(eps) + dbar(eps) dbar^dag(eps)], ordering kept as written."""
    hamiltonian = zero_op(space)
    for dp in dressed_ops_closed(space, S):
        pair = dp.pair
        frequency = _omega_for(omega, pair.momentum_label)
        if pair.sector is sector:
            hamiltonian = hamiltonian + (dp.d_dag @ dp.d) * frequency
        if pair.sector.flip() is sector:
            hamiltonian = hamiltonian + (dp.d_bar @ dp.d_bar_dag) * frequency
    return hamiltonian


def hamiltonian_eps(space: FockSpaceSpec, S: SqueezeSet, omega: OmegaSpec) -> Operator:
    """H_eps = H^(+)(eps) - H^(-)(eps)."""
    h = hamiltonian_sector(space, S, Sector.PLUS, omega) - hamiltonian_sector(space, S, Sector.MINUS, omega)
    return verify_hermitian(h, 1e-10)


def free_energy_closed(epsilon: float, tp: ThermoParams) -> float:
    """Omega (2 sinh^2 + 1) - (2/beta) [cosh^2 ln cosh^2 - sinh^2 ln sinh^2], one momentum."""
    s2 = math.sinh(epsilon) ** 2
    return tp.omega * (2.0 * s2 + 1.0) - 2.0 / tp.beta * entropy_closed(epsilon)


def free_energy_operator(epsilon: float, tp: ThermoParams) -> float:
    """<0_M| H^(+)(eps) - S^(+)(eps)/beta |0_M> on a single momentum with both sectors."""
    S = SqueezeSet.for_momenta([(0, epsilon)])
    # Expectations on |0_M> only reach occupation 1 in each mode
    space = pair_space(S, 2)
    vacuum = minkowski_vacuum(space)
    energy = expectation(hamiltonian_sector(space, S, Sector.PLUS, tp.omega), vacuum).real
    if abs(epsilon) < settings.EPSILON_MIN:
        entropy = 2.0 * entropy_closed(epsilon)
    else:
        entropy = expectation(entropy_operator(space, S, Sector.PLUS), vacuum).real
    return float(energy - entropy / tp.beta)


def free_energy(epsilon: float, tp: ThermoParams, tol: float = 1e-8) -> float:
    """F^(+)(eps) per momentum; the operator and closed-form paths must agree."""
    closed = free_energy_closed(epsilon, tp)
    operator = free_energy_operator(epsilon, tp)
    if abs(closed - operator) > tol:
        logger.error(f"Free energy paths disagree at epsilon={epsilon}: {closed!r} vs {operator!r}")
        raise NumericError("Free energy operator and closed-form paths disagree", residual=abs(closed - operator))
    return closed


def free_energy_derivative(epsilon: float, tp: ThermoParams) -> float:
    """dF/deps = sinh(2 eps) [2 Omega - (2/beta) ln coth^2(eps)]."""
    if epsilon == 0.0:
        return 0.0
    ln_coth2 = math.log(1.0 / math.tanh(epsilon) ** 2)
    return math.sinh(2.0 * epsilon) * (2.0 * tp.omega - 2.0 / tp.beta * ln_coth2)


def _stationarity(x: float, tp: ThermoParams) -> float:
    # dF/dx in x = sinh^2(eps); increasing in x
    return 2.0 * tp.omega - 2.0 / tp.beta * math.log1p(1.0 / x)


def stationary_epsilon(tp: ThermoParams, xatol: float = 1e-10) -> float:
    """
    Minimise F^(+) over eps >= 0.

    A bounded scalar minimisation on [0, asinh(sqrt(10 n_BE))] locates the
    minimum; the stationarity condition in x = sinh^2(eps) is then solved by a
    bracketed root find, which resolves x far below the flat minimum's
    sqrt(machine epsilon) limit.
    """
    n_be = bose_einstein(tp)
    upper = math.asinh(math.sqrt(10.0 * n_be))
    coarse = minimize_scalar(
        lambda e: free_energy_closed(e, tp),
        bounds=(0.0, upper),
        method="bounded",
        options={"xatol": xatol},
    )
    if not coarse.success:
        raise NumericError(f"Bounded minimisation failed: {coarse.message}")

    x_coarse = math.sinh(coarse.x) ** 2
    lo, hi = x_coarse / 10.0, x_coarse * 10.0
    if not (x_coarse > 0 and _stationarity(lo, tp) < 0 < _stationarity(hi, tp)):
        lo, hi = n_be / 10.0, n_be * 10.0
        if not _stationarity(lo, tp) < 0 < _stationarity(hi, tp):
            raise NumericError(f"Could not bracket the stationary point for beta={tp.beta}, omega={tp.omega}")
    x_star = brentq(_stationarity, lo, hi, args=(tp,), xtol=1e-300, rtol=4 * np.finfo(float).eps)
    epsilon = math.asinh(math.sqrt(x_star))

    scale = max(1.0, abs(coarse.fun))
    if free_energy_closed(epsilon, tp) > coarse.fun + 1e-12 * scale:
        raise NumericError("Polished stationary point does not lower the free energy")
    logger.debug(f"beta={tp.beta}, omega={tp.omega}: eps*={epsilon!r} (coarse {coarse.x!r})")
    return epsilon


def thermal_point(tp: ThermoParams) -> ThermoPoint:
    epsilon = stationary_epsilon(tp)
    return ThermoPoint(
        beta=tp.beta,
        omega=tp.omega,
        epsilon_star=epsilon,
        sinh2_star=math.sinh(epsilon) ** 2,
        bose_einstein=bose_einstein(tp),
        free_energy=free_energy_closed(epsilon, tp),
    )


def thermal_scan(
    beta_values: Sequence[float],
    omega_values: Sequence[float],
    max_workers: Optional[int] = None,
) -> List[ThermoPoint]:
    """Stationary points over the (omega, beta) grid, omega-major, in grid order."""
    grid = [ThermoParams(beta=beta, omega=omega) for omega in omega_values for beta in beta_values]
    max_workers = settings.MAX_WORKERS if max_workers is None else max_workers
    with ThreadPoolExecutor(max_workers=max_workers) as pool:
        # map preserves input order regardless of completion order
        points = list(pool.map(thermal_point, grid))
    logger.info(f"Thermal scan finished: {len(points)} grid points")
    return points
