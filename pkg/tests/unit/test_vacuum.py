import math

import pytest

from qvacuum.core.exceptions import FockValidationError, NumericError
from qvacuum.schemas.squeeze import SqueezeSet
from qvacuum.services.bogoliubov import pair_space
from qvacuum.services.vacuum import (
    cutoff_is_sufficient,
    dressed_number_expectation,
    epsilon_vacuum,
    fit_log_slope,
    minkowski_overlap,
    normalization_constant,
    overlap_brute_force,
    overlap_vacua,
    plan_cutoff,
    plan_residual_cutoff,
    reconstruct_minkowski,
    single_pair_vacuum,
)

pytestmark = pytest.mark.unit

def test_plan_cutoff():
    assert plan_cutoff(0.3, 1e-8) == 7
    assert plan_cutoff(0.0, 1e-8) == 1
    with pytest.raises(FockValidationError):
        plan_cutoff(0.3, 1.5)

@pytest.mark.parametrize("epsilon", [0.1, 0.3, 0.5, 1.0, -0.7])
def test_plan_cutoff_is_minimal(epsilon):
    cutoff = plan_cutoff(epsilon, 1e-8)

    assert cutoff_is_sufficient(cutoff, epsilon, 1e-8)
    assert cutoff == 1 or not cutoff_is_sufficient(cutoff - 1, epsilon, 1e-8)

@pytest.mark.parametrize("epsilon", [0.2, 0.3, 0.5])
def test_plan_residual_cutoff(epsilon):
    cutoff = plan_residual_cutoff(epsilon, 1e-8)
    t = math.tanh(epsilon)

    assert cutoff >= plan_cutoff(epsilon, 1e-8)
    assert (cutoff + 1) * t ** cutoff < 1e-8
    assert cutoff * t ** (cutoff - 1) >= 1e-8

def test_plan_residual_cutoff_values():
    assert plan_residual_cutoff(0.3, 1e-8) == 18
    assert plan_residual_cutoff(0.2, 1e-8) == 13

def test_vacuum_amplitudes():
    epsilon = 0.5
    vp = single_pair_vacuum(epsilon, 60, tol=1e-10)
    t, c = math.tanh(epsilon), math.cosh(epsilon)

    for n in range(6):
        assert vp.dressed.amplitude([n, n]).real == pytest.approx((-t) ** n / c, abs=1e-9)
    assert vp.dressed.amplitude([1, 0]) == 0
    assert vp.dressed.norm() == pytest.approx(1.0, abs=1e-10)
    assert vp.annihilation_residual < 1e-8

def test_normalization_constant(one_momentum, single_pair):
    assert normalization_constant(one_momentum) == pytest.approx(math.cosh(0.2) ** 2)
    assert normalization_constant(single_pair) == pytest.approx(math.cosh(0.3))

def test_minkowski_overlap():
    vp = single_pair_vacuum(1.0, plan_residual_cutoff(1.0, 1e-10), tol=1e-10)
    assert minkowski_overlap(vp) == pytest.approx(1.0 / math.cosh(1.0), abs=1e-9)
    assert minkowski_overlap(vp) == pytest.approx(0.648054, abs=1e-6)

def test_reconstruction_fidelity():
    vp = single_pair_vacuum(0.3, plan_residual_cutoff(0.3, 1e-8))

    reconstructed, fidelity = reconstruct_minkowski(vp)

    assert 1.0 - fidelity < 1e-8
    assert reconstructed.amplitude([0, 0]).real == pytest.approx(1.0, abs=1e-6)

def test_reconstruction_refuses_leaky_vacuum():
    vp = single_pair_vacuum(0.3, 7)

    assert vp.truncation.boundary_norm > 1e-6
    with pytest.raises(NumericError) as excinfo:
        reconstruct_minkowski(vp)
    assert excinfo.value.residual == pytest.approx(vp.truncation.boundary_norm)

def test_cutoff_below_plan_is_rejected():
    with pytest.raises(FockValidationError, match="need at least 7"):
        single_pair_vacuum(0.3, 5, tol=1e-8)

def test_overlap_vacua_is_geometric():
    overlaps = overlap_vacua(1.0, 0.0, 3, tol=1e-10)
    base = 1.0 / math.cosh(1.0)

    assert overlaps == pytest.approx([base, base ** 2, base ** 3], abs=1e-9)
    assert fit_log_slope(overlaps) == pytest.approx(math.log(base), abs=1e-8)

def test_overlap_vacua_edge_cases():
    assert overlap_vacua(0.4, 0.4, 2) == pytest.approx([1.0, 1.0], abs=1e-9)
    with pytest.raises(FockValidationError):
        overlap_vacua(1.0, 0.0, 0)
    with pytest.raises(FockValidationError):
        overlap_vacua(1.0, 0.0, 2, cutoff=3)

def test_overlap_factorises_over_pairs():
    cutoff = plan_residual_cutoff(0.2, 1e-8)

    explicit = overlap_brute_force(0.2, 0.0, 2, cutoff)

    assert cutoff == 13
    assert explicit == pytest.approx(1.0 / math.cosh(0.2) ** 2, abs=1e-7)

def test_fit_log_slope():
    assert fit_log_slope([0.5, 0.25, 0.125]) == pytest.approx(math.log(0.5))
    assert fit_log_slope([0.5]) == pytest.approx(math.log(0.5))

def test_dressed_number_expectation():
    vp = single_pair_vacuum(0.5, 20)
    pair = vp.squeeze.pairs[0]

    assert dressed_number_expectation(vp, pair) == pytest.approx(math.sinh(0.5) ** 2)
    assert dressed_number_expectation(vp, pair, barred=True) == pytest.approx(0.2715403, abs=1e-7)
    with pytest.raises(FockValidationError):
        dressed_number_expectation(vp, pair.with_epsilon(0.1))

@pytest.mark.slow
def test_both_sectors_of_one_momentum():
    S = SqueezeSet.for_momenta([(0, 0.3)])
    cutoff = plan_residual_cutoff(0.3, 1e-8)
    space = pair_space(S, cutoff)

    vp = epsilon_vacuum(space, S, tol=1e-10)
    _, fidelity = reconstruct_minkowski(vp)

    assert cutoff == 18
    assert space.dimension == 19 ** 4
    assert vp.annihilation_residual < 1e-8
    assert 1.0 - fidelity < 1e-8
    assert minkowski_overlap(vp) == pytest.approx(1.0 / math.cosh(0.3) ** 2, abs=1e-8)

def test_unit_dressed_occupation():
    epsilon = math.asinh(1.0)
    vp = single_pair_vacuum(epsilon, plan_cutoff(epsilon, 1e-8))

    assert epsilon == pytest.approx(0.881374, abs=1e-6)
    assert dressed_number_expectation(vp, vp.squeeze.pairs[0]) == pytest.approx(1.0, abs=1e-6)

def test_overlap_brute_force_pair_limit():
    with pytest.raises(FockValidationError):
        overlap_brute_force(0.2, 0.0, 4, 5)
