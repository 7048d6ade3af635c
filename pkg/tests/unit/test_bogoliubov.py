import math

import numpy as np
import pytest

from qvacuum.core.exceptions import FockValidationError, NumericError
from qvacuum.schemas.mode import ModeId, Sector, Species
from qvacuum.schemas.qparam import QParam
from qvacuum.schemas.squeeze import PairSpec, SqueezeSet
from qvacuum.services.bogoliubov import (
    assemble_from_coproducts,
    bch_second_order,
    dressed_ops_closed,
    dressed_ops_conjugated,
    generator,
    pair_charge,
    pair_space,
    redress,
    smear,
    validate_squeeze_set,
)
from qvacuum.services.fock_space import (
    annihilation_op,
    build_space,
    commutator,
    identity_op,
    max_deviation_on_safe,
    zero_op,
)
from qvacuum.services.q_hopf import double_space

pytestmark = pytest.mark.unit

PARTICLE = ModeId(momentum_label=0, species=Species.PARTICLE)
ANTIPARTICLE = ModeId(momentum_label=0, species=Species.ANTIPARTICLE)

def test_generator_is_anti_hermitian(single_pair_space, single_pair):
    g = generator(single_pair_space, single_pair)

    assert g.is_anti_hermitian
    np.testing.assert_allclose(g.toarray(), -g.toarray().conj().T)

def test_generator_vanishes_without_squeezing(single_pair_space, single_pair):
    g = generator(single_pair_space, single_pair.with_epsilon(0.0))
    assert g.matrix.count_nonzero() == 0

def test_dressed_operators_keep_ccr(single_pair_space, single_pair):
    dp = dressed_ops_closed(single_pair_space, single_pair)[0]
    identity = identity_op(single_pair_space)

    assert max_deviation_on_safe(commutator(dp.d, dp.d_dag), identity, margin=2) == pytest.approx(0.0, abs=1e-12)
    assert max_deviation_on_safe(commutator(dp.d_bar, dp.d_bar_dag), identity, margin=2) == pytest.approx(0.0, abs=1e-12)
    assert max_deviation_on_safe(commutator(dp.d, dp.d_bar), zero_op(single_pair_space), margin=2) == pytest.approx(0.0, abs=1e-12)

def test_conjugation_matches_closed_form():
    S = SqueezeSet.single(0.3)
    pair = S.pairs[0]
    space = pair_space(S, 40)
    closed = dressed_ops_closed(space, S)[0]

    conjugated, report = dressed_ops_conjugated(
        space, S, annihilation_op(space, pair.particle_mode), tol=1e-10, margin=4, max_occupation=4
    )

    deviation = max_deviation_on_safe(conjugated, closed.d, margin=4, modes=S.modes(), max_occupation=4)
    assert deviation < 1e-8
    assert report.boundary_norm < 1e-8

def test_conjugation_without_squeezing_is_identity(single_pair_space, single_pair):
    d = annihilation_op(single_pair_space, single_pair.pairs[0].particle_mode)

    conjugated, _ = dressed_ops_conjugated(single_pair_space, single_pair.with_epsilon(0.0), d, max_occupation=4)

    assert max_deviation_on_safe(conjugated, d, max_occupation=4) == 0.0

def test_bch_second_order(single_pair_space, single_pair):
    g = generator(single_pair_space, single_pair)
    d = annihilation_op(single_pair_space, single_pair.pairs[0].particle_mode)

    deviation = max_deviation_on_safe(bch_second_order(g, d), d * (0.3 ** 2 / 2), margin=3)

    assert deviation == pytest.approx(0.0, abs=1e-12)

def test_composition_adds_strengths(single_pair_space, single_pair):
    composed = redress(dressed_ops_closed(single_pair_space, single_pair.with_epsilon(0.2))[0], 0.3)
    direct = dressed_ops_closed(single_pair_space, single_pair.with_epsilon(0.5))[0]

    assert composed.pair.epsilon == pytest.approx(0.5)
    assert max_deviation_on_safe(composed.d, direct.d, 0) == pytest.approx(0.0, abs=1e-12)
    assert max_deviation_on_safe(composed.d_bar, direct.d_bar, 0) == pytest.approx(0.0, abs=1e-12)

def test_charge_is_conserved(single_pair_space, single_pair):
    pair = single_pair.pairs[0]
    g = generator(single_pair_space, single_pair)

    deviation = max_deviation_on_safe(commutator(g, pair_charge(single_pair_space, pair)), zero_op(single_pair_space), 0)

    assert deviation == pytest.approx(0.0, abs=1e-12)

def test_validate_squeeze_set_rejects_shared_modes(single_pair_space, single_pair):
    pair = single_pair.pairs[0]
    with pytest.raises(FockValidationError, match="more than one pair"):
        validate_squeeze_set(single_pair_space, SqueezeSet(pairs=(pair, pair)))

def test_validate_squeeze_set_rejects_foreign_modes(single_pair_space):
    with pytest.raises(FockValidationError, match="not part of the space"):
        validate_squeeze_set(single_pair_space, SqueezeSet.single(0.3, label=5))

def test_validate_squeeze_set_rejects_inconsistent_epsilon():
    # Test data
    split = SqueezeSet(pairs=(
        PairSpec(momentum_label=0, partner_label=0, sector=Sector.PLUS, epsilon=0.2),
        PairSpec(momentum_label=0, partner_label=0, sector=Sector.MINUS, epsilon=0.3),
    ))
    partners = SqueezeSet(pairs=(
        PairSpec(momentum_label=0, partner_label=1, sector=Sector.PLUS, epsilon=0.2),
        PairSpec(momentum_label=1, partner_label=0, sector=Sector.PLUS, epsilon=0.3),
    ))

    # Assertions
    with pytest.raises(FockValidationError, match="several epsilon"):
        validate_squeeze_set(pair_space(split, 1), split)
    with pytest.raises(FockValidationError, match="differs"):
        validate_squeeze_set(pair_space(partners, 1), partners)

def test_smear_with_unitary_matrix():
    space = build_space([ModeId(momentum_label=0), ModeId(momentum_label=1)], 4)
    ops = [annihilation_op(space, m) for m in space.modes]
    angle = 0.4
    F = np.array([[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]])

    d0, d1 = smear(F, ops)

    identity = identity_op(space)
    assert max_deviation_on_safe(commutator(d0, d0.dag()), identity, margin=1) == pytest.approx(0.0, abs=1e-12)
    assert max_deviation_on_safe(commutator(d0, d1.dag()), zero_op(space), margin=1) == pytest.approx(0.0, abs=1e-12)

def test_smear_rejects_bad_matrices():
    space = build_space([ModeId(momentum_label=0), ModeId(momentum_label=1)], 2)
    ops = [annihilation_op(space, m) for m in space.modes]

    with pytest.raises(FockValidationError, match="not unitary"):
        smear(np.array([[1.0, 1.0], [0.0, 1.0]]), ops)
    with pytest.raises(FockValidationError, match="shape"):
        smear(np.eye(3), ops)

@pytest.mark.parametrize("epsilon", [0.1, 0.5])
def test_coproduct_bridge_matches_closed_form(epsilon):
    doubled = double_space(build_space([PARTICLE, ANTIPARTICLE], 4))

    assembled = assemble_from_coproducts(doubled, QParam.from_epsilon(epsilon), PARTICLE, ANTIPARTICLE)
    closed = dressed_ops_closed(doubled.doubled, SqueezeSet(pairs=(assembled.pair,)))[0]

    assert assembled.pair.epsilon == epsilon
    assert max_deviation_on_safe(assembled.d, closed.d, 0) < 1e-10
    assert max_deviation_on_safe(assembled.d_bar, closed.d_bar, 0) < 1e-10

def test_coproduct_bridge_errors():
    doubled = double_space(build_space([PARTICLE, ANTIPARTICLE], 2))
    with pytest.raises(NumericError):
        assemble_from_coproducts(doubled, QParam.from_epsilon(0.0), PARTICLE, ANTIPARTICLE)
    with pytest.raises(FockValidationError):
        assemble_from_coproducts(doubled, QParam.from_epsilon(0.2), ANTIPARTICLE, PARTICLE)
