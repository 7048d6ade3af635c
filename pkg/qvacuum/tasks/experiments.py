"""
Experiment orchestration: every experiment runs one or more invariant suites
and returns a ReportRecord whose rows carry their own tolerance verdicts.
"""
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Dict, List, Optional, Tuple

from qvacuum.core.config import settings
from qvacuum.core.exceptions import FockValidationError, NumericError
from qvacuum.schemas.mode import ModeId, Sector, Species
from qvacuum.schemas.qparam import QParam
from qvacuum.schemas.report import InvariantCheck, ReportRecord
from qvacuum.schemas.run_config import EXPERIMENTS, MomentumConfig, RunConfig
from qvacuum.schemas.squeeze import PairSpec, SqueezeSet
from qvacuum.schemas.thermo import ThermoParams
from qvacuum.services import entanglement, thermo
from qvacuum.services.bogoliubov import (
    assemble_from_coproducts,
    bch_second_order,
    dressed_ops_closed,
    dressed_ops_conjugated,
    generator,
    pair_charge,
    pair_space,
    redress,
)
from qvacuum.services.fock_space import (
    annihilation_op,
    build_space,
    commutator,
    expectation,
    identity_op,
    max_deviation_on_safe,
    number_op,
    zero_op,
)
from qvacuum.services.q_hopf import (
    H_FUNDAMENTAL,
    casimir,
    casimir_q,
    coproduct_central,
    coproduct_deformed,
    coproduct_plain,
    double_space,
    isolate_sectors,
    lift,
    q_number,
    sector_isolation_matrix,
)
from qvacuum.services.report_service import CHECK_COLUMNS, ROW_SCHEMAS
from qvacuum.services.vacuum import (
    epsilon_vacuum,
    fit_log_slope,
    minkowski_overlap,
    minkowski_vacuum,
    normalization_constant,
    overlap_brute_force,
    overlap_vacua,
    plan_residual_cutoff,
    reconstruct_minkowski,
    single_pair_vacuum,
)

logger = logging.getLogger(__name__)

ALGEBRA_CUTOFF = 16
ALGEBRA_TOL = 1e-10
Q_VALUES = (0.5, 1.0, 2.0, math.e)
BRIDGE_EPSILONS = (0.1, 0.5)
BRIDGE_CUTOFF = 4
# Conjugation checks: single pair, occupations <= 4, cutoff deep enough for 1e-8 at eps = 0.3
CONJUGATION_EPSILON = 0.3
CONJUGATION_CUTOFF = 40
CONJUGATION_DEPTH = 4
# Exponentials inside a conjugation run this much tighter than the comparison
INNER_TOL_FACTOR = 1e-2
ENTROPY_TOL = 1e-6
NUMBER_TOL = 1e-6
WN_SUM_TOL = 1e-10
WN_ROWS = 10
OVERLAP_TOL = 1e-10
SLOPE_TOL = 1e-6
BRUTE_FORCE_PAIRS = 2
BRUTE_FORCE_EPSILON = 0.3


class Suite:
    """Collects invariant checks, as rows and as InvariantCheck entries, plus any data rows."""

    def __init__(self, name: str):
        self.name = name
        self.rows: List[Dict[str, Any]] = []
        self.checks: List[InvariantCheck] = []
        self.data: List[Dict[str, Any]] = []

    def below(self, check: str, value: float, tolerance: float, parameter: str = "", leak: float = 0.0) -> bool:
        label = f"{self.name}.{check}" + (f"[{parameter}]" if parameter else "")
        result = InvariantCheck.below(label, value, tolerance)
        self.checks.append(result)
        self.rows.append({
            "suite": self.name,
            "check": check,
            "parameter": parameter,
            "value": result.value,
            "tolerance": result.tolerance,
            "pass": result.passed,
            "leak": float(leak),
        })
        if not result.passed:
            logger.warning(f"Invariant {label} failed: {result.value!r} > {tolerance!r}")
        return result.passed

    def holds(self, check: str, condition: bool, parameter: str = "") -> bool:
        return self.below(check, 0.0 if condition else 1.0, 0.0, parameter)

    def numeric(self, check: str, compute, tolerance: float, parameter: str = "", leak: float = 0.0) -> bool:
        """Like ``below`` but a NumericError counts as a failure carrying its residual."""
        try:
            value = compute()
        except NumericError as e:
            logger.error(f"{self.name}.{check}[{parameter}] raised: {str(e)}")
            value = e.residual if e.residual is not None else math.inf
            value = max(value, math.nextafter(tolerance, math.inf))
        return self.below(check, value, tolerance, parameter, leak)


def momentum_squeeze(m: MomentumConfig) -> SqueezeSet:
    """Both sector pairs of one configured momentum."""
    return SqueezeSet(pairs=tuple(
        PairSpec(momentum_label=m.label, partner_label=m.partner_label, sector=sector, epsilon=m.epsilon)
        for sector in (Sector.PLUS, Sector.MINUS)
    ))


class ExperimentRunner:
    def __init__(self, cfg: RunConfig, max_workers: Optional[int] = None):
        self.cfg = cfg
        self.tol = cfg.tolerance
        self.max_workers = settings.MAX_WORKERS if max_workers is None else max_workers

    # ------------------------------------------------------------------ suites

    def algebra_suite(self) -> Suite:
        suite = Suite("algebra")
        margin = self.cfg.margin
        mode = ModeId(momentum_label=0)
        space = build_space([mode], self.cfg.cutoff or ALGEBRA_CUTOFF)
        a = annihilation_op(space, mode)
        n = number_op(space, mode)

        suite.below("ccr", max_deviation_on_safe(commutator(a, a.dag()), identity_op(space), margin), ALGEBRA_TOL)
        suite.below("number_lowering", max_deviation_on_safe(commutator(n, a), -a, margin), ALGEBRA_TOL)
        suite.below("number_raising", max_deviation_on_safe(commutator(n, a.dag()), a.dag(), margin), ALGEBRA_TOL)
        suite.below("casimir", max_deviation_on_safe(casimir(space), zero_op(space), margin), ALGEBRA_TOL)
        suite.below("coproduct_central", abs(coproduct_central(H_FUNDAMENTAL) - 1.0), 0.0)

        doubled = double_space(space)
        plain = coproduct_plain(a, doubled)
        for value in Q_VALUES:
            q = QParam.from_q(value)
            tag = f"q={value!r}"
            suite.below("casimir_q", max_deviation_on_safe(casimir_q(space, q), zero_op(space), margin), ALGEBRA_TOL, tag)
            delta = coproduct_deformed(doubled, q)
            expected = identity_op(doubled.doubled) * q_number(2.0, q)
            suite.below(
                "coproduct_homomorphism",
                max_deviation_on_safe(commutator(delta, delta.dag()), expected, margin),
                ALGEBRA_TOL,
                tag,
            )
            if q.epsilon == 0.0:
                suite.below("undeformed_limit", max_deviation_on_safe(delta, plain, 0), 0.0, tag)
                try:
                    sector_isolation_matrix(q)
                    rejected = False
                except NumericError:
                    rejected = True
                suite.holds("singular_isolation_rejected", rejected, tag)
            else:
                plus, minus = isolate_sectors(doubled, q)
                deviation = max(
                    max_deviation_on_safe(plus, lift(a, doubled, Sector.PLUS), 0),
                    max_deviation_on_safe(minus, lift(a, doubled, Sector.MINUS), 0),
                )
                suite.below("sector_isolation", deviation, ALGEBRA_TOL, tag)
        return suite

    def bogoliubov_suite(self) -> Suite:
        suite = Suite("bogoliubov")
        particle = ModeId(momentum_label=0, species=Species.PARTICLE)
        antiparticle = ModeId(momentum_label=0, species=Species.ANTIPARTICLE)
        doubled = double_space(build_space([particle, antiparticle], BRIDGE_CUTOFF))

        for eps in BRIDGE_EPSILONS:
            assembled = assemble_from_coproducts(doubled, QParam.from_epsilon(eps), particle, antiparticle)
            closed = dressed_ops_closed(doubled.doubled, SqueezeSet(pairs=(assembled.pair,)))[0]
            deviation = max(
                max_deviation_on_safe(assembled.d, closed.d, 0),
                max_deviation_on_safe(assembled.d_bar, closed.d_bar, 0),
            )
            suite.below("coproduct_bridge", deviation, ALGEBRA_TOL, f"eps={eps!r}")
        try:
            assemble_from_coproducts(doubled, QParam.from_epsilon(0.0), particle, antiparticle)
            rejected = False
        except NumericError:
            rejected = True
        suite.holds("bridge_rejects_eps0", rejected)

        S = SqueezeSet.single(CONJUGATION_EPSILON)
        pair = S.pairs[0]
        space = pair_space(S, CONJUGATION_CUTOFF)
        closed = dressed_ops_closed(space, S)[0]
        depth = dict(margin=CONJUGATION_DEPTH, max_occupation=CONJUGATION_DEPTH)
        for name, mode, target in (
            ("conjugation_d", pair.particle_mode, closed.d),
            ("conjugation_dbar", pair.antiparticle_mode, closed.d_bar),
        ):
            conjugated, report = dressed_ops_conjugated(
                space, S, annihilation_op(space, mode), self.tol * INNER_TOL_FACTOR, **depth
            )
            suite.below(
                name,
                max_deviation_on_safe(conjugated, target, modes=S.modes(), **depth),
                self.tol,
                f"eps={CONJUGATION_EPSILON!r}",
                leak=report.boundary_norm,
            )

        g = generator(space, S)
        d = annihilation_op(space, pair.particle_mode)
        suite.below(
            "bch_second_order",
            max_deviation_on_safe(bch_second_order(g, d), d * (CONJUGATION_EPSILON ** 2 / 2), self.cfg.margin),
            ALGEBRA_TOL,
        )
        suite.below(
            "charge_conserved",
            max_deviation_on_safe(commutator(g, pair_charge(space, pair)), zero_op(space), 0),
            ALGEBRA_TOL,
        )
        suite.below(
            "dressed_ccr",
            max(
                max_deviation_on_safe(commutator(closed.d, closed.d_dag), identity_op(space), self.cfg.margin),
                max_deviation_on_safe(commutator(closed.d, closed.d_bar), zero_op(space), self.cfg.margin),
            ),
            ALGEBRA_TOL,
        )

        first, second = 0.2, CONJUGATION_EPSILON
        composed = redress(dressed_ops_closed(space, S.with_epsilon(first))[0], second)
        direct = dressed_ops_closed(space, S.with_epsilon(first + second))[0]
        suite.below(
            "composition",
            max(
                max_deviation_on_safe(composed.d, direct.d, 0),
                max_deviation_on_safe(composed.d_bar, direct.d_bar, 0),
            ),
            ALGEBRA_TOL,
            f"eps={first!r}+{second!r}",
        )
        return suite

    def vacuum_suite(self) -> Suite:
        suite = Suite("vacuum")
        for m in self.cfg.momenta:
            S = momentum_squeeze(m)
            tag = f"{m.label}"
            space = pair_space(S, self.cfg.residual_cutoff(m.epsilon))
            vp = epsilon_vacuum(space, S, self.tol)
            leak = vp.truncation.boundary_norm

            suite.below("annihilation_residual", vp.annihilation_residual, self.tol, tag, leak)
            suite.below("norm_preserved", abs(vp.dressed.norm() - 1.0), self.tol, tag, leak)
            suite.below(
                "normalization_z",
                abs(normalization_constant(S) - math.cosh(m.epsilon) ** 2),
                ALGEBRA_TOL,
                tag,
            )
            suite.below(
                "minkowski_overlap",
                abs(minkowski_overlap(vp) - 1.0 / normalization_constant(S)),
                self.tol,
                tag,
                leak,
            )
            suite.numeric(
                "reconstruction_infidelity",
                lambda: 1.0 - reconstruct_minkowski(vp, self.tol)[1],
                self.tol,
                tag,
                leak,
            )
            omega = {m.label: m.omega}
            # relative to omega: H_eps scales with the frequency
            suite.numeric(
                "hamiltonian_annihilates",
                lambda: thermo.hamiltonian_eps(space, S, omega).apply(vp.dressed).norm() / m.omega,
                self.tol,
                tag,
                leak,
            )
        return suite

    def _thermo_row(self, point) -> Dict[str, Any]:
        return {
            "beta": point.beta,
            "omega": point.omega,
            "epsilon_star": point.epsilon_star,
            "sinh2_star": point.sinh2_star,
            "bose_einstein": point.bose_einstein,
            "deviation": point.deviation,
            "tolerance": self.tol,
            "pass": bool(point.deviation <= self.tol),
            "leak": 0.0,
        }

    def thermo_suite(self) -> Suite:
        suite = Suite("thermo")
        points = thermo.thermal_scan(self.cfg.beta_grid.points(), self.cfg.omega_grid.points(), self.max_workers)
        suite.data = [self._thermo_row(p) for p in points]
        suite.below("bose_einstein_stationarity", max(p.deviation for p in points), self.tol, f"{len(points)} points")

        number_deviation = 0.0
        for p in points:
            S = SqueezeSet.single(p.epsilon_star)
            space = pair_space(S, 2)
            dressed = dressed_ops_closed(space, S)[0]
            occupied = expectation(dressed.number(), minkowski_vacuum(space)).real
            number_deviation = max(number_deviation, abs(occupied - p.bose_einstein))
        suite.below("dressed_number_stationary", number_deviation, NUMBER_TOL)

        beta = self.cfg.beta_grid.points()[0]
        for m in self.cfg.momenta:
            tp = ThermoParams(beta=beta, omega=m.omega)
            suite.numeric(
                "free_energy_paths",
                lambda: abs(thermo.free_energy_operator(m.epsilon, tp) - thermo.free_energy_closed(m.epsilon, tp)),
                self.tol,
                f"{m.label}",
            )

        for eps in self.cfg.epsilon_grid.points():
            tag = f"eps={eps!r}"
            S = SqueezeSet.single(eps)
            small = pair_space(S, 2)
            operator_value = expectation(thermo.entropy_operator(small, S, Sector.PLUS), minkowski_vacuum(small)).real
            vp = single_pair_vacuum(eps, plan_residual_cutoff(eps, self.tol), self.tol)
            reduced_value = entanglement.sector_entanglement_entropy(vp, self.tol)
            closed_value = thermo.entropy_closed(eps)
            suite.below(
                "entropy_triple",
                max(
                    abs(operator_value - reduced_value),
                    abs(operator_value - closed_value),
                    abs(reduced_value - closed_value),
                ),
                ENTROPY_TOL,
                tag,
                vp.truncation.boundary_norm,
            )

        eps = self.cfg.momenta[0].epsilon
        S = SqueezeSet.single(eps)
        space = pair_space(S, CONJUGATION_CUTOFF)
        total = thermo.total_entropy_operator(space, S)
        depth = dict(margin=CONJUGATION_DEPTH, max_occupation=CONJUGATION_DEPTH)
        conjugated, report = dressed_ops_conjugated(space, S, total, self.tol * INNER_TOL_FACTOR, **depth)
        suite.below(
            "entropy_conjugation_invariance",
            max_deviation_on_safe(conjugated, total, modes=S.modes(), **depth),
            self.tol,
            f"eps={eps!r}",
            report.boundary_norm,
        )
        return suite

    def _entangle_rows(self, eps: float) -> Tuple[List[Dict[str, Any]], float]:
        S = SqueezeSet.single(eps)
        vp = single_pair_vacuum(eps, plan_residual_cutoff(eps, self.tol), self.tol)
        analytic = entanglement.wn_analytic(S, WN_ROWS)
        empirical = entanglement.wn_from_state(vp, self.tol)
        t2 = math.tanh(eps) ** 2
        rows = []
        for n in range(WN_ROWS + 1):
            w_analytic = analytic.aggregated_weight(n)
            w_empirical = empirical.aggregated_weight(n)
            deviation = abs(w_analytic - w_empirical)
            rows.append({
                "epsilon": eps,
                "n": n,
                "w_analytic": w_analytic,
                "w_empirical": w_empirical,
                "partial_sum": analytic.partial_sum(n),
                "partial_sum_closed": 1.0 - t2 ** (n + 1),
                "deviation": deviation,
                "tolerance": self.tol,
                "pass": bool(deviation <= self.tol),
                "leak": vp.truncation.boundary_norm,
            })
        return rows, empirical.off_diagonal_weight

    def entangle_suite(self) -> Suite:
        suite = Suite("entangle")
        epsilons = self.cfg.epsilon_grid.points()
        with ThreadPoolExecutor(max_workers=self.max_workers) as pool:
            per_epsilon = list(pool.map(self._entangle_rows, epsilons))

        for eps, (rows, off_diagonal) in zip(epsilons, per_epsilon):
            tag = f"eps={eps!r}"
            suite.data.extend(rows)
            t2 = math.tanh(eps) ** 2
            weights = [r["w_analytic"] for r in rows]
            suite.below(
                "partial_sums",
                max(abs(r["partial_sum"] - r["partial_sum_closed"]) for r in rows),
                WN_SUM_TOL,
                tag,
            )
            suite.below(
                "geometric_ratio",
                max(abs(b / a - t2) for a, b in zip(weights, weights[1:])),
                WN_SUM_TOL,
                tag,
            )
            suite.holds("monotone_decreasing", all(b < a for a, b in zip(weights, weights[1:])), tag)
            suite.below("empirical_vs_analytic", max(r["deviation"] for r in rows), self.tol, tag, rows[0]["leak"])
            suite.below("off_diagonal_weight", off_diagonal, self.tol, tag)

        for m in self.cfg.momenta:
            tag = f"{m.label}"
            S = momentum_squeeze(m)
            vp = epsilon_vacuum(pair_space(S, self.cfg.residual_cutoff(m.epsilon)), S, self.tol)
            leak = vp.truncation.boundary_norm
            suite.below("bell_infidelity", 1.0 - entanglement.bell_structure_check(vp, self.tol), self.tol, tag, leak)

            ground = entanglement.expansion_term(vp, 0, self.tol)
            excited = entanglement.expansion_term(vp, 1, self.tol)
            suite.below("ground_amplitude", abs(ground.amplitude - 1.0 / normalization_constant(S)), self.tol, tag, leak)
            ratio = excited.profile.get((1, 0), 0.0) / ground.profile[(0, 0)]
            suite.below("pair_amplitude_ratio", abs(ratio - math.tanh(m.epsilon)), self.tol, tag, leak)
            suite.below(
                "sector_entropy",
                abs(entanglement.sector_entanglement_entropy(vp, self.tol) - 2.0 * thermo.entropy_closed(m.epsilon)),
                ENTROPY_TOL,
                tag,
                leak,
            )
        return suite

    def overlap_suite(self) -> Suite:
        suite = Suite("overlap")
        oc = self.cfg.overlap
        overlaps = overlap_vacua(oc.epsilon, oc.epsilon_prime, oc.n_pairs_max, tol=OVERLAP_TOL * 1e-2)
        base = 1.0 / math.cosh(oc.epsilon - oc.epsilon_prime)
        previous = 1.0
        for k, value in enumerate(overlaps, start=1):
            predicted = base ** k
            deviation = abs(value - predicted)
            suite.data.append({
                "n_pairs": k,
                "overlap": value,
                "predicted": predicted,
                "ratio": value / previous,
                "deviation": deviation,
                "tolerance": OVERLAP_TOL,
                "pass": bool(deviation <= OVERLAP_TOL),
                "leak": 0.0,
            })
            previous = value
        tag = f"eps={oc.epsilon!r},eps'={oc.epsilon_prime!r}"
        suite.below("power_law", max(r["deviation"] for r in suite.data), OVERLAP_TOL, tag)
        if len(overlaps) > 1:
            suite.below("log_slope", abs(fit_log_slope(overlaps) - math.log(base)), SLOPE_TOL, tag)

        cutoff = plan_residual_cutoff(BRUTE_FORCE_EPSILON, self.tol)
        explicit = overlap_brute_force(BRUTE_FORCE_EPSILON, 0.0, BRUTE_FORCE_PAIRS, cutoff, self.tol)
        factorised = overlap_vacua(BRUTE_FORCE_EPSILON, 0.0, BRUTE_FORCE_PAIRS, cutoff, self.tol)[-1]
        suite.below("factorisation", abs(explicit - factorised), self.tol, f"{BRUTE_FORCE_PAIRS} pairs")
        return suite

    # ------------------------------------------------------------- experiments

    def _record(self, name: str, rows: List[Dict[str, Any]], checks: List[InvariantCheck]) -> ReportRecord:
        config = self.cfg.model_dump(mode="json")
        config["planned_cutoff"] = self.cfg.planned_cutoff
        return ReportRecord(
            experiment=name,
            config=config,
            columns=ROW_SCHEMAS.get(name, CHECK_COLUMNS),
            rows=rows,
            invariants=checks,
        )

    def run(self, name: str) -> ReportRecord:
        if name not in EXPERIMENTS:
            raise FockValidationError(f"Unknown experiment {name!r}; choose from {list(EXPERIMENTS)}")
        self.cfg.check_entropy_guard(name)
        logger.info(f"Running {name} at tolerance {self.tol:g}")
        start = time.perf_counter()

        checks_only = {
            "algebra-check": [self.algebra_suite],
            "bogoliubov-check": [self.bogoliubov_suite],
            "vacuum-check": [self.vacuum_suite],
            "verify-all": [
                self.algebra_suite,
                self.bogoliubov_suite,
                self.vacuum_suite,
                self.thermo_suite,
                self.entangle_suite,
                self.overlap_suite,
            ],
        }
        with_data = {
            "thermo-scan": self.thermo_suite,
            "entangle-report": self.entangle_suite,
            "overlap-scaling": self.overlap_suite,
        }
        if name in checks_only:
            suites = [build() for build in checks_only[name]]
            rows = [row for s in suites for row in s.rows]
            checks = [check for s in suites for check in s.checks]
        else:
            suite = with_data[name]()
            rows, checks = suite.data, suite.checks

        record = self._record(name, rows, checks)
        record.duration_seconds = time.perf_counter() - start
        failed = record.failures()
        if failed:
            logger.error(f"{name}: {len(failed)} invariant(s) failed: {', '.join(failed)}")
        else:
            logger.info(f"{name}: all {len(checks)} invariants hold ({record.duration_seconds:.1f}s)")
        return record


def run_experiment(name: str, cfg: RunConfig, max_workers: Optional[int] = None) -> ReportRecord:
    return ExperimentRunner(cfg, max_workers).run(name)
