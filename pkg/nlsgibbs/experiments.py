"""
Sweep studies comparing the quantum Gibbs state with its classical limit.

Every check is a finite trend over a tau (or coupling, or order) sweep: the
report carries each estimate with its standard error, the trend summary and
an inconclusive flag whenever the classical uncertainty is too large to
resolve the smallest quantum-classical gap.
"""

import logging
import math
import time
from concurrent.futures import Executor
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from nlsgibbs.classical.cutoff import CutoffFunction
from nlsgibbs.classical.energy import free_energies, interaction_energies, masses
from nlsgibbs.classical.ensemble import (
    GibbsEnsemble,
    build_ensemble,
    correlation_gamma_p,
)
from nlsgibbs.classical.observables import kernel_norm, theta_values
from nlsgibbs.classical.oracle import density_oracle_constant_w
from nlsgibbs.classical.series import (
    below_bound,
    partial_sum_error,
    series_bound,
    series_coefficients,
    series_partial_sum,
    unexpanded_numerator,
)
from nlsgibbs.config import ScenarioConfig
from nlsgibbs.exceptions import BlowUpError, DomainError, PotentialError
from nlsgibbs.flow import FlowConfig, evolve_batch
from nlsgibbs.fock.basis import FockBasis, build_basis
from nlsgibbs.fock.duhamel import DuhamelExpansion
from nlsgibbs.fock.operators import OperatorKind, build_operator
from nlsgibbs.fock.thermal import (
    ThermalDecomposition,
    ThermalState,
    decompose,
    gamma_tau_p,
    heisenberg_evolve,
    partition_functions,
)
from nlsgibbs.free_field import FreeFieldEnsemble
from nlsgibbs.models import Estimate, ExperimentReport, SweepKind
from nlsgibbs.potentials import (
    Constant,
    ExactDelta,
    Potential,
    build_delta_approx,
    clip_L1,
    get_profile,
)
from nlsgibbs.utils.stats import loglog_slope, ratio_estimate, trace_norm

logger = logging.getLogger(__name__)

DEFAULT_EPSILON_EXPONENT = 0.25
INVARIANCE_THRESHOLD = 3.0
# differences below this fraction of |Q(0)| are treated as round-off
ROUNDOFF = 1e-10
EVOLVE_ROWS = 1024

Factor = Tuple[np.ndarray, int, float]


def epsilon_schedule(tau: float, exponent: float = DEFAULT_EPSILON_EXPONENT) -> float:
    """
    Regularization scale eps_tau = tau^(-exponent), capped at 1.

    Raises:
        DomainError: If tau <= 0 or exponent <= 0

    Examples:
        >>> epsilon_schedule(16.0)
        0.5
        >>> epsilon_schedule(256.0)
        0.25
    """
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau}")
    if not exponent > 0:
        raise DomainError(f"schedule exponent must be positive, got {exponent}")
    return min(1.0, tau ** (-exponent))


def regularize_potential(
    w: Potential, tau: float, exponent: float = DEFAULT_EPSILON_EXPONENT
) -> Tuple[Potential, Optional[float]]:
    """
    Bounded stand-in for w used by the quantum build at tau.

    The focusing delta becomes a triangle delta approximation and other
    unbounded potentials are clipped at height 1/eps_tau. Bounded potentials
    are returned unchanged with eps = None.
    """
    if w.is_bounded:
        return w, None
    epsilon = epsilon_schedule(tau, exponent)
    if isinstance(w, ExactDelta):
        if w.sign != -1:
            raise PotentialError("only the focusing delta has a delta approximation")
        return build_delta_approx(get_profile("triangle"), epsilon), epsilon
    return clip_L1(w, epsilon), epsilon


def trend_summary(
    values: Sequence[float], sweep: Optional[Sequence[float]] = None
) -> Dict[str, Any]:
    """
    Monotonicity, last-to-first ratio and log-log slope of a sweep series.

    Examples:
        >>> trend_summary([4.0, 2.0, 1.0], [1.0, 2.0, 4.0])["decreasing"]
        True
    """
    series = [float(v) for v in values]
    decreasing = len(series) > 1 and all(b < a for a, b in zip(series, series[1:]))
    ratio = series[-1] / series[0] if len(series) > 1 and series[0] else math.nan
    slope = loglog_slope(sweep, series) if sweep is not None else math.nan
    return {
        "decreasing": bool(decreasing),
        "ratio": None if math.isnan(ratio) else ratio,
        "slope": None if math.isnan(slope) else slope,
    }


def _new_report(
    name: str, kind: SweepKind, config: ScenarioConfig, values: Sequence[float]
) -> ExperimentReport:
    return ExperimentReport(
        name=name,
        sweep_kind=kind,
        scenario=config.scenario_dict(),
        config_hash=config.config_hash,
        sweep_values=[float(v) for v in values],
    )


def _flag_if_unresolved(
    report: ExperimentReport, metric: str, gaps: Sequence[float], std_error: float
) -> None:
    if gaps and std_error > 0.5 * min(gaps):
        report.flag(
            f"inconclusive {metric}: classical SE {std_error:.3g} exceeds half "
            f"the smallest gap {min(gaps):.3g}"
        )


def _classical_ensemble(
    config: ScenarioConfig, executor: Optional[Executor]
) -> GibbsEnsemble:
    started = time.perf_counter()
    ensemble = build_ensemble(
        config.mode_set,
        config.kappa,
        config.build_potential(),
        config.build_cutoff(),
        config.sampler.n_samples,
        config.rng(0),
        config.sampler.chunk_size,
        executor,
    )
    ensemble.meta["runtime_s"] = time.perf_counter() - started
    return ensemble


def quantum_model(
    config: ScenarioConfig,
    tau: float,
    w: Potential,
    executor: Optional[Executor] = None,
) -> Tuple[FockBasis, ThermalDecomposition]:
    """Basis with n_max from the config policy and the decomposed H_tau."""
    basis = build_basis(config.mode_set, config.n_max(tau), config.fock.size_limit)
    h0 = build_operator(OperatorKind.H0, basis, config.kappa, tau)
    interaction = None
    if not w.is_zero:
        interaction = build_operator(
            OperatorKind.W_TAU, basis, config.kappa, tau, w
        )
    return basis, decompose(h0, config.kappa, interaction, executor=executor)


def convergence_study_tau(
    config: ScenarioConfig,
    taus: Optional[Sequence[float]] = None,
    executor: Optional[Executor] = None,
) -> ExperimentReport:
    """
    e_Z(tau) = |Z_tau / Z_tau0 - z| and e_gamma(tau) = ||gamma_tau1 - gamma_1||_tr.

    The classical reference z, gamma_1 is a Monte Carlo estimate on the same
    truncated model; unbounded potentials are regularized at eps_tau before
    each quantum build.

    Args:
        config: Scenario
        taus: Sweep values (default: the configured sweep)
        executor: Optional pool for sampling and block diagonalization

    Returns:
        ExperimentReport with metrics e_Z, e_gamma, Z_rel and n_max per tau
    """
    taus = list(taus if taus is not None else config.sweep.values)
    report = _new_report("convergence", SweepKind.TAU, config, taus)
    w = config.build_potential()
    f = config.build_cutoff()

    ensemble = _classical_ensemble(config, executor)
    z_hat = ensemble.partition_function()
    gamma_hat = correlation_gamma_p(ensemble, 1)
    d = config.mode_set.d
    gamma_se = float(np.sqrt(d) * np.linalg.norm(gamma_hat.std_error))
    report.timings["classical"] = ensemble.meta["runtime_s"]
    report.metrics["z_classical"] = z_hat.to_dict()
    report.metrics["gamma_trace_norm_se"] = gamma_se
    logger.info("classical z = %.6g +- %.2g", z_hat.value, z_hat.std_error)

    e_z: List[float] = []
    e_gamma: List[float] = []
    schedule: Dict[str, Optional[float]] = {}
    for tau in taus:
        started = time.perf_counter()
        w_tau, epsilon = regularize_potential(
            w, tau, config.sweep.epsilon_exponent
        )
        schedule[f"{tau:g}"] = epsilon
        basis, decomposition = quantum_model(config, tau, w_tau, executor)
        relative = partition_functions(decomposition, f, tau).relative
        gamma = gamma_tau_p(decomposition, f, tau, 1)
        elapsed = time.perf_counter() - started
        e_z.append(abs(relative - float(z_hat.value)))
        e_gamma.append(trace_norm(gamma - gamma_hat.matrix))
        report.add_point(tau, "Z_rel", relative, 0.0, elapsed)
        report.add_point(tau, "e_Z", e_z[-1], z_hat.std_error, elapsed)
        report.add_point(tau, "e_gamma", e_gamma[-1], gamma_se, elapsed)
        report.add_point(tau, "n_max", basis.n_max)
        report.add_point(tau, "basis_size", basis.size)
        report.timings[f"tau={tau:g}"] = elapsed
        logger.info(
            "tau=%g: n_max=%d, size=%d, e_Z=%.3g, e_gamma=%.3g",
            tau,
            basis.n_max,
            basis.size,
            e_z[-1],
            e_gamma[-1],
        )

    report.metrics["epsilon_schedule"] = {
        "exponent": config.sweep.epsilon_exponent,
        "values": schedule,
    }
    report.metrics["e_Z_trend"] = trend_summary(e_z, taus)
    report.metrics["e_gamma_trend"] = trend_summary(e_gamma, taus)
    _flag_if_unresolved(report, "e_Z", e_z, z_hat.std_error)
    _flag_if_unresolved(report, "e_gamma", e_gamma, gamma_se)
    return report


def _require_galerkin(config: FlowConfig) -> None:
    if not config.galerkin:
        raise DomainError("time correlations need the Galerkin flow")


def _evolve_rows(
    coeffs: np.ndarray,
    t: float,
    config: FlowConfig,
    k_max: int,
    executor: Optional[Executor] = None,
) -> np.ndarray:
    """Evolve the rows of a coefficient array, in parallel batches."""
    if t == 0.0 or coeffs.shape[0] == 0:
        return coeffs.copy()
    starts = range(0, coeffs.shape[0], EVOLVE_ROWS)

    def run(start: int) -> np.ndarray:
        return evolve_batch(coeffs[start : start + EVOLVE_ROWS], t, config, k_max)

    try:
        if executor is None:
            parts = [run(start) for start in starts]
        else:
            parts = list(executor.map(run, starts))
    except BlowUpError as e:
        logger.error("flow blew up at t=%s on a weighted sample; aborting", e.last_time)
        raise
    return np.concatenate(parts, axis=0)


def classical_time_correlation(
    ensemble: GibbsEnsemble,
    factors: Sequence[Factor],
    flow_config: FlowConfig,
    executor: Optional[Executor] = None,
) -> Estimate:
    """
    rho(Theta(xi_1) o S_{t_1} ... Theta(xi_m) o S_{t_m}) from weighted samples.

    Only samples with positive weight are evolved; each distinct time is
    computed once.

    Args:
        ensemble: Gibbs ensemble built with the flow's potential
        factors: (xi, p, t) per factor
        flow_config: Galerkin flow settings
        executor: Optional pool for batched evolution

    Raises:
        DomainError: If the flow is not in Galerkin mode
        BlowUpError: If any weighted trajectory becomes non-finite
    """
    _require_galerkin(flow_config)
    if not factors:
        raise ValueError("at least one factor is required")
    k_max = ensemble.mode_set.k_max
    support = ensemble.weights > 0
    active = ensemble.coeffs[support]
    evolved: Dict[float, np.ndarray] = {}
    product = np.ones(active.shape[0], dtype=complex)
    for xi, p, t in factors:
        if t not in evolved:
            evolved[t] = _evolve_rows(active, t, flow_config, k_max, executor)
        product = product * theta_values(evolved[t], xi, p)
    values = np.zeros(ensemble.n_samples, dtype=complex)
    values[support] = product
    if np.all(values.imag == 0.0):
        values = values.real
    return ratio_estimate(values, ensemble.weights)


def quantum_time_correlation(
    decomposition: ThermalDecomposition,
    factors: Sequence[Factor],
    f: CutoffFunction,
    tau: float,
) -> complex:
    """
    rho_tau(Psi^{t_1}(Theta_tau(xi_1)) ... Psi^{t_m}(Theta_tau(xi_m))).

    Raises:
        TruncationError: If the cutoff does not vanish beyond the basis
    """
    if not factors:
        raise ValueError("at least one factor is required")
    basis = decomposition.basis
    product = None
    for xi, p, t in factors:
        op = build_operator(
            OperatorKind.THETA, basis, decomposition.kappa, tau, xi=xi, p=p
        )
        op = heisenberg_evolve(op, decomposition, t, tau)
        product = op if product is None else product @ op
    assert product is not None
    return ThermalState(decomposition, f, tau).expectation(product)


def _invariance_observables(
    coeffs: np.ndarray, config: ScenarioConfig, w: Potential
) -> Dict[str, np.ndarray]:
    k_max = config.k_max
    values = {
        f"gamma[{k},{k}]": np.abs(coeffs[:, i]) ** 2
        for i, k in enumerate(config.mode_set.modes)
    }
    mass = masses(coeffs)
    values["N"] = mass
    values["N^2"] = mass**2
    values["W"] = interaction_energies(coeffs, w, k_max)
    return values


def invariance_test(
    config: ScenarioConfig,
    times: Optional[Sequence[float]] = None,
    executor: Optional[Executor] = None,
) -> ExperimentReport:
    """
    |Q(t) - Q(0)| / SE for gamma_1 diagonal entries, N, N^2 and W.

    The truncated Gibbs density is a function of the truncated Hamiltonian and
    mass, both conserved by the Galerkin flow, so every ratio should stay
    below 3 up to integrator drift. SE is the paired (same-sample) error of
    the difference.

    Raises:
        DomainError: If the configured flow is not in Galerkin mode
    """
    times = list(times if times is not None else [config.flow.t])
    report = _new_report("invariance", SweepKind.TIME, config, times)
    w = config.build_potential()
    flow_config = config.flow_config(w)
    _require_galerkin(flow_config)
    ensemble = _classical_ensemble(config, executor)
    report.timings["classical"] = ensemble.meta["runtime_s"]
    weights = ensemble.weights
    support = weights > 0
    k_max = config.k_max

    def observables(coeffs: np.ndarray) -> Dict[str, np.ndarray]:
        return _invariance_observables(_scatter(coeffs, support), config, w)

    def energy(coeffs: np.ndarray, interaction: np.ndarray) -> np.ndarray:
        free = free_energies(_scatter(coeffs, support), config.kappa, k_max)
        return free + interaction

    start = ensemble.coeffs[support]
    initial = observables(start)
    initial_energy = energy(start, initial["W"])
    reference = {name: ratio_estimate(v, weights) for name, v in initial.items()}

    ratios: Dict[str, float] = {}
    drifts: List[float] = []
    for t in times:
        started = time.perf_counter()
        evolved = _evolve_rows(start, t, flow_config, k_max, executor)
        current = observables(evolved)
        elapsed = time.perf_counter() - started
        for name, values in current.items():
            change = ratio_estimate(values - initial[name], weights)
            gap = abs(change.value)
            if gap <= ROUNDOFF * (abs(reference[name].value) + 1.0):
                ratio = 0.0
            elif change.std_error > 0:
                ratio = gap / change.std_error
            else:
                ratio = math.inf
            ratios[f"{name}@{t:g}"] = ratio
            report.add_point(t, f"delta:{name}", gap, change.std_error, elapsed)
            report.add_point(t, f"ratio:{name}", ratio)
        final_energy = energy(evolved, current["W"])
        drift = ratio_estimate(np.abs(final_energy - initial_energy), weights)
        drifts.append(float(drift.value))
        report.add_point(t, "energy_drift", drift.value, drift.std_error, elapsed)
        report.timings[f"t={t:g}"] = elapsed
        logger.info("invariance t=%g: max ratio %.3g", t, max(ratios.values()))

    max_ratio = max(ratios.values()) if ratios else 0.0
    report.metrics["ratios"] = ratios
    report.metrics["max_ratio"] = max_ratio
    report.metrics["passed"] = bool(max_ratio <= INVARIANCE_THRESHOLD)
    w_se = reference["W"].std_error
    if drifts and max(drifts) > w_se:
        report.flag(
            f"integrator energy drift {max(drifts):.3g} exceeds the SE {w_se:.3g} "
            "of W; refine dt"
        )
    return report


def _scatter(rows: np.ndarray, support: np.ndarray) -> np.ndarray:
    """Place rows of the weighted samples back at their ensemble positions."""
    full = np.zeros((support.size, rows.shape[1]), dtype=complex)
    full[support] = rows
    return full


def series_study(
    config: ScenarioConfig,
    taus: Optional[Sequence[float]] = None,
    executor: Optional[Executor] = None,
) -> ExperimentReport:
    """
    Classical a_m and quantum a_{tau,m} with their bounds.

    Checks that classical coefficients lie below the bound within 3 SE, that
    quantum coefficients lie below it, that |a_{tau,m} - a_m| decreases over
    the tau sweep, and that the classical partial sum reproduces the
    unexpanded numerator within 4 SE.
    """
    taus = list(taus if taus is not None else config.sweep.values)
    orders = sorted(set(config.series.orders))
    report = _new_report("series", SweepKind.ORDER, config, orders)
    w = config.build_potential()
    f = config.build_cutoff()
    xi, p = config.kernel()
    xi_norm = kernel_norm(xi)
    w_sup = w.sup_norm()
    radius = f.radius

    started = time.perf_counter()
    free = FreeFieldEnsemble.sample(
        config.mode_set,
        config.kappa,
        config.rng(1),
        config.sampler.n_samples,
        config.sampler.chunk_size,
        executor,
    )
    classical = dict(zip(orders, series_coefficients(free, xi, p, w, f, orders)))
    report.timings["classical"] = time.perf_counter() - started
    within = True
    for m, estimate in classical.items():
        bound = series_bound(radius, p, xi_norm, w_sup, m)
        within = within and below_bound(estimate, bound)
        report.add_point(m, "a_m", float(np.real(estimate.value)), estimate.std_error)
        report.add_point(m, "bound", bound)
    report.metrics["classical_within_bound"] = bool(within)

    contiguous = orders == list(range(len(orders)))
    if contiguous:
        zeta = config.series.zeta
        sequence = [classical[m] for m in orders]
        partial = series_partial_sum(sequence, zeta)
        numerator = unexpanded_numerator(free, xi, p, w, f, zeta)
        spread = math.hypot(partial_sum_error(sequence, zeta), numerator.std_error)
        deviation = abs(partial - numerator.value) / spread if spread else math.inf
        report.metrics["partial_sum"] = {
            "zeta": zeta,
            "order": orders[-1],
            "partial_sum": float(np.real(partial)),
            "numerator": numerator.to_dict(),
            "deviation_sigma": deviation,
            "agrees": bool(deviation <= 4.0),
        }

    quantum_within = True
    gaps: Dict[int, List[float]] = {m: [] for m in config.series.quantum_orders}
    for tau in taus:
        started = time.perf_counter()
        w_tau, _ = regularize_potential(w, tau, config.sweep.epsilon_exponent)
        basis = build_basis(config.mode_set, config.n_max(tau), config.fock.size_limit)
        expansion = DuhamelExpansion(basis, config.kappa, tau, w_tau, f, xi, p)
        for m in config.series.quantum_orders:
            value = expansion.coefficient(m, config.fock.quadrature_order)
            bound = expansion.bound(m)
            quantum_within = quantum_within and abs(value) <= bound
            elapsed = time.perf_counter() - started
            report.add_point(m, f"a_tau_m[tau={tau:g}]", value, 0.0, elapsed)
            if m in classical:
                gap = abs(value - float(np.real(classical[m].value)))
                gaps[m].append(gap)
                report.add_point(m, f"gap[tau={tau:g}]", gap, classical[m].std_error)
        report.timings[f"tau={tau:g}"] = time.perf_counter() - started
    report.metrics["quantum_within_bound"] = bool(quantum_within)
    report.metrics["gap_trends"] = {
        str(m): trend_summary(values, taus) for m, values in gaps.items() if values
    }
    for m, values in gaps.items():
        if m in classical:
            _flag_if_unresolved(report, f"gap m={m}", values, classical[m].std_error)
    return report


def partition_two_route(
    config: ScenarioConfig,
    couplings: Optional[Sequence[float]] = None,
    executor: Optional[Executor] = None,
) -> ExperimentReport:
    """
    Monte Carlo z against the hypoexponential density oracle for w = c.

    Every coupling reuses the same free samples, so the comparison is paired
    across c.
    """
    couplings = list(couplings if couplings is not None else config.oracle.couplings)
    report = _new_report("partition-oracle", SweepKind.COUPLING, config, couplings)
    f = config.build_cutoff()
    deviations: List[float] = []
    for c in couplings:
        started = time.perf_counter()
        ensemble = build_ensemble(
            config.mode_set,
            config.kappa,
            Constant(c),
            f,
            config.sampler.n_samples,
            config.rng(0),
            config.sampler.chunk_size,
            executor,
        )
        z = ensemble.partition_function()
        oracle = density_oracle_constant_w(c, f, config.mode_set, config.kappa)
        elapsed = time.perf_counter() - started
        deviations.append(z.deviation(oracle))
        report.add_point(c, "z_mc", float(z.value), z.std_error, elapsed)
        report.add_point(c, "z_oracle", oracle)
        report.add_point(c, "deviation_sigma", deviations[-1])
        logger.info(
            "c=%g: z=%.6g +- %.2g, oracle %.6g", c, z.value, z.std_error, oracle
        )
    report.metrics["agree"] = bool(all(d <= 4.0 for d in deviations))
    return report


def time_correlation_study(
    config: ScenarioConfig,
    taus: Optional[Sequence[float]] = None,
    t: Optional[float] = None,
    executor: Optional[Executor] = None,
) -> ExperimentReport:
    """
    |rho_tau(Theta_tau(xi) Psi^t(Theta_tau(xi))) - rho(Theta(xi) Theta(xi) o S_t)|.

    The classical value uses the Galerkin flow of the configured potential;
    each quantum build uses the potential regularized at eps_tau.
    """
    taus = list(taus if taus is not None else config.sweep.values)
    t = config.flow.t if t is None else t
    report = _new_report("time-correlation", SweepKind.TAU, config, taus)
    w = config.build_potential()
    f = config.build_cutoff()
    xi, p = config.kernel()
    factors: List[Factor] = [(xi, p, 0.0), (xi, p, t)]

    ensemble = _classical_ensemble(config, executor)
    started = time.perf_counter()
    classical = classical_time_correlation(
        ensemble, factors, config.flow_config(w), executor
    )
    report.timings["classical"] = ensemble.meta["runtime_s"] + (
        time.perf_counter() - started
    )
    report.metrics["classical"] = classical.to_dict()
    report.metrics["t"] = t

    gaps: List[float] = []
    for tau in taus:
        started = time.perf_counter()
        w_tau, _ = regularize_potential(w, tau, config.sweep.epsilon_exponent)
        _, decomposition = quantum_model(config, tau, w_tau, executor)
        value = quantum_time_correlation(decomposition, factors, f, tau)
        elapsed = time.perf_counter() - started
        gaps.append(abs(value - classical.value))
        report.add_point(tau, "quantum_real", value.real, 0.0, elapsed)
        report.add_point(tau, "quantum_imag", value.imag, 0.0, elapsed)
        report.add_point(tau, "gap", gaps[-1], classical.std_error, elapsed)
        report.timings[f"tau={tau:g}"] = elapsed
    report.metrics["gap_trend"] = trend_summary(gaps, taus)
    _flag_if_unresolved(report, "gap", gaps, classical.std_error)
    return report
