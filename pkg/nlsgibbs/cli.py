"""Command-line interface for nlsgibbs experiments."""

import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import click
import numpy as np

from nlsgibbs import __version__
from nlsgibbs.classical.ensemble import build_ensemble, correlation_gamma_p
from nlsgibbs.classical.tail import tail_moment_check
from nlsgibbs.config import (
    ScenarioConfig,
    load_config,
    output_directory,
    write_config,
)
from nlsgibbs.exceptions import NLSGibbsError, SizeError, ValidationError
from nlsgibbs.experiments import (
    convergence_study_tau,
    invariance_test,
    partition_two_route,
    quantum_model,
    regularize_potential,
    series_study,
    time_correlation_study,
)
from nlsgibbs.flow import evolve_trajectory
from nlsgibbs.fock.operators import OperatorKind, build_operator, dump_operator
from nlsgibbs.fock.thermal import gamma_tau_p, partition_functions
from nlsgibbs.free_field import sample_free_field
from nlsgibbs.models import ExperimentReport, SweepKind
from nlsgibbs.spectral import field_from_dict
from nlsgibbs.utils.io import utc_now, write_ensemble, write_manifest, write_trajectory
from nlsgibbs.writers import get_writer

EXIT_ERROR = 1
EXIT_INCONCLUSIVE = 2


@dataclass
class RunContext:
    """State shared by one subcommand run."""

    command: str
    config: ScenarioConfig
    directory: Path
    threads: int
    verbose: bool
    started_at: str = field(default_factory=utc_now)
    outputs: List[Path] = field(default_factory=list)
    durations: Dict[str, float] = field(default_factory=dict)
    executor: Optional[ThreadPoolExecutor] = None

    def echo(self, message: str) -> None:
        """Progress line, shown in verbose mode only."""
        if self.verbose:
            click.echo(message)

    def write_report(self, report: ExperimentReport) -> None:
        """Write a report in every configured format."""
        for name in self.config.output.formats:
            path = get_writer(name).write(report, self.directory)
            self.outputs.append(path)
            self.echo(f"Wrote {path}")


def common_options(func: Callable[..., Any]) -> Callable[..., Any]:
    """--config, --out, --seed, --threads and -v shared by every subcommand."""
    options = [
        click.option(
            "--config",
            "config_path",
            type=click.Path(exists=True, dir_okay=False, path_type=Path),
            help="Scenario JSON file (default: built-in scenario)",
        ),
        click.option(
            "--out",
            type=click.Path(file_okay=False, path_type=Path),
            help="Output directory (overrides NLSGIBBS_OUT and the config)",
        ),
        click.option("--seed", type=click.IntRange(min=0), help="Override the seed"),
        click.option(
            "--threads",
            type=click.IntRange(min=1),
            default=1,
            show_default=True,
            help="Worker threads for sampling and block diagonalization",
        ),
        click.option("-v", "--verbose", is_flag=True, help="Show progress output"),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def _execute(
    command: str,
    config_path: Optional[Path],
    out: Optional[Path],
    seed: Optional[int],
    threads: int,
    verbose: bool,
    body: Callable[[RunContext], List[ExperimentReport]],
) -> None:
    """
    Load the scenario, run a subcommand body and persist config and manifest.

    Exit status is 0 on success, 1 on any error and 2 when a report carries
    an inconclusive flag.
    """
    if verbose:
        logging.basicConfig(level=logging.INFO, format="%(name)s: %(message)s")
    try:
        config = load_config(config_path).with_overrides(seed=seed)
        directory = output_directory(config, out)
        ctx = RunContext(command, config, directory, threads, verbose)
        ctx.echo(f"Scenario {config.config_hash[:12]} -> {directory}")
        ctx.outputs.append(write_config(config, directory))
        started = time.perf_counter()
        if threads > 1:
            with ThreadPoolExecutor(max_workers=threads) as executor:
                ctx.executor = executor
                reports = body(ctx)
        else:
            reports = body(ctx)
        ctx.durations["total"] = time.perf_counter() - started
        for report in reports:
            ctx.durations.update(
                {f"{report.name}:{k}": v for k, v in report.timings.items()}
            )
        flags = [flag for report in reports for flag in report.flags]
        write_manifest(
            directory,
            command,
            config.config_hash,
            ctx.started_at,
            ctx.durations,
            ctx.outputs,
            status="inconclusive" if flags else "ok",
        )
    except ValidationError as e:
        click.echo("Error: invalid configuration", err=True)
        for message in e.errors:
            click.echo(f"  - {message}", err=True)
        sys.exit(EXIT_ERROR)
    except SizeError as e:
        click.echo(f"Error: resource limit: {e}", err=True)
        sys.exit(EXIT_ERROR)
    except NLSGibbsError as e:
        click.echo(f"Error: {type(e).__name__}: {e}", err=True)
        sys.exit(EXIT_ERROR)
    except Exception as e:
        click.echo(f"Unexpected error: {e}", err=True)
        if verbose:
            import traceback

            traceback.print_exc()
        sys.exit(EXIT_ERROR)

    for flag in flags:
        click.echo(f"Warning: {flag}", err=True)
    if flags:
        sys.exit(EXIT_INCONCLUSIVE)


def _default_tau(config: ScenarioConfig) -> float:
    if config.sweep.kind == "tau" and config.sweep.values:
        return float(config.sweep.values[0])
    return 1.0


@click.group()
@click.version_option(version=__version__, prog_name="nlsgibbs")
def cli() -> None:
    """Classical and quantum Gibbs states of the focusing NLS on the torus."""
    pass


@cli.command("sample-classical")
@common_options
def sample_classical(
    config_path: Optional[Path],
    out: Optional[Path],
    seed: Optional[int],
    threads: int,
    verbose: bool,
) -> None:
    """Build and store a weighted Gibbs ensemble; print z with its SE."""

    def body(ctx: RunContext) -> List[ExperimentReport]:
        config = ctx.config
        ctx.echo(f"Sampling {config.sampler.n_samples} fields, k_max={config.k_max}")
        ensemble = build_ensemble(
            config.mode_set,
            config.kappa,
            config.build_potential(),
            config.build_cutoff(),
            config.sampler.n_samples,
            config.rng(0),
            config.sampler.chunk_size,
            ctx.executor,
        )
        header = dict(ensemble.meta)
        header["config_hash"] = config.config_hash
        path = write_ensemble(
            ctx.directory / "ensemble.jsonl",
            config.mode_set,
            config.kappa,
            ensemble.coeffs,
            ensemble.weights,
            header,
        )
        ctx.outputs.append(path)
        z = ensemble.partition_function()
        click.echo(f"z = {z.value:.10g} +- {z.std_error:.3g}")
        report = ExperimentReport(
            "sample-classical",
            SweepKind.K_MAX,
            config.scenario_dict(),
            config.config_hash,
            [float(config.k_max)],
        )
        report.add_point(config.k_max, "z", z.value, z.std_error)
        ctx.write_report(report)
        return [report]

    _execute("sample-classical", config_path, out, seed, threads, verbose, body)


@cli.command("fock-partition")
@click.option("--tau", type=float, help="Mean-field parameter (default: first tau)")
@click.option(
    "--dump-operator",
    "dump",
    is_flag=True,
    help="Also write the interaction W_tau in the binary block layout",
)
@common_options
def fock_partition(
    tau: Optional[float],
    dump: bool,
    config_path: Optional[Path],
    out: Optional[Path],
    seed: Optional[int],
    threads: int,
    verbose: bool,
) -> None:
    """Print Z_tau, Z_tau0 and the relative partition function."""

    def body(ctx: RunContext) -> List[ExperimentReport]:
        config = ctx.config
        value = tau if tau is not None else _default_tau(config)
        w, epsilon = regularize_potential(
            config.build_potential(), value, config.sweep.epsilon_exponent
        )
        if epsilon is not None:
            ctx.echo(f"Regularized potential at eps_tau = {epsilon:g}")
        basis, decomposition = quantum_model(config, value, w, ctx.executor)
        ctx.echo(f"Basis n_max={basis.n_max}, {basis.size} states")
        result = partition_functions(decomposition, config.build_cutoff(), value)
        click.echo(f"Z_tau     = {result.z_tau:.12g}")
        click.echo(f"Z_tau0    = {result.z_tau0:.12g}")
        click.echo(f"Z_tau_rel = {result.relative:.12g}")
        if dump:
            op = build_operator(OperatorKind.W_TAU, basis, config.kappa, value, w)
            path = ctx.directory / f"wtau-{value:g}.bin"
            dump_operator(op, path)
            ctx.outputs.append(path)
        report = ExperimentReport(
            "fock-partition",
            SweepKind.TAU,
            config.scenario_dict(),
            config.config_hash,
            [value],
        )
        report.add_point(value, "log_Z_tau", result.log_z_tau)
        report.add_point(value, "log_Z_tau0", result.log_z_tau0)
        report.add_point(value, "Z_rel", result.relative)
        report.add_point(value, "n_max", basis.n_max)
        ctx.write_report(report)
        return [report]

    _execute("fock-partition", config_path, out, seed, threads, verbose, body)


@cli.command("correlations")
@click.option(
    "--side",
    type=click.Choice(["classical", "quantum"], case_sensitive=False),
    default="classical",
    show_default=True,
)
@click.option("--tau", type=float, help="Mean-field parameter for the quantum side")
@click.option("-p", "--order", "p", type=click.IntRange(1, 2), default=1)
@common_options
def correlations(
    side: str,
    tau: Optional[float],
    p: int,
    config_path: Optional[Path],
    out: Optional[Path],
    seed: Optional[int],
    threads: int,
    verbose: bool,
) -> None:
    """Correlation function gamma_p (classical estimate or quantum exact)."""

    def body(ctx: RunContext) -> List[ExperimentReport]:
        config = ctx.config
        report = ExperimentReport(
            f"correlations-{side.lower()}",
            SweepKind.TAU,
            config.scenario_dict(),
            config.config_hash,
        )
        if side.lower() == "classical":
            ensemble = build_ensemble(
                config.mode_set,
                config.kappa,
                config.build_potential(),
                config.build_cutoff(),
                config.sampler.n_samples,
                config.rng(0),
                config.sampler.chunk_size,
                ctx.executor,
            )
            estimate = correlation_gamma_p(ensemble, p)
            matrix, errors = estimate.matrix, estimate.std_error
            sweep = 0.0
        else:
            sweep = tau if tau is not None else _default_tau(config)
            w, _ = regularize_potential(
                config.build_potential(), sweep, config.sweep.epsilon_exponent
            )
            _, decomposition = quantum_model(config, sweep, w, ctx.executor)
            matrix = gamma_tau_p(decomposition, config.build_cutoff(), sweep, p)
            errors = np.zeros(matrix.shape)
        report.sweep_values.append(sweep)
        for (i, j), value in np.ndenumerate(matrix):
            report.add_point(sweep, f"re gamma[{i},{j}]", value.real, errors[i, j])
            report.add_point(sweep, f"im gamma[{i},{j}]", value.imag, errors[i, j])
        with np.printoptions(precision=6, suppress=True, linewidth=120):
            click.echo(np.array2string(matrix))
        ctx.write_report(report)
        return [report]

    _execute("correlations", config_path, out, seed, threads, verbose, body)


@cli.command("series")
@common_options
def series(
    config_path: Optional[Path],
    out: Optional[Path],
    seed: Optional[int],
    threads: int,
    verbose: bool,
) -> None:
    """Classical a_m and quantum a_tau_m with their bounds."""

    def body(ctx: RunContext) -> List[ExperimentReport]:
        report = series_study(ctx.config, executor=ctx.executor)
        for point in report.series("a_m"):
            click.echo(
                f"a_{point.sweep_value:g} = {point.estimate:.6g} +- "
                f"{point.std_error:.2g}"
            )
        metrics = report.metrics
        click.echo(f"classical within bound: {metrics['classical_within_bound']}")
        click.echo(f"quantum within bound:   {metrics['quantum_within_bound']}")
        ctx.write_report(report)
        return [report]

    _execute("series", config_path, out, seed, threads, verbose, body)


@cli.command("nls-evolve")
@click.option(
    "--field",
    "field_path",
    type=click.Path(exists=True, dir_okay=False, path_type=Path),
    help="Initial field JSON (default: one free-field sample)",
)
@click.option("--time", "t", type=float, help="Final time (default: flow.t)")
@common_options
def nls_evolve(
    field_path: Optional[Path],
    t: Optional[float],
    config_path: Optional[Path],
    out: Optional[Path],
    seed: Optional[int],
    threads: int,
    verbose: bool,
) -> None:
    """Evolve a field by the NLS flow and report mass and energy drift."""

    def body(ctx: RunContext) -> List[ExperimentReport]:
        config = ctx.config
        if field_path is not None:
            with open(field_path, encoding="utf-8") as f:
                initial, _ = field_from_dict(json.load(f))
        else:
            initial = sample_free_field(config.mode_set, config.kappa, config.rng(2))
        final_time = config.flow.t if t is None else t
        flow_config = config.flow_config()
        ctx.echo(f"Evolving to t={final_time:g} with dt={flow_config.dt:g}")
        trajectory = evolve_trajectory(
            initial, final_time, flow_config, config.flow.stride
        )
        path = write_trajectory(
            ctx.directory / "trajectory.jsonl",
            trajectory.times,
            trajectory.fields,
            config.kappa,
        )
        ctx.outputs.append(path)
        report = ExperimentReport(
            "nls-evolve",
            SweepKind.TIME,
            config.scenario_dict(),
            config.config_hash,
            list(trajectory.times),
        )
        for time_value, mass, energy in zip(
            trajectory.times, trajectory.masses, trajectory.energies
        ):
            report.add_point(time_value, "mass", mass)
            report.add_point(time_value, "energy", energy)
        report.metrics["mass_drift"] = trajectory.mass_drift()
        report.metrics["energy_drift"] = trajectory.energy_drift()
        click.echo(f"relative mass drift: {trajectory.mass_drift():.3g}")
        click.echo(f"energy drift:        {trajectory.energy_drift():.3g}")
        ctx.write_report(report)
        return [report]

    _execute("nls-evolve", config_path, out, seed, threads, verbose, body)


def _report_command(
    name: str, run: Callable[[ScenarioConfig, Any], ExperimentReport]
) -> Callable[..., None]:
    """Subcommand that runs one study and writes its report."""

    @common_options
    def command(
        config_path: Optional[Path],
        out: Optional[Path],
        seed: Optional[int],
        threads: int,
        verbose: bool,
    ) -> None:
        def body(ctx: RunContext) -> List[ExperimentReport]:
            report = run(ctx.config, ctx.executor)
            for metric in dict.fromkeys(point.metric for point in report.points):
                ctx.echo(f"{metric}: {report.values(metric)}")
            ctx.write_report(report)
            click.echo(f"{name}: {len(report.points)} rows, flags: {len(report.flags)}")
            return [report]

        _execute(name, config_path, out, seed, threads, verbose, body)

    return command


def _invariance(config: ScenarioConfig, executor: Any) -> ExperimentReport:
    times = config.sweep.values if config.sweep.kind == "time" else None
    return invariance_test(config, times, executor)


def _tail(config: ScenarioConfig, executor: Any) -> ExperimentReport:
    report = tail_moment_check(
        config.kappa,
        config.tail.radius,
        config.tail.c,
        config.sampler.n_samples,
        config.rng(3),
        config.tail.levels,
        config.tail.n_thresholds,
        config.sampler.chunk_size,
        executor,
    )
    report.scenario = config.scenario_dict()
    report.config_hash = config.config_hash
    return report


def _register_studies() -> None:
    studies: Dict[str, Any] = {
        "convergence": (
            lambda c, e: convergence_study_tau(c, executor=e),
            "tau sweep of e_Z and e_gamma against the classical reference.",
        ),
        "time-correlation": (
            lambda c, e: time_correlation_study(c, executor=e),
            "Quantum versus classical time-dependent correlation over tau.",
        ),
        "invariance": (
            _invariance,
            "Gibbs-measure invariance of the Galerkin flow.",
        ),
        "tail-check": (
            _tail,
            "Exponential L4 moment on the mass ball at increasing k_max.",
        ),
        "partition-oracle": (
            lambda c, e: partition_two_route(c, executor=e),
            "Monte Carlo z against the density oracle for constant w.",
        ),
    }
    for name, (run, help_text) in studies.items():
        cli.command(name, help=help_text)(_report_command(name, run))


_register_studies()


def main() -> None:
    """Entry point for the CLI."""
    cli()


if __name__ == "__main__":
    main()
