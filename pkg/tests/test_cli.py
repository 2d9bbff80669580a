"""Tests for CLI interface."""

import json
from pathlib import Path
from typing import Any, Dict, Optional

from click.testing import CliRunner

from nlsgibbs import __version__
from nlsgibbs.cli import cli
from nlsgibbs.config import parse_config


def write_scenario(tmp_path: Path, **overrides: Any) -> Path:
    """Small scenario file: three modes, K = 2, a thousand samples."""
    data: Dict[str, Any] = {
        "k_max": 1,
        "cutoff": {"kind": "plateau", "K": 2.0, "plateau": 0.5},
        "sampler": {"n_samples": 1000, "seed": 4, "chunk_size": 500},
        "sweep": {"values": [2.0]},
        "flow": {"dt": 0.01, "t": 0.05, "stride": 1},
        "series": {"orders": [0, 1], "quantum_orders": [0]},
        "tail": {"levels": [2, 4], "n_thresholds": 4},
        "oracle": {"couplings": [0.0, 0.5]},
    }
    data.update(overrides)
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps(data), "utf-8")
    return path


def run(tmp_path: Path, *args: str, scenario: Optional[Path] = None) -> Any:
    out = tmp_path / "out"
    scenario = scenario or write_scenario(tmp_path)
    args = (*args, "--config", str(scenario), "--out", str(out))
    return CliRunner().invoke(cli, list(args))


def read_manifest(tmp_path: Path) -> Dict[str, Any]:
    return json.loads((tmp_path / "out" / "manifest.json").read_text("utf-8"))


def test_sample_classical(tmp_path):
    """Test sampling stores the ensemble, the config and a manifest."""
    result = run(tmp_path, "sample-classical")

    assert result.exit_code == 0
    assert "z = " in result.output
    out = tmp_path / "out"
    assert (out / "ensemble.jsonl").exists()
    assert (out / "config.json").exists()

    manifest = read_manifest(tmp_path)
    config_hash = json.loads((out / "config.json").read_text("utf-8"))["config_hash"]
    assert manifest["command"] == "sample-classical"
    assert manifest["status"] == "ok"
    assert manifest["config_hash"] == config_hash
    assert f"sample-classical-{config_hash[:12]}.csv" in manifest["outputs"]
    assert f"sample-classical-{config_hash[:12]}.json" in manifest["outputs"]
    assert "ensemble.jsonl" in manifest["outputs"]


def test_sample_classical_is_reproducible(tmp_path):
    """Test the same scenario and seed write byte-identical ensembles."""
    scenario = write_scenario(tmp_path)
    runner = CliRunner()
    for name in ("a", "b"):
        result = runner.invoke(
            cli,
            [
                "sample-classical",
                "--config",
                str(scenario),
                "--out",
                str(tmp_path / name),
                "--threads",
                "2" if name == "b" else "1",
            ],
        )
        assert result.exit_code == 0

    first = (tmp_path / "a" / "ensemble.jsonl").read_bytes()
    second = (tmp_path / "b" / "ensemble.jsonl").read_bytes()
    assert first == second


def test_seed_override(tmp_path):
    """Test --seed replaces the configured seed in the stored config."""
    result = run(tmp_path, "sample-classical", "--seed", "17")

    assert result.exit_code == 0
    stored = json.loads((tmp_path / "out" / "config.json").read_text("utf-8"))
    assert stored["sampler"]["seed"] == 17
    assert stored["config_hash"] == parse_config(stored).config_hash


def test_output_directory_from_environment(tmp_path):
    """Test NLSGIBBS_OUT is used when --out is absent."""
    scenario = write_scenario(tmp_path)

    result = CliRunner().invoke(
        cli,
        ["partition-oracle", "--config", str(scenario)],
        env={"NLSGIBBS_OUT": str(tmp_path / "env-out")},
    )

    assert result.exit_code == 0
    assert (tmp_path / "env-out" / "manifest.json").exists()


def test_fock_partition(tmp_path):
    """Test the partition functions are printed and the operator dumped."""
    result = run(tmp_path, "fock-partition", "--tau", "2", "--dump-operator")

    assert result.exit_code == 0
    assert "Z_tau     =" in result.output
    assert "Z_tau_rel =" in result.output
    assert (tmp_path / "out" / "wtau-2.bin").exists()


def test_correlations_classical(tmp_path):
    """Test the classical gamma_1 estimate is printed as a matrix."""
    result = run(tmp_path, "correlations")

    assert result.exit_code == 0
    assert "[[" in result.output
    assert any(
        name.startswith("correlations-classical-")
        for name in read_manifest(tmp_path)["outputs"]
    )


def test_correlations_quantum_order_two(tmp_path):
    """Test the exact quantum gamma_2 at a given tau."""
    result = run(tmp_path, "correlations", "--side", "quantum", "--tau", "1", "-p", "2")

    assert result.exit_code == 0
    report_name = next(
        name
        for name in read_manifest(tmp_path)["outputs"]
        if name.endswith(".json") and name.startswith("correlations-quantum-")
    )
    report = json.loads((tmp_path / "out" / report_name).read_text("utf-8"))
    metrics = {point["metric"] for point in report["points"]}
    assert "re gamma[8,8]" in metrics


def test_series(tmp_path):
    """Test series coefficients are printed with the bound checks."""
    result = run(tmp_path, "series")

    assert result.exit_code in (0, 2)
    assert "a_0 = " in result.output
    assert "classical within bound:" in result.output
    status = read_manifest(tmp_path)["status"]
    assert status == ("ok" if result.exit_code == 0 else "inconclusive")


def test_nls_evolve_from_field(tmp_path):
    """Test evolving a given field writes a trajectory and drift figures."""
    field = tmp_path / "field.json"
    field.write_text(
        json.dumps({"k_max": 1, "coeffs": [[0.1, 0.0], [0.5, 0.2], [0.0, -0.3]]}),
        "utf-8",
    )

    result = run(tmp_path, "nls-evolve", "--field", str(field), "--time", "0.03")

    assert result.exit_code == 0
    assert "relative mass drift" in result.output
    lines = (tmp_path / "out" / "trajectory.jsonl").read_text("utf-8").splitlines()
    assert json.loads(lines[0])["t"] == 0.0
    assert json.loads(lines[-1])["t"] == 0.03


def test_nls_evolve_default_field(tmp_path):
    """Test a free-field sample is evolved when no field is given."""
    result = run(tmp_path, "nls-evolve")

    assert result.exit_code == 0
    assert (tmp_path / "out" / "trajectory.jsonl").exists()


def test_partition_oracle(tmp_path):
    """Test the two routes to z are compared for each coupling."""
    result = run(tmp_path, "partition-oracle")

    assert result.exit_code == 0
    assert "partition-oracle: 6 rows" in result.output


def test_invariance(tmp_path):
    """Test the invariance check runs on the constant potential."""
    result = run(tmp_path, "invariance")

    assert result.exit_code == 0
    assert "invariance:" in result.output


def test_invariance_rejects_pseudospectral_flow(tmp_path):
    """Test the pseudospectral flow is refused with exit code 1."""
    scenario = write_scenario(tmp_path, flow={"galerkin": False})

    result = run(tmp_path, "invariance", scenario=scenario)

    assert result.exit_code == 1
    assert "DomainError" in result.output


def test_tail_check(tmp_path):
    """Test the L4 moment check writes its report."""
    result = run(tmp_path, "tail-check")

    assert result.exit_code in (0, 2)
    assert any(
        name.startswith("tail-check-") for name in read_manifest(tmp_path)["outputs"]
    )


def test_invalid_configuration(tmp_path):
    """Test validation errors are listed field by field with exit code 1."""
    scenario = write_scenario(tmp_path, kappa=-1.0, sampler={"n_samples": 1})

    result = run(tmp_path, "sample-classical", scenario=scenario)

    assert result.exit_code == 1
    assert "invalid configuration" in result.output
    assert "kappa: must be a positive number" in result.output
    assert "sampler.n_samples: must be an integer >= 2" in result.output
    assert not (tmp_path / "out").exists()


def test_error_invalid_json(tmp_path):
    """Test a malformed scenario file exits with code 1."""
    scenario = tmp_path / "broken.json"
    scenario.write_text("{", "utf-8")

    result = run(tmp_path, "series", scenario=scenario)

    assert result.exit_code == 1
    assert "invalid JSON" in result.output


def test_error_unit_cutoff_with_interaction(tmp_path):
    """Test an interacting model without a cutoff is refused."""
    scenario = write_scenario(tmp_path, cutoff={"kind": "unit"}, sweep={"kind": "time"})

    result = run(tmp_path, "sample-classical", scenario=scenario)

    assert result.exit_code == 1
    assert "Error: DomainError" in result.output


def test_error_config_not_found(tmp_path):
    """Test a missing scenario file is a usage error."""
    missing = tmp_path / "missing.json"

    result = CliRunner().invoke(cli, ["series", "--config", str(missing)])

    assert result.exit_code == 2
    assert "does not exist" in result.output


def test_cli_version():
    """Test version option."""
    result = CliRunner().invoke(cli, ["--version"])

    assert result.exit_code == 0
    assert __version__ in result.output


def test_cli_help():
    """Test help lists every subcommand."""
    result = CliRunner().invoke(cli, ["--help"])

    assert result.exit_code == 0
    for command in (
        "sample-classical",
        "fock-partition",
        "correlations",
        "series",
        "nls-evolve",
        "convergence",
        "time-correlation",
        "invariance",
        "tail-check",
        "partition-oracle",
    ):
        assert command in result.output
