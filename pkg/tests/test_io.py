"""Tests for ensemble files, trajectories and run manifests."""

import json
from pathlib import Path

import numpy as np
import pytest

from nlsgibbs.free_field import RngStream, sample_free_fields
from nlsgibbs.models import ModeSet, SpectralField
from nlsgibbs.utils.io import (
    read_ensemble,
    write_ensemble,
    write_manifest,
    write_trajectory,
)


@pytest.fixture
def samples() -> np.ndarray:
    return sample_free_fields(ModeSet(2), 1.0, RngStream(5, 0), 20)


class TestEnsembleFiles:
    """Test the JSON Lines ensemble format."""

    def test_read_back(self, tmp_path: Path, samples: np.ndarray) -> None:
        """Test coefficients and weights survive a write and read."""
        weights = np.linspace(0.0, 1.0, 20)
        path = write_ensemble(
            tmp_path / "ensemble.jsonl",
            ModeSet(2),
            1.0,
            samples,
            weights,
            {"seed": 5},
        )

        header, coeffs, read_weights = read_ensemble(path)

        assert header["format"] == "nlsgibbs-ensemble"
        assert header["n_samples"] == 20
        assert header["seed"] == 5
        assert header["weighted"] is True
        np.testing.assert_array_equal(coeffs, samples)
        assert read_weights is not None
        np.testing.assert_array_equal(read_weights, weights)

    def test_unweighted(self, tmp_path: Path, samples: np.ndarray) -> None:
        """Test free ensembles are stored without weights."""
        path = write_ensemble(tmp_path / "free.jsonl", ModeSet(2), 1.0, samples)

        header, _, weights = read_ensemble(path)

        assert header["weighted"] is False
        assert weights is None

    def test_byte_identical(self, tmp_path: Path, samples: np.ndarray) -> None:
        """Test the same samples always give the same file."""
        a = write_ensemble(tmp_path / "a.jsonl", ModeSet(2), 1.0, samples)
        b = write_ensemble(tmp_path / "b.jsonl", ModeSet(2), 1.0, samples)

        assert a.read_bytes() == b.read_bytes()

    def test_one_line_per_sample(self, tmp_path: Path, samples: np.ndarray) -> None:
        """Test the header line is followed by one record per sample."""
        path = write_ensemble(tmp_path / "e.jsonl", ModeSet(2), 1.0, samples)

        lines = path.read_text("utf-8").splitlines()

        assert len(lines) == 21
        assert len(json.loads(lines[1])["coeffs"]) == 5

    def test_truncated_file(self, tmp_path: Path, samples: np.ndarray) -> None:
        """Test a sample count mismatch is detected."""
        path = write_ensemble(tmp_path / "e.jsonl", ModeSet(2), 1.0, samples)
        lines = path.read_text("utf-8").splitlines()
        path.write_text("\n".join(lines[:-1]) + "\n", "utf-8")

        with pytest.raises(ValueError, match="announces 20 samples, found 19"):
            read_ensemble(path)

    def test_not_an_ensemble(self, tmp_path: Path) -> None:
        """Test files without the ensemble header are rejected."""
        path = tmp_path / "other.jsonl"
        path.write_text('{"format": "something-else"}\n', "utf-8")

        with pytest.raises(ValueError, match="not an ensemble file"):
            read_ensemble(path)

    def test_empty_file(self, tmp_path: Path) -> None:
        """Test an empty file is rejected."""
        path = tmp_path / "empty.jsonl"
        path.write_text("", "utf-8")

        with pytest.raises(ValueError, match="empty"):
            read_ensemble(path)


class TestTrajectory:
    """Test trajectory dumps."""

    def test_records(self, tmp_path: Path) -> None:
        """Test each snapshot is one {t, field} line."""
        mode_set = ModeSet(1)
        fields = [
            SpectralField.from_modes(mode_set, {0: 1.0}),
            SpectralField.from_modes(mode_set, {1: 0.5j}),
        ]

        path = write_trajectory(tmp_path / "traj.jsonl", [0.0, 0.5], fields, 2.0)

        records = [json.loads(line) for line in path.read_text("utf-8").splitlines()]
        assert [r["t"] for r in records] == [0.0, 0.5]
        assert records[0]["field"]["kappa"] == 2.0
        assert records[1]["field"]["coeffs"][2] == [0.0, 0.5]


class TestManifest:
    """Test run manifests."""

    def test_keys(self, tmp_path: Path) -> None:
        """Test the manifest records command, hash, timings and outputs."""
        path = write_manifest(
            tmp_path,
            "series",
            "abc",
            "2024-01-01T00:00:00+00:00",
            {"total": 1.25},
            [tmp_path / "series-abc.csv", tmp_path / "config.json"],
            status="inconclusive",
        )

        manifest = json.loads(path.read_text("utf-8"))

        assert path.name == "manifest.json"
        assert manifest["command"] == "series"
        assert manifest["config_hash"] == "abc"
        assert manifest["durations"] == {"total": 1.25}
        assert manifest["outputs"] == ["config.json", "series-abc.csv"]
        assert manifest["status"] == "inconclusive"
        assert {"python", "numpy", "scipy", "click"} <= set(manifest["versions"])
