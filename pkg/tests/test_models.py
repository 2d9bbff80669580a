"""Tests for data models."""

import math

import numpy as np
import pytest

from nlsgibbs.models import (
    Estimate,
    ExperimentReport,
    GridField,
    ModeSet,
    SpectralField,
    SweepKind,
    grid_points,
)


class TestModeSet:
    """Tests for ModeSet class."""

    def test_size_and_order(self) -> None:
        """Test d = 2 k_max + 1 and modes run from -k_max to k_max."""
        mode_set = ModeSet(2)
        assert mode_set.d == 5
        assert len(mode_set) == 5
        assert list(mode_set.modes) == [-2, -1, 0, 1, 2]

    def test_zero_k_max(self) -> None:
        """Test the single-mode set."""
        assert list(ModeSet(0).modes) == [0]

    def test_index(self) -> None:
        """Test index maps modes to positions."""
        mode_set = ModeSet(2)
        assert mode_set.index(-2) == 0
        assert mode_set.index(0) == 2
        assert mode_set.index(2) == 4

    def test_index_outside_raises(self) -> None:
        """Test index rejects modes beyond k_max."""
        with pytest.raises(KeyError):
            ModeSet(1).index(2)

    def test_contains(self) -> None:
        """Test membership."""
        assert 1 in ModeSet(1)
        assert -2 not in ModeSet(1)

    def test_negative_k_max_raises(self) -> None:
        """Test k_max must be non-negative."""
        with pytest.raises(ValueError, match="non-negative"):
            ModeSet(-1)

    def test_non_integer_raises(self) -> None:
        """Test k_max must be an integer."""
        with pytest.raises(TypeError):
            ModeSet(1.5)  # type: ignore
        with pytest.raises(TypeError):
            ModeSet(True)


class TestSpectralField:
    """Tests for SpectralField class."""

    def test_coefficient_lookup(self) -> None:
        """Test coefficients are addressed by mode."""
        field = SpectralField.from_modes(ModeSet(1), {1: 2.0 + 1.0j})
        assert field.coefficient(1) == 2.0 + 1.0j
        assert field.coefficient(-1) == 0.0

    def test_wrong_length_raises(self) -> None:
        """Test coefficient count must equal d."""
        with pytest.raises(ValueError, match="length 3"):
            SpectralField(ModeSet(1), np.zeros(4))

    def test_non_finite_raises(self) -> None:
        """Test coefficients must be finite."""
        with pytest.raises(ValueError, match="finite"):
            SpectralField(ModeSet(0), np.array([np.nan]))

    def test_coefficients_are_read_only(self) -> None:
        """Test fields are immutable values."""
        field = SpectralField.zeros(ModeSet(1))
        with pytest.raises(ValueError):
            field.coeffs[0] = 1.0

    def test_requires_mode_set(self) -> None:
        """Test mode_set type check."""
        with pytest.raises(TypeError):
            SpectralField(3, np.zeros(7))  # type: ignore


class TestGridField:
    """Tests for GridField class."""

    def test_points(self) -> None:
        """Test the grid starts at -1/2 with spacing 1/n_x."""
        grid = GridField(4, np.zeros(4))
        assert np.allclose(grid.points, [-0.5, -0.25, 0.0, 0.25])
        assert np.allclose(grid_points(4), grid.points)

    def test_power_of_two_required(self) -> None:
        """Test non power-of-two sizes are rejected."""
        with pytest.raises(ValueError, match="power of two"):
            GridField(6, np.zeros(6))


class TestEstimate:
    """Tests for Estimate class."""

    def test_deviation(self) -> None:
        """Test deviation in units of the standard error."""
        assert Estimate(1.0, 0.5).deviation(2.0) == pytest.approx(2.0)

    def test_zero_error_deviation(self) -> None:
        """Test exact estimates deviate by 0 or infinitely."""
        assert Estimate(1.0, 0.0).deviation(1.0) == 0.0
        assert math.isinf(Estimate(1.0, 0.0).deviation(1.5))

    def test_agrees_with(self) -> None:
        """Test k-sigma agreement."""
        estimate = Estimate(1.0, 0.1, 100)
        assert estimate.agrees_with(1.25, 3)
        assert not estimate.agrees_with(1.5, 3)

    def test_to_dict_complex(self) -> None:
        """Test complex values serialize as [re, im]."""
        assert Estimate(1 + 2j, 0.1).to_dict()["value"] == [1.0, 2.0]


class TestExperimentReport:
    """Tests for ExperimentReport class."""

    def test_add_and_select_points(self) -> None:
        """Test points are grouped by metric in sweep order."""
        report = ExperimentReport("study", SweepKind.TAU, sweep_values=[2.0, 4.0])
        report.add_point(2.0, "e_Z", 0.3, 0.01)
        report.add_point(4.0, "e_Z", 0.1, 0.01)
        report.add_point(2.0, "n_max", 8)
        assert report.values("e_Z") == [0.3, 0.1]
        assert [p.sweep_value for p in report.series("e_Z")] == [2.0, 4.0]

    def test_nan_error_rejected(self) -> None:
        """Test every estimate carries a usable uncertainty."""
        report = ExperimentReport("study", SweepKind.TAU)
        with pytest.raises(ValueError):
            report.add_point(1.0, "x", 1.0, math.nan)

    def test_flags(self) -> None:
        """Test flags make the report inconclusive and are not duplicated."""
        report = ExperimentReport("study", SweepKind.TIME)
        assert report.is_conclusive()
        report.flag("refine dt")
        report.flag("refine dt")
        assert report.flags == ["refine dt"]
        assert not report.is_conclusive()

    def test_to_dict(self) -> None:
        """Test serialization carries kind, hash and points."""
        report = ExperimentReport("study", SweepKind.EPSILON, config_hash="abc")
        report.add_point(0.5, "distance", 0.2, 0.0, 1.5)
        data = report.to_dict()
        assert data["sweep_kind"] == "epsilon"
        assert data["config_hash"] == "abc"
        assert data["points"][0]["runtime_s"] == 1.5

    def test_sweep_kind_type_checked(self) -> None:
        """Test sweep_kind must be a SweepKind."""
        with pytest.raises(TypeError):
            ExperimentReport("study", "tau")  # type: ignore
