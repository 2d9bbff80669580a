"""Tests for torus analysis: eigenvalues, transforms, norms and heat kernels."""

import math

import numpy as np
import pytest

from nlsgibbs.exceptions import AliasingError, DomainError, PrecisionError
from nlsgibbs.models import GridField, ModeSet, NormKind, SpectralField, grid_points
from nlsgibbs.spectral import (
    coefficients_to_grid,
    default_grid_size,
    eigenvalue,
    eigenvalues,
    field_from_dict,
    field_to_dict,
    grid_to_coefficients,
    heat_kernel_convolution,
    heat_propagator,
    norm,
    transform,
)


def random_field(k_max: int, seed: int = 0) -> SpectralField:
    rng = np.random.default_rng(seed)
    d = 2 * k_max + 1
    return SpectralField(ModeSet(k_max), rng.normal(size=d) + 1j * rng.normal(size=d))


class TestEigenvalues:
    """Tests for eigenvalue and eigenvalues."""

    def test_zero_mode(self) -> None:
        """Test lambda_0 = kappa."""
        assert eigenvalue(0, 1.0) == 1.0

    def test_first_mode(self) -> None:
        """Test lambda_1 = 4 pi^2 + kappa."""
        assert eigenvalue(1, 1.0) == pytest.approx(40.47842, abs=1e-5)

    def test_even_in_k(self) -> None:
        """Test lambda_{-k} = lambda_k."""
        assert eigenvalue(-2, 0.5) == eigenvalue(2, 0.5)

    def test_non_positive_kappa_raises(self) -> None:
        """Test kappa must be positive."""
        with pytest.raises(DomainError):
            eigenvalue(1, 0.0)
        with pytest.raises(DomainError):
            eigenvalues(ModeSet(1), -1.0)

    def test_batch_matches_scalar(self) -> None:
        """Test eigenvalues follow mode order."""
        lam = eigenvalues(ModeSet(2), 2.0)
        assert lam == pytest.approx([eigenvalue(k, 2.0) for k in range(-2, 3)])


class TestTransform:
    """Tests for spectral/grid transforms."""

    def test_default_grid_size(self) -> None:
        """Test the default grid is the smallest power of two >= 4 k_max + 1."""
        assert default_grid_size(0) == 4
        assert default_grid_size(1) == 8
        assert default_grid_size(4) == 32

    def test_plane_wave_values(self) -> None:
        """Test a single mode evaluates to e^{2 pi i k x} on the grid."""
        field = SpectralField.from_modes(ModeSet(2), {1: 1.0})
        values = coefficients_to_grid(field.coeffs, 2, 16)
        assert values == pytest.approx(np.exp(2j * math.pi * grid_points(16)))

    def test_round_trip(self) -> None:
        """Test spectral -> grid -> spectral is lossless when n_x >= d."""
        field = random_field(3)
        grid = transform(field, n_x=8)
        assert isinstance(grid, GridField)
        back = transform(grid, mode_set=field.mode_set)
        assert isinstance(back, SpectralField)
        assert np.max(np.abs(back.coeffs - field.coeffs)) < 1e-12

    def test_batch_along_last_axis(self) -> None:
        """Test batches transform row by row."""
        batch = np.stack([random_field(2, s).coeffs for s in range(3)])
        values = coefficients_to_grid(batch, 2, 16)
        assert values.shape == (3, 16)
        assert np.allclose(grid_to_coefficients(values, 2), batch)

    def test_aliasing_raises(self) -> None:
        """Test a grid smaller than the mode set is refused."""
        with pytest.raises(AliasingError):
            coefficients_to_grid(np.zeros(9), 4, 8)
        with pytest.raises(AliasingError):
            grid_to_coefficients(np.zeros(4), 2)

    def test_grid_field_needs_mode_set(self) -> None:
        """Test grid-to-spectral requires target modes."""
        with pytest.raises(ValueError):
            transform(GridField(8, np.zeros(8)))


class TestNorms:
    """Tests for field norms."""

    def test_l2(self) -> None:
        """Test the L2 norm is the coefficient 2-norm."""
        field = SpectralField.from_modes(ModeSet(1), {0: 3.0, 1: 4.0j})
        assert norm(field) == pytest.approx(5.0)

    def test_l4_plane_wave(self) -> None:
        """Test |A e^{2 pi i k x}| is constant, so ||.||_4 = |A|."""
        field = SpectralField.from_modes(ModeSet(2), {2: 0.7})
        assert norm(field, NormKind.L4) == pytest.approx(0.7, rel=1e-12)

    def test_l4_matches_fine_grid(self) -> None:
        """Test the alias-free grid gives the exact L4 norm."""
        field = random_field(3, seed=4)
        exact = norm(field, NormKind.L4, n_x=256)
        assert norm(field, NormKind.L4) == pytest.approx(exact, rel=1e-12)

    def test_l4_undersized_grid_raises(self) -> None:
        """Test L4 refuses grids below 4 k_max + 1."""
        with pytest.raises(PrecisionError):
            norm(random_field(1), NormKind.L4, n_x=4)

    def test_sobolev(self) -> None:
        """Test Hs at s = 0 is L2 and weights grow with |k|."""
        field = random_field(2, seed=1)
        assert norm(field, NormKind.HS, s=0.0) == pytest.approx(norm(field))
        assert norm(field, NormKind.HS, s=1.0) > norm(field)


class TestHeat:
    """Tests for the heat propagator and its kernel oracle."""

    def test_propagator_damps_modes(self) -> None:
        """Test e^{-t h} multiplies mode k by e^{-t lambda_k}."""
        field = SpectralField.from_modes(ModeSet(1), {1: 1.0})
        damped = heat_propagator(0.01, field, 1.0)
        assert damped.coefficient(1) == pytest.approx(
            math.exp(-0.01 * eigenvalue(1, 1.0))
        )

    def test_kernel_matches_propagator(self) -> None:
        """Test the image-sum kernel reproduces the spectral propagator."""
        field = random_field(3, seed=2)
        spectral = heat_propagator(0.1, field, 1.0)
        kernel = heat_kernel_convolution(field, 0.1, 1.0)
        assert np.max(np.abs(kernel.coeffs - spectral.coeffs)) < 1e-10

    def test_non_positive_time_raises(self) -> None:
        """Test t must be positive."""
        with pytest.raises(DomainError):
            heat_propagator(0.0, random_field(1), 1.0)


class TestSerialization:
    """Tests for the JSON field format."""

    def test_round_trip_with_kappa(self) -> None:
        """Test fields and kappa survive serialization exactly."""
        field = random_field(2, seed=3)
        restored, kappa = field_from_dict(field_to_dict(field, 0.5))
        assert kappa == 0.5
        assert np.array_equal(restored.coeffs, field.coeffs)

    def test_malformed_record_raises(self) -> None:
        """Test missing keys are reported."""
        with pytest.raises(ValueError, match="malformed"):
            field_from_dict({"coeffs": []})
