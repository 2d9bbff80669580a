"""Tests for Monte Carlo estimators."""

import math

import numpy as np
import pytest

from nlsgibbs.exceptions import DegenerateEnsembleError
from nlsgibbs.utils.stats import (
    jackknife_ratio,
    loglog_slope,
    mean_estimate,
    ratio_estimate,
    trace_norm,
)


class TestMeanEstimate:
    """Tests for mean_estimate."""

    def test_mean_and_error(self) -> None:
        """Test mean and std/sqrt(n)."""
        estimate = mean_estimate(np.array([1.0, 2.0, 3.0, 4.0]))
        assert estimate.value == pytest.approx(2.5)
        assert estimate.std_error == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
        assert estimate.n_samples == 4

    def test_complex(self) -> None:
        """Test complex samples keep a complex mean."""
        estimate = mean_estimate(np.array([1j, 1j, 1j]))
        assert estimate.value == 1j
        assert estimate.std_error == 0.0

    def test_single_sample(self) -> None:
        """Test error bars need two samples."""
        with pytest.raises(ValueError):
            mean_estimate(np.array([1.0]))


class TestJackknife:
    """Tests for jackknife_ratio and ratio_estimate."""

    def test_identical_arrays(self) -> None:
        """Test sum(x)/sum(x) is exactly one."""
        x = np.array([0.5, 1.5, 2.0])
        ratio, _ = jackknife_ratio(x, x)
        assert ratio == 1.0

    def test_uniform_weights_reduce_to_mean(self) -> None:
        """Test unit weights give the plain mean and its standard error."""
        values = np.array([1.0, 4.0, 2.0, 7.0, 3.0])
        estimate = ratio_estimate(values, np.ones(5))
        plain = mean_estimate(values)
        assert estimate.value == pytest.approx(plain.value)
        assert estimate.std_error == pytest.approx(plain.std_error)

    def test_matrix_numerator(self) -> None:
        """Test trailing axes are carried through."""
        num = np.ones((4, 2, 2))
        ratio, error = jackknife_ratio(num, np.ones(4))
        assert ratio.shape == (2, 2)
        assert error.shape == (2, 2)

    def test_zero_weights(self) -> None:
        """Test an all-zero denominator is degenerate."""
        with pytest.raises(DegenerateEnsembleError):
            jackknife_ratio(np.ones(3), np.zeros(3))


class TestMatrixNorms:
    """Tests for trace_norm."""

    def test_hermitian(self) -> None:
        """Test the trace norm of a Hermitian matrix sums |eigenvalues|."""
        assert trace_norm(np.diag([1.0, -2.0])) == pytest.approx(3.0)

    def test_non_hermitian(self) -> None:
        """Test singular values are used otherwise."""
        assert trace_norm(np.array([[0.0, 1.0], [0.0, 0.0]])) == pytest.approx(1.0)


class TestSlope:
    """Tests for loglog_slope."""

    def test_power_law(self) -> None:
        """Test y = x^-2 has slope -2."""
        x = [2.0, 4.0, 8.0, 16.0]
        assert loglog_slope(x, [v**-2 for v in x]) == pytest.approx(-2.0)

    def test_undefined(self) -> None:
        """Test fewer than two positive points give nan."""
        assert math.isnan(loglog_slope([1.0, 2.0], [0.0, 1.0]))
