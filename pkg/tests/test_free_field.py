"""Tests for free field sampling and the Wick oracle."""

from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from nlsgibbs.exceptions import DegenerateEnsembleError, SizeError
from nlsgibbs.free_field import (
    FreeFieldEnsemble,
    RngStream,
    empirical_moment,
    mode_factor,
    monomial_values,
    sample_free_field,
    sample_free_fields,
    trace_inverse,
    truncated_trace_inverse,
    wick_moment_oracle,
)
from nlsgibbs.models import ModeSet
from nlsgibbs.spectral import eigenvalues


class TestRngStream:
    """Tests for RngStream class."""

    def test_reproducible(self) -> None:
        """Test the same (seed, stream, chunk) gives the same draws."""
        a = RngStream(7, 1).generator(3).standard_normal(4)
        b = RngStream(7, 1).generator(3).standard_normal(4)
        assert np.array_equal(a, b)

    def test_streams_differ(self) -> None:
        """Test distinct stream ids give distinct draws."""
        a = RngStream(7, 0).generator().standard_normal(4)
        b = RngStream(7, 0).substream(1).generator().standard_normal(4)
        assert not np.array_equal(a, b)

    def test_seed_range(self) -> None:
        """Test negative seeds are refused."""
        with pytest.raises(ValueError):
            RngStream(-1)


class TestSampling:
    """Tests for sample_free_field and sample_free_fields."""

    def test_shape(self) -> None:
        """Test batches have shape (n, d)."""
        coeffs = sample_free_fields(ModeSet(2), 1.0, RngStream(0), 10, chunk_size=4)
        assert coeffs.shape == (10, 5)

    def test_executor_independent(self) -> None:
        """Test threads do not change the samples."""
        mode_set = ModeSet(1)
        serial = sample_free_fields(mode_set, 1.0, RngStream(3), 100, chunk_size=16)
        with ThreadPoolExecutor(max_workers=4) as executor:
            threaded = sample_free_fields(
                mode_set, 1.0, RngStream(3), 100, chunk_size=16, executor=executor
            )
        assert np.array_equal(serial, threaded)

    def test_consecutive_pieces(self) -> None:
        """Test first_chunk continues a stream."""
        mode_set = ModeSet(1)
        whole = sample_free_fields(mode_set, 1.0, RngStream(5), 32, chunk_size=16)
        tail = sample_free_fields(
            mode_set, 1.0, RngStream(5), 16, chunk_size=16, first_chunk=1
        )
        assert np.array_equal(whole[16:], tail)

    def test_single_field(self) -> None:
        """Test a single draw from a stream."""
        field = sample_free_field(ModeSet(1), 1.0, RngStream(0))
        assert field.coeffs.shape == (3,)

    def test_mode_variances(self) -> None:
        """Test E|phi_hat(k)|^2 = 1/lambda_k within 4 sigma."""
        mode_set = ModeSet(1)
        coeffs = sample_free_fields(mode_set, 1.0, RngStream(11), 20000)
        lam = eigenvalues(mode_set, 1.0)
        for i in range(mode_set.d):
            estimate = empirical_moment(coeffs, lambda c, i=i: np.abs(c[:, i]) ** 2)
            assert estimate.agrees_with(1.0 / lam[i], 4)


class TestFreeFieldEnsemble:
    """Tests for FreeFieldEnsemble class."""

    def test_sample_and_masses(self) -> None:
        """Test masses are non-negative per sample."""
        ensemble = FreeFieldEnsemble.sample(ModeSet(1), 1.0, RngStream(0), 8)
        assert ensemble.n_samples == 8
        assert np.all(ensemble.masses() >= 0)
        assert len(list(ensemble.fields())) == 8

    def test_merge(self) -> None:
        """Test merging concatenates samples."""
        a = FreeFieldEnsemble.sample(ModeSet(1), 1.0, RngStream(0), 4)
        b = FreeFieldEnsemble.sample(ModeSet(1), 1.0, RngStream(1), 6)
        assert a.merge(b).n_samples == 10

    def test_merge_mismatch(self) -> None:
        """Test ensembles of different models cannot merge."""
        a = FreeFieldEnsemble.sample(ModeSet(1), 1.0, RngStream(0), 4)
        b = FreeFieldEnsemble.sample(ModeSet(1), 2.0, RngStream(1), 4)
        with pytest.raises(ValueError):
            a.merge(b)


class TestWick:
    """Tests for wick_moment_oracle."""

    def test_two_point(self) -> None:
        """Test E|phi_hat(k)|^2 = 1/lambda_k."""
        mode_set = ModeSet(1)
        factors = [mode_factor(mode_set, 1, conjugate=True), mode_factor(mode_set, 1)]
        lam = eigenvalues(mode_set, 1.0)[2]
        assert wick_moment_oracle(factors, mode_set, 1.0) == pytest.approx(1.0 / lam)

    def test_four_point(self) -> None:
        """Test E|phi_hat(0)|^4 = 2/kappa^2."""
        mode_set = ModeSet(0)
        bar = mode_factor(mode_set, 0, conjugate=True)
        plain = mode_factor(mode_set, 0)
        value = wick_moment_oracle([bar, bar, plain, plain], mode_set, 2.0)
        assert value == pytest.approx(0.5)

    def test_unbalanced_vanishes(self) -> None:
        """Test moments with unequal conjugate counts vanish."""
        mode_set = ModeSet(0)
        factors = [mode_factor(mode_set, 0), mode_factor(mode_set, 0)]
        assert wick_moment_oracle(factors, mode_set, 1.0) == 0

    def test_too_many_factors(self) -> None:
        """Test the factor limit."""
        factor = mode_factor(ModeSet(0), 0)
        with pytest.raises(SizeError):
            wick_moment_oracle([factor] * 9, ModeSet(0), 1.0)

    def test_matches_samples(self) -> None:
        """Test the sampled fourth moment agrees with Wick within 4 sigma."""
        mode_set = ModeSet(1)
        factors = [
            mode_factor(mode_set, 0, conjugate=True),
            mode_factor(mode_set, 1, conjugate=True),
            mode_factor(mode_set, 0),
            mode_factor(mode_set, 1),
        ]
        coeffs = sample_free_fields(mode_set, 1.0, RngStream(2), 40000)
        estimate = empirical_moment(coeffs, lambda c: monomial_values(c, factors))
        assert estimate.agrees_with(wick_moment_oracle(factors, mode_set, 1.0), 4)

    def test_empty_ensemble(self) -> None:
        """Test moments need samples."""
        with pytest.raises(DegenerateEnsembleError):
            empirical_moment(np.zeros((0, 3)), lambda c: c[:, 0])


class TestTraces:
    """Tests for trace_inverse and its truncation."""

    def test_truncated_below_full(self) -> None:
        """Test the truncated trace increases toward the closed form."""
        full = trace_inverse(1.0)
        assert truncated_trace_inverse(ModeSet(2), 1.0) < full
        assert truncated_trace_inverse(ModeSet(2000), 1.0) == pytest.approx(
            full, abs=1e-4
        )
