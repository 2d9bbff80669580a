"""
Gaussian free field sampling and Wick-theorem oracles.

The free field phi = sum_k omega_k / sqrt(lambda_k) e^{2 pi i k x} has iid
standard complex Gaussian omega_k (density e^{-|z|^2}/pi).
"""

import itertools
import logging
import math
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Callable, Iterator, List, Optional, Sequence, Union

import numpy as np

from nlsgibbs.exceptions import DegenerateEnsembleError, SizeError
from nlsgibbs.models import Estimate, ModeSet, SpectralField
from nlsgibbs.spectral import eigenvalues
from nlsgibbs.utils.stats import mean_estimate

logger = logging.getLogger(__name__)

DEFAULT_CHUNK_SIZE = 4096
MAX_WICK_FACTORS = 8


@dataclass(frozen=True)
class RngStream:
    """
    Reproducible random stream identified by (seed, stream_id).

    Chunk c of the stream uses SeedSequence(seed, spawn_key=(stream_id, c)), so
    chunks are independent and can be generated in any order.
    """

    seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        """Validate stream identifiers."""
        if self.seed < 0 or self.seed >= 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.stream_id < 0:
            raise ValueError("stream_id must be non-negative")

    def generator(self, chunk: int = 0) -> np.random.Generator:
        """Generator for one chunk of the stream."""
        sequence = np.random.SeedSequence(
            self.seed, spawn_key=(self.stream_id, int(chunk))
        )
        return np.random.Generator(np.random.PCG64(sequence))

    def substream(self, stream_id: int) -> "RngStream":
        """Stream with the same seed and another id."""
        return RngStream(self.seed, stream_id)


def complex_normals(
    generator: np.random.Generator, shape: Union[int, Sequence[int]]
) -> np.ndarray:
    """Standard complex Gaussians: two real normals of variance 1/2 each."""
    real = generator.standard_normal(shape)
    imag = generator.standard_normal(shape)
    return (real + 1j * imag) * math.sqrt(0.5)


def sample_free_field(
    mode_set: ModeSet, kappa: float, rng: Union[RngStream, np.random.Generator]
) -> SpectralField:
    """
    Draw one free field with coefficients omega_k / sqrt(lambda_k).

    Args:
        mode_set: Modes of the truncated field
        kappa: Positive mass parameter
        rng: Stream (its first chunk is used) or a numpy Generator

    Returns:
        SpectralField sample

    Raises:
        DomainError: If kappa <= 0
    """
    lam = eigenvalues(mode_set, kappa)
    generator = rng.generator(0) if isinstance(rng, RngStream) else rng
    omega = complex_normals(generator, mode_set.d)
    return SpectralField(mode_set, omega / np.sqrt(lam))


def sample_free_fields(
    mode_set: ModeSet,
    kappa: float,
    rng: RngStream,
    n_samples: int,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    executor: Optional[Executor] = None,
    first_chunk: int = 0,
) -> np.ndarray:
    """
    Draw a batch of free fields as an (n_samples, d) coefficient array.

    Chunks are laid out by chunk_size alone, so the result does not depend on
    the executor or its worker count. first_chunk lets a long run be drawn in
    consecutive pieces.
    """
    if n_samples < 0:
        raise ValueError("n_samples must be non-negative")
    lam = eigenvalues(mode_set, kappa)
    scale = 1.0 / np.sqrt(lam)
    n_chunks = -(-n_samples // chunk_size)

    def draw(chunk: int) -> np.ndarray:
        size = min(chunk_size, n_samples - chunk * chunk_size)
        omega = complex_normals(rng.generator(first_chunk + chunk), (size, mode_set.d))
        return omega * scale

    if executor is None:
        chunks = [draw(c) for c in range(n_chunks)]
    else:
        chunks = list(executor.map(draw, range(n_chunks)))
    logger.debug("drew %d free fields in %d chunks", n_samples, n_chunks)
    if not chunks:
        return np.zeros((0, mode_set.d), dtype=complex)
    return np.concatenate(chunks, axis=0)


@dataclass
class FreeFieldEnsemble:
    """Unweighted samples of the free field."""

    mode_set: ModeSet
    kappa: float
    coeffs: np.ndarray
    seeds: List[RngStream] = field(default_factory=list)

    def __post_init__(self) -> None:
        """Validate ensemble shape."""
        self.coeffs = np.asarray(self.coeffs, dtype=complex)
        if self.coeffs.ndim != 2 or self.coeffs.shape[1] != self.mode_set.d:
            raise ValueError(
                f"ensemble coefficients must have shape (n, {self.mode_set.d})"
            )

    @classmethod
    def sample(
        cls,
        mode_set: ModeSet,
        kappa: float,
        rng: RngStream,
        n_samples: int,
        chunk_size: int = DEFAULT_CHUNK_SIZE,
        executor: Optional[Executor] = None,
    ) -> "FreeFieldEnsemble":
        """Draw a fresh ensemble."""
        coeffs = sample_free_fields(
            mode_set, kappa, rng, n_samples, chunk_size, executor
        )
        return cls(mode_set, kappa, coeffs, [rng])

    @property
    def n_samples(self) -> int:
        return int(self.coeffs.shape[0])

    def fields(self) -> Iterator[SpectralField]:
        """Iterate over samples as SpectralField values."""
        for row in self.coeffs:
            yield SpectralField(self.mode_set, row)

    def masses(self) -> np.ndarray:
        """N(phi) per sample."""
        return np.sum(np.abs(self.coeffs) ** 2, axis=1)

    def merge(self, other: "FreeFieldEnsemble") -> "FreeFieldEnsemble":
        """
        Concatenate two ensembles of the same model.

        Raises:
            ValueError: If mode sets or kappa differ
        """
        if other.mode_set != self.mode_set or other.kappa != self.kappa:
            raise ValueError("cannot merge ensembles of different models")
        return FreeFieldEnsemble(
            self.mode_set,
            self.kappa,
            np.concatenate([self.coeffs, other.coeffs], axis=0),
            self.seeds + other.seeds,
        )


@dataclass(frozen=True)
class FieldFactor:
    """One factor phi(g) = <g, phi>, or its conjugate when conjugate is set."""

    vector: np.ndarray
    conjugate: bool = False


def mode_factor(mode_set: ModeSet, k: int, conjugate: bool = False) -> FieldFactor:
    """Factor selecting the coefficient phi_hat(k) or its conjugate."""
    vector = np.zeros(mode_set.d, dtype=complex)
    vector[mode_set.index(k)] = 1.0
    return FieldFactor(vector, conjugate)


def two_point(bar: FieldFactor, plain: FieldFactor, lam: np.ndarray) -> complex:
    """E[conj(phi(g)) phi(g')] = <g', h^{-1} g>."""
    return complex(np.sum(np.conj(plain.vector) * bar.vector / lam))


def wick_moment_oracle(
    factors: Sequence[FieldFactor], mode_set: ModeSet, kappa: float
) -> complex:
    """
    Free-field moment of a product of factors by enumerating pairings.

    Only conjugate/plain pairs contribute, so the sum over complete pairings
    is a sum over bijections between conjugated and plain factors.

    Raises:
        SizeError: If more than 8 factors are given
    """
    if len(factors) > MAX_WICK_FACTORS:
        raise SizeError(f"at most {MAX_WICK_FACTORS} factors, got {len(factors)}")
    bars = [f for f in factors if f.conjugate]
    plains = [f for f in factors if not f.conjugate]
    if len(bars) != len(plains):
        return 0j
    lam = eigenvalues(mode_set, kappa)
    covariance = np.array([[two_point(b, p, lam) for p in plains] for b in bars])
    total = 0j
    for perm in itertools.permutations(range(len(plains))):
        term = 1 + 0j
        for i, j in enumerate(perm):
            term *= covariance[i, j]
        total += term
    return total


def monomial_values(coeffs: np.ndarray, factors: Sequence[FieldFactor]) -> np.ndarray:
    """Per-sample value of the product of factors for coefficients (n, d)."""
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    result = np.ones(coeffs.shape[0], dtype=complex)
    for factor in factors:
        value = coeffs @ np.conj(factor.vector)
        result *= np.conj(value) if factor.conjugate else value
    return result


def empirical_moment(
    coeffs: np.ndarray, observable: Callable[[np.ndarray], np.ndarray]
) -> Estimate:
    """
    Sample mean and standard error of an observable over an ensemble.

    Args:
        coeffs: Sample coefficients, shape (n, d)
        observable: Vectorized function of the coefficient array

    Raises:
        DegenerateEnsembleError: If the ensemble is empty
    """
    coeffs = np.asarray(coeffs)
    if coeffs.shape[0] == 0:
        raise DegenerateEnsembleError("cannot estimate a moment on an empty ensemble")
    return mean_estimate(np.asarray(observable(coeffs)))


def truncated_trace_inverse(mode_set: ModeSet, kappa: float) -> float:
    """sum_{|k| <= k_max} 1/lambda_k."""
    return float(np.sum(1.0 / eigenvalues(mode_set, kappa)))


def trace_inverse(kappa: float) -> float:
    """Tr(h^{-1}) over all modes: coth(sqrt(kappa)/2) / (2 sqrt(kappa))."""
    root = math.sqrt(kappa)
    return 1.0 / (2.0 * root * math.tanh(root / 2.0))
