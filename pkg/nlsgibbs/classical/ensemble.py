"""
Importance-sampled truncated Gibbs ensembles.

Samples are drawn from the free field and carry weights e^{-W} f(N), so
rho(X) = sum_i w_i X_i / sum_i w_i. For bounded w the weights are bounded on
supp f, which keeps the ratio estimator's variance finite.
"""

import logging
import math
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from nlsgibbs.classical.cutoff import CutoffFunction, GaussianCutoff, UnitCutoff
from nlsgibbs.classical.energy import interaction_energies, masses
from nlsgibbs.classical.observables import (
    ObservableSpec,
    check_order,
    tensor_power,
)
from nlsgibbs.exceptions import DegenerateEnsembleError, DomainError, SamplingError
from nlsgibbs.free_field import DEFAULT_CHUNK_SIZE, RngStream, complex_normals
from nlsgibbs.models import Estimate, ModeSet
from nlsgibbs.potentials import Potential
from nlsgibbs.spectral import eigenvalues
from nlsgibbs.utils.stats import hermitize, mean_estimate, ratio_estimate

logger = logging.getLogger(__name__)


@dataclass
class GibbsEnsemble:
    """Weighted free-field samples representing e^{-W} f(N) dmu / z."""

    mode_set: ModeSet
    kappa: float
    potential: Potential
    cutoff: CutoffFunction
    coeffs: np.ndarray
    weights: np.ndarray
    interaction: np.ndarray
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Validate ensemble arrays."""
        n = self.coeffs.shape[0]
        if self.weights.shape != (n,) or self.interaction.shape != (n,):
            raise ValueError("weights and interaction must have one entry per sample")
        if np.any(self.weights < 0):
            raise ValueError("weights must be non-negative")

    @property
    def n_samples(self) -> int:
        return int(self.coeffs.shape[0])

    def masses(self) -> np.ndarray:
        """N(phi) per sample."""
        return masses(self.coeffs)

    def partition_function(self) -> Estimate:
        """z = E_mu[e^{-W} f(N)] as the mean weight."""
        return mean_estimate(self.weights)

    def weight_bound(self) -> float:
        """e^{K^2 ||w||_inf / 2} bound on the weights for bounded w."""
        exponent = self.cutoff.radius**2 * self.potential.sup_norm() / 2.0
        return math.exp(exponent) if math.isfinite(exponent) else math.inf

    def observable(self, spec: ObservableSpec) -> np.ndarray:
        """Per-sample values of an observable."""
        return spec.evaluate(
            self.coeffs, self.mode_set.k_max, self.potential, self.kappa
        )


def _check_cutoff(w: Potential, f: CutoffFunction) -> None:
    if isinstance(f, UnitCutoff) and not w.is_zero:
        raise DomainError("the unit cutoff is only allowed for the free theory (w = 0)")
    if isinstance(f, GaussianCutoff):
        if not w.is_bounded:
            raise DomainError("the Gaussian cutoff requires a bounded potential")
        if not f.c > w.sup_norm() / 2.0:
            raise DomainError(
                f"Gaussian cutoff needs c > ||w||_inf/2 = {w.sup_norm() / 2.0}"
            )


def build_ensemble(
    mode_set: ModeSet,
    kappa: float,
    w: Potential,
    f: CutoffFunction,
    n_samples: int,
    rng: RngStream,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
    executor: Optional[Executor] = None,
) -> GibbsEnsemble:
    """
    Draw free-field samples and weight them by e^{-W} f(N).

    Args:
        mode_set: Modes of the truncated model
        kappa: Positive mass parameter
        w: Pair potential
        f: Mass cutoff (UnitCutoff only for w = 0)
        n_samples: Number of samples, at least 1
        rng: Reproducible random stream
        chunk_size: Samples per substream chunk
        executor: Optional pool for chunk-parallel sampling

    Returns:
        GibbsEnsemble with weights and interaction energies

    Raises:
        DomainError: If the cutoff is not admissible for w
        SamplingError: If a weight is not finite
    """
    if n_samples < 1:
        raise ValueError("n_samples must be at least 1")
    _check_cutoff(w, f)
    scale = 1.0 / np.sqrt(eigenvalues(mode_set, kappa))
    k_max = mode_set.k_max
    n_chunks = -(-n_samples // chunk_size)

    def draw(chunk: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        size = min(chunk_size, n_samples - chunk * chunk_size)
        coeffs = complex_normals(rng.generator(chunk), (size, mode_set.d)) * scale
        energy = interaction_energies(coeffs, w, k_max)
        cut = f(masses(coeffs))
        with np.errstate(over="ignore", invalid="ignore"):
            weights = np.where(cut > 0.0, np.exp(-energy) * cut, 0.0)
        return coeffs, energy, weights

    if executor is None:
        parts = [draw(c) for c in range(n_chunks)]
    else:
        parts = list(executor.map(draw, range(n_chunks)))
    coeffs = np.concatenate([p[0] for p in parts], axis=0)
    energy = np.concatenate([p[1] for p in parts])
    weights = np.concatenate([p[2] for p in parts])

    bad = np.flatnonzero(~np.isfinite(weights))
    if bad.size:
        raise SamplingError(
            f"non-finite weight at sample {bad[0]} (W = {energy[bad[0]]})",
            sample_index=int(bad[0]),
        )
    logger.info(
        "built ensemble: %d samples, k_max=%d, acceptance %.3f",
        n_samples,
        k_max,
        float(np.mean(weights > 0)),
    )
    meta = {
        "potential": w.to_dict(),
        "cutoff": f.to_dict(),
        "kappa": kappa,
        "k_max": k_max,
        "seed": rng.seed,
        "stream_id": rng.stream_id,
        "count": n_samples,
        "chunk_size": chunk_size,
    }
    return GibbsEnsemble(mode_set, kappa, w, f, coeffs, weights, energy, meta)


def expectation_rho(
    ensemble: GibbsEnsemble, observable: Union[ObservableSpec, np.ndarray]
) -> Estimate:
    """
    rho(X) = sum w_i X_i / sum w_i with a jackknife standard error.

    Args:
        ensemble: Weighted ensemble
        observable: ObservableSpec or precomputed per-sample values

    Raises:
        DegenerateEnsembleError: If all weights are zero
    """
    if isinstance(observable, ObservableSpec):
        values = ensemble.observable(observable)
    else:
        values = np.asarray(observable)
    if not np.any(ensemble.weights > 0):
        raise DegenerateEnsembleError("all ensemble weights are zero")
    return ratio_estimate(values, ensemble.weights)


@dataclass
class CorrelationEstimate:
    """Hermitian correlation matrix with elementwise standard errors."""

    matrix: np.ndarray
    std_error: np.ndarray
    p: int
    n_samples: int

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.matrix).min())

    def max_std_error(self) -> float:
        return float(self.std_error.max())


def weighted_correlation(
    coeffs: np.ndarray, weights: np.ndarray, p: int
) -> CorrelationEstimate:
    """
    gamma_p(k; l) = sum_i w_i v_k conj(v_l) / sum_i w_i with v = phi^{(x)p}.

    Standard errors use the delta method for ratio estimators,
    var = sum w^2 |X - R|^2 / (sum w)^2, expanded into matrix products.
    """
    check_order(p)
    weights = np.asarray(weights, dtype=float)
    total = weights.sum()
    if total == 0.0:
        raise DegenerateEnsembleError("all ensemble weights are zero")
    vectors = tensor_power(coeffs, p)
    ratio = (vectors.T * weights) @ np.conj(vectors) / total
    w2 = weights**2
    abs2 = np.abs(vectors) ** 2
    second = (abs2.T * w2) @ abs2
    cross = (vectors.T * w2) @ np.conj(vectors)
    spread = (
        second
        - 2.0 * np.real(np.conj(ratio) * cross)
        + np.abs(ratio) ** 2 * w2.sum()
    )
    std_error = np.sqrt(np.clip(spread, 0.0, None)) / total
    return CorrelationEstimate(hermitize(ratio), std_error, p, int(weights.size))


def correlation_gamma_p(ensemble: GibbsEnsemble, p: int) -> CorrelationEstimate:
    """
    Classical p-particle correlation function of a weighted ensemble.

    Raises:
        SizeError: If p > 2
        DegenerateEnsembleError: If all weights are zero
    """
    return weighted_correlation(ensemble.coeffs, ensemble.weights, p)
