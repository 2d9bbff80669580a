"""Base class and shared operations for pair interaction potentials."""

from abc import ABC, abstractmethod
from typing import Any, Dict

import numpy as np

from nlsgibbs.exceptions import PotentialError

POSITIVE_TYPE_TOLERANCE = 1e-12


class Potential(ABC):
    """
    Abstract base class for even, real pair potentials w on the torus.

    Subclasses must implement fourier_coefficients, grid_samples, sup_norm,
    l1_norm and to_dict. Coefficients are returned for m = -up_to..up_to.
    """

    kind: str = ""

    @abstractmethod
    def fourier_coefficients(self, up_to: int) -> np.ndarray:
        """
        Fourier coefficients w_hat(m) for |m| <= up_to.

        Args:
            up_to: Largest |m| requested

        Returns:
            Real array of length 2*up_to + 1 in order -up_to..up_to
        """
        pass

    @abstractmethod
    def grid_samples(self, n_x: int) -> np.ndarray:
        """
        Real samples w(x_j) on the grid x_j = -1/2 + j/n_x.

        Raises:
            PotentialError: If the potential has no pointwise values
        """
        pass

    @abstractmethod
    def sup_norm(self) -> float:
        """Upper bound for ||w||_inf (inf for unbounded potentials)."""
        pass

    @abstractmethod
    def l1_norm(self) -> float:
        """||w||_1 (total mass for measures)."""
        pass

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        """Tagged JSON-compatible description."""
        pass

    @property
    def is_bounded(self) -> bool:
        """Whether ||w||_inf is finite."""
        return bool(np.isfinite(self.sup_norm()))

    @property
    def is_zero(self) -> bool:
        """True for the free (w = 0) case."""
        return False

    def __repr__(self) -> str:
        fields = {k: v for k, v in self.to_dict().items() if k != "kind"}
        args = ", ".join(f"{k}={v!r}" for k, v in fields.items())
        return f"{type(self).__name__}({args})"


def symmetric_from_half(half: np.ndarray) -> np.ndarray:
    """Extend coefficients for m = 0..M to m = -M..M by evenness."""
    half = np.asarray(half, dtype=float)
    return np.concatenate([half[:0:-1], half])


def fourier_coefficients(w: Potential, up_to: int) -> np.ndarray:
    """
    Fourier coefficients of w for |m| <= up_to.

    Raises:
        ValueError: If up_to is negative
    """
    if up_to < 0:
        raise ValueError(f"up_to must be non-negative, got {up_to}")
    coeffs = np.asarray(w.fourier_coefficients(int(up_to)), dtype=float)
    if coeffs.shape != (2 * up_to + 1,):
        raise PotentialError(
            f"{type(w).__name__} returned {coeffs.shape[0]} coefficients, "
            f"expected {2 * up_to + 1}"
        )
    return coeffs


def positive_type_check(w: Potential, up_to: int) -> bool:
    """True iff w_hat(m) >= -1e-12 for all |m| <= up_to."""
    return bool(np.all(fourier_coefficients(w, up_to) >= -POSITIVE_TYPE_TOLERANCE))


def value_at_zero(w: Potential, k_max: int) -> float:
    """w(0) of the model truncated to |m| <= 2*k_max."""
    return float(fourier_coefficients(w, 2 * k_max).sum())


def l1_distance(w: Potential, v: Potential, n_x: int = 4096) -> float:
    """Grid approximation of ||w - v||_1."""
    return float(np.mean(np.abs(w.grid_samples(n_x) - v.grid_samples(n_x))))
