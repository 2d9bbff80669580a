"""Bounded potentials: constants, Fourier series, grid samples and L1 clipping."""

from typing import Any, Dict, Sequence

import numpy as np

from nlsgibbs.exceptions import DomainError, PotentialError
from nlsgibbs.potentials.base import Potential, symmetric_from_half
from nlsgibbs.spectral import coefficients_to_grid, grid_to_coefficients

EVENNESS_TOLERANCE = 1e-12


class Constant(Potential):
    """w(x) = c."""

    kind = "constant"

    def __init__(self, value: float):
        self.value = float(value)
        if not np.isfinite(self.value):
            raise PotentialError("constant potential must be finite")

    def fourier_coefficients(self, up_to: int) -> np.ndarray:
        coeffs = np.zeros(2 * up_to + 1)
        coeffs[up_to] = self.value
        return coeffs

    def grid_samples(self, n_x: int) -> np.ndarray:
        return np.full(n_x, self.value)

    def sup_norm(self) -> float:
        return abs(self.value)

    def l1_norm(self) -> float:
        return abs(self.value)

    @property
    def is_zero(self) -> bool:
        return self.value == 0.0

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "value": self.value}


class FourierCoeffs(Potential):
    """
    Trigonometric polynomial given by w_hat(m) for m = 0..M.

    Evenness is built in: w_hat(-m) = w_hat(m).
    """

    kind = "fourier"

    def __init__(self, half_coeffs: Sequence[float]):
        raw = np.asarray(half_coeffs)
        if raw.ndim != 1 or raw.size == 0:
            raise PotentialError("Fourier potential needs a non-empty 1-D sequence")
        if np.iscomplexobj(raw) and np.any(np.abs(raw.imag) > EVENNESS_TOLERANCE):
            raise PotentialError("Fourier coefficients of an even potential are real")
        self.half_coeffs = np.real(raw).astype(float)
        if not np.all(np.isfinite(self.half_coeffs)):
            raise PotentialError("Fourier coefficients must be finite")

    @classmethod
    def from_symmetric(cls, coeffs: Sequence[float]) -> "FourierCoeffs":
        """
        Build from coefficients for m = -M..M.

        Raises:
            PotentialError: If the sequence is not even and real
        """
        full = np.asarray(coeffs)
        if full.ndim != 1 or full.size % 2 == 0:
            raise PotentialError("symmetric coefficients need odd length")
        if np.any(np.abs(full - full[::-1]) > EVENNESS_TOLERANCE):
            raise PotentialError("coefficients are not even in m")
        return cls(full[full.size // 2 :])

    @property
    def order(self) -> int:
        """Largest m with a stored coefficient."""
        return self.half_coeffs.size - 1

    def fourier_coefficients(self, up_to: int) -> np.ndarray:
        half = np.zeros(up_to + 1)
        n = min(up_to, self.order) + 1
        half[:n] = self.half_coeffs[:n]
        return symmetric_from_half(half)

    def grid_samples(self, n_x: int) -> np.ndarray:
        coeffs = symmetric_from_half(self.half_coeffs)
        return coefficients_to_grid(coeffs, self.order, n_x).real

    def sup_norm(self) -> float:
        # sum |w_hat| bounds the sup and is attained for cos-type series
        return float(np.abs(symmetric_from_half(self.half_coeffs)).sum())

    def l1_norm(self) -> float:
        n_x = max(4096, 16 * (self.order + 1))
        return float(np.mean(np.abs(self.grid_samples(n_x))))

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.half_coeffs == 0.0))

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "coeffs": self.half_coeffs.tolist()}


class GridSamples(Potential):
    """
    Potential given by real, even samples on the uniform grid.

    Fourier coefficients are the trapezoid values for |m| < n_x/2 and zero
    beyond; pointwise values at other resolutions are resampled from them.
    """

    kind = "grid"

    def __init__(self, values: Sequence[float]):
        raw = np.asarray(values)
        if raw.ndim != 1 or raw.size < 2:
            raise PotentialError("grid potential needs at least two samples")
        if np.iscomplexobj(raw):
            if np.any(np.abs(raw.imag) > EVENNESS_TOLERANCE):
                raise PotentialError("grid potential must be real")
            raw = raw.real
        values_arr = raw.astype(float)
        if not np.all(np.isfinite(values_arr)):
            raise PotentialError("grid potential samples must be finite")
        n = values_arr.size
        if n & (n - 1):
            raise PotentialError(f"grid size must be a power of two, got {n}")
        mirrored = values_arr[(-np.arange(n)) % n]
        scale = max(1.0, float(np.max(np.abs(values_arr))))
        if np.any(np.abs(values_arr - mirrored) > EVENNESS_TOLERANCE * scale):
            raise PotentialError("grid potential must be even: w(x) = w(-x)")
        # symmetrize away rounding so that coefficients are exactly real
        self.values = 0.5 * (values_arr + mirrored)

    @property
    def n_x(self) -> int:
        return int(self.values.size)

    def _max_mode(self) -> int:
        return self.n_x // 2 - 1

    def fourier_coefficients(self, up_to: int) -> np.ndarray:
        usable = min(up_to, self._max_mode())
        coeffs = np.zeros(2 * up_to + 1)
        computed = grid_to_coefficients(self.values, usable).real
        coeffs[up_to - usable : up_to + usable + 1] = computed
        return coeffs

    def grid_samples(self, n_x: int) -> np.ndarray:
        if n_x == self.n_x:
            return self.values.copy()
        if self.n_x % n_x == 0:
            return self.values[:: self.n_x // n_x].copy()
        max_mode = min(self._max_mode(), (n_x - 1) // 2)
        coeffs = self.fourier_coefficients(max_mode)
        return coefficients_to_grid(coeffs, max_mode, n_x).real

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.values)))

    def l1_norm(self) -> float:
        return float(np.mean(np.abs(self.values)))

    @property
    def is_zero(self) -> bool:
        return bool(np.all(self.values == 0.0))

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "values": self.values.tolist()}


class L1Clip(GridSamples):
    """w * 1{|w| <= 1/eps} sampled on a grid of n_x points."""

    kind = "l1clip"

    def __init__(self, base: Potential, epsilon: float, n_x: int = 4096):
        if not epsilon > 0:
            raise DomainError(f"clipping parameter must be positive, got {epsilon}")
        self.base = base
        self.epsilon = float(epsilon)
        samples = base.grid_samples(n_x)
        kept = np.abs(samples) <= 1.0 / self.epsilon
        super().__init__(np.where(kept, samples, 0.0))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "base": self.base.to_dict(),
            "epsilon": self.epsilon,
            "n_x": self.n_x,
        }


def clip_L1(w: Potential, epsilon: float, n_x: int = 4096) -> Potential:  # noqa: N802
    """
    Clip a potential to |w| <= 1/epsilon.

    Args:
        w: Potential with grid samples
        epsilon: Positive clipping parameter
        n_x: Sampling resolution

    Returns:
        L1Clip potential; sup norm at most 1/epsilon

    Raises:
        DomainError: If epsilon <= 0
        PotentialError: If w has no pointwise values
    """
    return L1Clip(w, epsilon, n_x)
