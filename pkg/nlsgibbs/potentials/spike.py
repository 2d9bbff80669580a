"""Unbounded integrable spike w(x) = -A |[x]|^{-alpha}."""

from functools import lru_cache
from typing import Any, Dict

import numpy as np
from scipy.integrate import quad

from nlsgibbs.exceptions import PotentialError
from nlsgibbs.potentials.base import Potential, symmetric_from_half
from nlsgibbs.potentials.delta import wrap


@lru_cache(maxsize=4096)
def _half_coefficient(alpha: float, m: int) -> float:
    """2 int_0^{1/2} x^{-alpha} cos(2 pi m x) dx."""
    if m == 0:
        return 2.0 * 0.5 ** (1.0 - alpha) / (1.0 - alpha)
    value, _ = quad(
        lambda x: np.cos(2.0 * np.pi * m * x),
        0.0,
        0.5,
        weight="alg",
        wvar=(-alpha, 0.0),
        limit=400,
    )
    return 2.0 * value


class PowerSpike(Potential):
    """
    Focusing power-law spike, in L^1 but not L^inf.

    The grid sample at x = 0 is the cell average so every sample is finite.
    """

    kind = "power_spike"

    def __init__(self, amplitude: float, exponent: float):
        if not amplitude > 0:
            raise PotentialError(f"spike amplitude must be positive, got {amplitude}")
        if not 0.0 < exponent < 1.0:
            raise PotentialError(f"spike exponent must lie in (0, 1), got {exponent}")
        self.amplitude = float(amplitude)
        self.exponent = float(exponent)

    def fourier_coefficients(self, up_to: int) -> np.ndarray:
        half = np.array(
            [_half_coefficient(self.exponent, m) for m in range(up_to + 1)]
        )
        return -self.amplitude * symmetric_from_half(half)

    def grid_samples(self, n_x: int) -> np.ndarray:
        x = np.abs(wrap(-0.5 + np.arange(n_x) / n_x))
        alpha = self.exponent
        values = np.empty(n_x)
        singular = x == 0.0
        values[~singular] = x[~singular] ** (-alpha)
        half_cell = 0.5 / n_x
        values[singular] = half_cell ** (-alpha) / (1.0 - alpha)
        return -self.amplitude * values

    def sup_norm(self) -> float:
        return float("inf")

    def l1_norm(self) -> float:
        return self.amplitude * _half_coefficient(self.exponent, 0)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "amplitude": self.amplitude,
            "exponent": self.exponent,
        }
