"""Delta interaction w = -delta and its bounded approximations."""

from typing import Any, Dict, Optional

import numpy as np

from nlsgibbs.exceptions import DomainError, NormalizationError, PotentialError
from nlsgibbs.potentials.base import Potential
from nlsgibbs.potentials.profiles import Profile, get_profile

MASS_TOLERANCE = 1e-8
POINTS_ACROSS_SUPPORT = 32


def wrap(x: np.ndarray) -> np.ndarray:
    """Representative [x] of x in [-1/2, 1/2)."""
    return np.mod(np.asarray(x, dtype=float) + 0.5, 1.0) - 0.5


class ExactDelta(Potential):
    """w = sign * delta; the focusing local interaction has sign -1."""

    kind = "delta"

    def __init__(self, sign: int = -1):
        if sign not in (-1, 1):
            raise PotentialError(f"delta sign must be -1 or 1, got {sign}")
        self.sign = int(sign)

    def fourier_coefficients(self, up_to: int) -> np.ndarray:
        return np.full(2 * up_to + 1, float(self.sign))

    def grid_samples(self, n_x: int) -> np.ndarray:
        raise PotentialError("the delta interaction has no pointwise samples")

    def sup_norm(self) -> float:
        return float("inf")

    def l1_norm(self) -> float:
        return 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "sign": self.sign}


def default_resolution(epsilon: float) -> int:
    """Smallest power of two with at least 32 grid points across width eps."""
    n_x = 64
    while n_x * epsilon < POINTS_ACROSS_SUPPORT:
        n_x *= 2
    return n_x


class DeltaApprox(Potential):
    """
    w_eps(x) = U([x]/eps)/eps for a normalized even profile U.

    Since U lives on [-1/2, 1/2] and eps <= 1, w_hat_eps(m) = U_hat(m eps).

    Raises:
        DomainError: If epsilon is outside (0, 1]
        NormalizationError: If int w_eps differs from -1 by more than 1e-8
    """

    kind = "delta_approx"

    def __init__(
        self,
        epsilon: float,
        profile: Optional[Profile] = None,
        n_x: Optional[int] = None,
    ):
        if not 0.0 < epsilon <= 1.0:
            raise DomainError(f"delta approximation needs 0 < eps <= 1, got {epsilon}")
        self.epsilon = float(epsilon)
        self.profile = profile if profile is not None else get_profile(None)
        self.n_x = int(n_x) if n_x is not None else default_resolution(self.epsilon)
        mass = self.mass()
        if abs(mass + 1.0) > MASS_TOLERANCE:
            raise NormalizationError(
                f"delta approximation has mass {mass}, expected -1"
            )

    def mass(self) -> float:
        """int w_eps dx, which must be -1."""
        return float(self.profile.transform(np.array([0.0]))[0])

    def fourier_coefficients(self, up_to: int) -> np.ndarray:
        m = np.arange(-up_to, up_to + 1, dtype=float)
        return np.asarray(self.profile.transform(m * self.epsilon), dtype=float)

    def grid_samples(self, n_x: Optional[int] = None) -> np.ndarray:
        size = self.n_x if n_x is None else n_x
        x = -0.5 + np.arange(size) / size
        return self.profile(wrap(x) / self.epsilon) / self.epsilon

    def sup_norm(self) -> float:
        return self.profile.sup() / self.epsilon

    def l1_norm(self) -> float:
        return self.profile.abs_integral()

    def to_dict(self) -> Dict[str, Any]:
        return {
            "kind": self.kind,
            "epsilon": self.epsilon,
            "profile": self.profile.name,
            "n_x": self.n_x,
        }


def build_delta_approx(
    profile: Optional[Profile], epsilon: float, n_x: Optional[int] = None
) -> DeltaApprox:
    """
    Build w_eps from a profile and check its mass.

    Args:
        profile: Even profile on [-1/2, 1/2] with integral -1 (default: triangle)
        epsilon: Width in (0, 1]
        n_x: Sampling resolution (default: 32 points across the support)

    Returns:
        DeltaApprox potential

    Raises:
        DomainError: If epsilon is outside (0, 1]
        NormalizationError: If int w_eps differs from -1 by more than 1e-8
    """
    return DeltaApprox(epsilon, profile, n_x)
