"""Normalized profiles U for delta approximations w(x) = U([x]/eps)/eps."""

from abc import ABC, abstractmethod
from typing import Any, Callable, Dict, Optional

import numpy as np
from scipy.integrate import quad

from nlsgibbs.exceptions import NormalizationError

NORMALIZATION_TOLERANCE = 1e-10


class Profile(ABC):
    """An even function on [-1/2, 1/2] with integral -1."""

    name: str = ""

    @abstractmethod
    def __call__(self, y: np.ndarray) -> np.ndarray:
        """Profile values; zero outside [-1/2, 1/2]."""
        pass

    @abstractmethod
    def transform(self, xi: np.ndarray) -> np.ndarray:
        """Continuous Fourier transform int U(y) e^{-2 pi i xi y} dy."""
        pass

    @abstractmethod
    def sup(self) -> float:
        """max |U|."""
        pass

    def abs_integral(self) -> float:
        """int |U|; equals 1 for non-positive profiles."""
        return 1.0

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name}


class TriangleProfile(Profile):
    """U(y) = -(1/b)(1 - |y|/b) on |y| <= b with b = 1/2."""

    name = "triangle"
    half_width = 0.5

    def __call__(self, y: np.ndarray) -> np.ndarray:
        b = self.half_width
        y = np.abs(np.asarray(y, dtype=float))
        return np.where(y <= b, -(1.0 / b) * (1.0 - y / b), 0.0)

    def transform(self, xi: np.ndarray) -> np.ndarray:
        return -np.sinc(self.half_width * np.asarray(xi, dtype=float)) ** 2

    def sup(self) -> float:
        return 1.0 / self.half_width


class BoxProfile(Profile):
    """U = -1 on [-1/2, 1/2)."""

    name = "box"

    def __call__(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        return np.where((y >= -0.5) & (y < 0.5), -1.0, 0.0)

    def transform(self, xi: np.ndarray) -> np.ndarray:
        return -np.sinc(np.asarray(xi, dtype=float))

    def sup(self) -> float:
        return 1.0


class CallableProfile(Profile):
    """
    User supplied profile, integrated by adaptive quadrature.

    The function must be even and supported in [-1/2, 1/2]; it need not be
    non-positive.
    """

    name = "callable"

    def __init__(self, func: Callable[[float], float], label: str = "callable"):
        self.func = func
        self.label = label
        integral, _ = quad(lambda y: float(func(y)), -0.5, 0.5, limit=200)
        if abs(integral + 1.0) > NORMALIZATION_TOLERANCE:
            raise NormalizationError(
                f"profile '{label}' integrates to {integral}, expected -1"
            )
        self._abs_integral, _ = quad(
            lambda y: abs(float(func(y))), -0.5, 0.5, limit=200
        )
        dense = np.linspace(-0.5, 0.5, 20001)
        self._sup = float(np.max(np.abs([func(y) for y in dense])))

    def __call__(self, y: np.ndarray) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        inside = (y >= -0.5) & (y <= 0.5)
        values = np.vectorize(lambda t: float(self.func(t)))(np.where(inside, y, 0.0))
        return np.where(inside, values, 0.0)

    def transform(self, xi: np.ndarray) -> np.ndarray:
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.empty_like(xi)
        for i, frequency in enumerate(xi):
            # Even profile: twice the cosine transform on [0, 1/2].
            value, _ = quad(
                lambda y: float(self.func(y)),
                0.0,
                0.5,
                weight="cos",
                wvar=2.0 * np.pi * frequency,
                limit=200,
            )
            out[i] = 2.0 * value
        return out

    def sup(self) -> float:
        return self._sup

    def abs_integral(self) -> float:
        return float(self._abs_integral)

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "label": self.label}


PROFILES: Dict[str, Callable[[], Profile]] = {
    TriangleProfile.name: TriangleProfile,
    BoxProfile.name: BoxProfile,
}


def get_profile(name: Optional[str]) -> Profile:
    """
    Look up a built-in profile by name (default: triangle).

    Raises:
        ValueError: If the name is unknown
    """
    key = name or TriangleProfile.name
    if key not in PROFILES:
        raise ValueError(
            f"unknown delta profile '{key}', expected one of {sorted(PROFILES)}"
        )
    return PROFILES[key]()
