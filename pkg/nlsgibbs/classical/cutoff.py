"""Mass cutoff functions f with 0 <= f <= 1."""

import math
from abc import ABC, abstractmethod
from typing import Any, Dict

import numpy as np

from nlsgibbs.exceptions import DomainError

# f(x) < 2^-60 beyond the effective radius of non-compact cutoffs
NEGLIGIBLE_LOG = 60.0 * math.log(2.0)


class CutoffFunction(ABC):
    """A [0, 1]-valued function of the mass."""

    kind: str = ""

    @abstractmethod
    def __call__(self, x: np.ndarray) -> np.ndarray:
        """Cutoff values at masses x."""
        pass

    @property
    @abstractmethod
    def radius(self) -> float:
        """Radius beyond which f vanishes (or is below 2^-60)."""
        pass

    @property
    def is_compact(self) -> bool:
        """Whether f is exactly zero beyond its radius."""
        return False

    @abstractmethod
    def to_dict(self) -> Dict[str, Any]:
        """Tagged JSON-compatible description."""
        pass


def _psi(t: np.ndarray) -> np.ndarray:
    safe = np.where(t > 0.0, t, 1.0)
    return np.where(t > 0.0, np.exp(-1.0 / safe), 0.0)


class PlateauCutoff(CutoffFunction):
    """
    Smooth compactly supported cutoff.

    f = 1 on [0, plateau*K], f = 0 for |x| >= K, joined by the C-infinity step
    psi(1-s)/(psi(1-s) + psi(s)) with psi(t) = exp(-1/t).
    """

    kind = "plateau"

    def __init__(self, K: float = 4.0, plateau: float = 0.5):  # noqa: N803
        if not K > 0:
            raise DomainError(f"cutoff radius K must be positive, got {K}")
        if not 0.0 < plateau < 1.0:
            raise DomainError(f"plateau fraction must lie in (0, 1), got {plateau}")
        self.K = float(K)
        self.plateau = float(plateau)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.abs(np.asarray(x, dtype=float))
        inner = self.plateau * self.K
        s = np.clip((x - inner) / (self.K - inner), 0.0, 1.0)
        up = _psi(1.0 - s)
        return up / (up + _psi(s))

    @property
    def radius(self) -> float:
        return self.K

    @property
    def is_compact(self) -> bool:
        return True

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "K": self.K, "plateau": self.plateau}


class GaussianCutoff(CutoffFunction):
    """f(x) = exp(-c x^2); not compact, negligible beyond sqrt(60 ln 2 / c)."""

    kind = "gaussian"

    def __init__(self, c: float):
        if not c > 0:
            raise DomainError(f"Gaussian cutoff needs c > 0, got {c}")
        self.c = float(c)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.exp(-self.c * x**2)

    @property
    def radius(self) -> float:
        return math.sqrt(NEGLIGIBLE_LOG / self.c)

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "c": self.c}


class UnitCutoff(CutoffFunction):
    """f = 1; only meaningful for the free theory."""

    kind = "unit"

    def __call__(self, x: np.ndarray) -> np.ndarray:
        return np.ones_like(np.asarray(x, dtype=float))

    @property
    def radius(self) -> float:
        return math.inf

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind}


def cutoff_from_dict(data: Dict[str, Any]) -> CutoffFunction:
    """
    Rebuild a cutoff from its tagged description.

    Raises:
        ValueError: If the kind is unknown or parameters are missing
    """
    kind = data.get("kind", PlateauCutoff.kind)
    if kind == PlateauCutoff.kind:
        return PlateauCutoff(data.get("K", 4.0), data.get("plateau", 0.5))
    if kind == GaussianCutoff.kind:
        if "c" not in data:
            raise ValueError("Gaussian cutoff needs 'c'")
        return GaussianCutoff(data["c"])
    if kind == UnitCutoff.kind:
        return UnitCutoff()
    raise ValueError(f"unknown cutoff kind '{kind}'")
