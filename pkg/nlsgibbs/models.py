"""Data models shared across nlsgibbs modules."""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Union

import numpy as np


class NormKind(Enum):
    """Norms available for fields on the torus."""

    L2 = "L2"
    L4 = "L4"
    HS = "Hs"


class SweepKind(Enum):
    """Sweep variables of an experiment report."""

    TAU = "tau"
    EPSILON = "epsilon"
    TIME = "time"
    ORDER = "order"
    COUPLING = "coupling"
    K_MAX = "k_max"


@dataclass(frozen=True)
class ModeSet:
    """Symmetric set of Fourier modes {-k_max, ..., k_max}."""

    k_max: int

    def __post_init__(self) -> None:
        """Validate mode set."""
        if not isinstance(self.k_max, (int, np.integer)) or isinstance(
            self.k_max, bool
        ):
            raise TypeError("ModeSet.k_max must be an integer")
        if self.k_max < 0:
            raise ValueError("ModeSet.k_max must be non-negative")

    @property
    def d(self) -> int:
        """Number of modes, always odd."""
        return 2 * int(self.k_max) + 1

    @property
    def modes(self) -> np.ndarray:
        """Modes in order -k_max..k_max."""
        return np.arange(-self.k_max, self.k_max + 1)

    def index(self, k: int) -> int:
        """Position of mode k in the ordered mode list."""
        if abs(k) > self.k_max:
            raise KeyError(f"mode {k} outside mode set with k_max={self.k_max}")
        return int(k) + int(self.k_max)

    def __contains__(self, k: object) -> bool:
        return isinstance(k, (int, np.integer)) and abs(int(k)) <= self.k_max

    def __len__(self) -> int:
        return self.d


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Fourier coefficients of a band-limited field on the torus."""

    mode_set: ModeSet
    coeffs: np.ndarray

    def __post_init__(self) -> None:
        """Validate spectral field."""
        if not isinstance(self.mode_set, ModeSet):
            raise TypeError("SpectralField.mode_set must be a ModeSet instance")
        coeffs = np.asarray(self.coeffs, dtype=complex)
        if coeffs.shape != (self.mode_set.d,):
            raise ValueError(
                f"SpectralField.coeffs must have length {self.mode_set.d}, "
                f"got shape {coeffs.shape}"
            )
        if not np.all(np.isfinite(coeffs)):
            raise ValueError("SpectralField.coeffs must be finite")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coeffs", coeffs)

    def coefficient(self, k: int) -> complex:
        """Coefficient of mode k."""
        return complex(self.coeffs[self.mode_set.index(k)])

    @classmethod
    def zeros(cls, mode_set: ModeSet) -> "SpectralField":
        """Field with all coefficients zero."""
        return cls(mode_set, np.zeros(mode_set.d, dtype=complex))

    @classmethod
    def from_modes(
        cls, mode_set: ModeSet, amplitudes: Dict[int, complex]
    ) -> "SpectralField":
        """Field with the given amplitudes on selected modes."""
        coeffs = np.zeros(mode_set.d, dtype=complex)
        for k, amplitude in amplitudes.items():
            coeffs[mode_set.index(k)] = amplitude
        return cls(mode_set, coeffs)


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True, eq=False)
class GridField:
    """Field values on the uniform grid x_j = -1/2 + j/n_x."""

    n_x: int
    values: np.ndarray

    def __post_init__(self) -> None:
        """Validate grid field."""
        if not _is_power_of_two(int(self.n_x)):
            raise ValueError(f"GridField.n_x must be a power of two, got {self.n_x}")
        values = np.asarray(self.values, dtype=complex)
        if values.shape != (self.n_x,):
            raise ValueError(
                f"GridField.values must have length {self.n_x}, got {values.shape}"
            )
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def points(self) -> np.ndarray:
        """Grid points in [-1/2, 1/2)."""
        return grid_points(self.n_x)


def grid_points(n_x: int) -> np.ndarray:
    """Uniform grid x_j = -1/2 + j/n_x on the torus."""
    return -0.5 + np.arange(n_x) / n_x


@dataclass(frozen=True)
class Estimate:
    """A Monte Carlo or deterministic estimate with its standard error."""

    value: Union[float, complex]
    std_error: float
    n_samples: int = 0

    def deviation(self, reference: Union[float, complex]) -> float:
        """Distance to a reference value in units of the standard error."""
        gap = abs(self.value - reference)
        if self.std_error == 0.0:
            return 0.0 if gap == 0.0 else math.inf
        return float(gap / self.std_error)

    def agrees_with(self, reference: Union[float, complex], sigmas: float) -> bool:
        """Check the estimate lies within `sigmas` standard errors of a value."""
        return abs(self.value - reference) <= sigmas * self.std_error

    def to_dict(self) -> Dict[str, Any]:
        """Serialize to a JSON-compatible dictionary."""
        value: Any = self.value
        if isinstance(value, complex):
            value = [value.real, value.imag] if value.imag != 0.0 else value.real
        return {
            "value": value,
            "std_error": self.std_error,
            "n_samples": self.n_samples,
        }


@dataclass
class ReportPoint:
    """One row of an experiment report: a metric at a sweep value."""

    sweep_value: float
    metric: str
    estimate: float
    std_error: float = 0.0
    runtime_s: float = 0.0

    def to_dict(self) -> Dict[str, Any]:
        """Serialize to a JSON-compatible dictionary."""
        return {
            "sweep_value": self.sweep_value,
            "metric": self.metric,
            "estimate": self.estimate,
            "std_error": self.std_error,
            "runtime_s": self.runtime_s,
        }


@dataclass
class ExperimentReport:
    """Structured record of a sweep study."""

    name: str
    sweep_kind: SweepKind
    scenario: Dict[str, Any] = field(default_factory=dict)
    config_hash: str = ""
    sweep_values: List[float] = field(default_factory=list)
    points: List[ReportPoint] = field(default_factory=list)
    metrics: Dict[str, Any] = field(default_factory=dict)
    flags: List[str] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        """Validate report."""
        if not isinstance(self.sweep_kind, SweepKind):
            raise TypeError("ExperimentReport.sweep_kind must be a SweepKind")

    def add_point(
        self,
        sweep_value: float,
        metric: str,
        estimate: float,
        std_error: float = 0.0,
        runtime_s: float = 0.0,
    ) -> None:
        """Append one metric value to the report."""
        if math.isnan(std_error):
            raise ValueError("std_error must be a number")
        self.points.append(
            ReportPoint(
                float(sweep_value),
                metric,
                float(estimate),
                float(std_error),
                float(runtime_s),
            )
        )

    def series(self, metric: str) -> List[ReportPoint]:
        """All points of one metric, in sweep order."""
        return [point for point in self.points if point.metric == metric]

    def values(self, metric: str) -> List[float]:
        """Estimates of one metric, in sweep order."""
        return [point.estimate for point in self.series(metric)]

    def flag(self, message: str) -> None:
        """Record an inconclusive or warning flag."""
        if message not in self.flags:
            self.flags.append(message)

    def is_conclusive(self) -> bool:
        """True when no flag was raised during the study."""
        return not self.flags

    def to_dict(self) -> Dict[str, Any]:
        """Serialize to a JSON-compatible dictionary."""
        return {
            "name": self.name,
            "sweep_kind": self.sweep_kind.value,
            "scenario": self.scenario,
            "config_hash": self.config_hash,
            "sweep_values": list(self.sweep_values),
            "points": [point.to_dict() for point in self.points],
            "metrics": self.metrics,
            "flags": list(self.flags),
            "timings": dict(self.timings),
        }
