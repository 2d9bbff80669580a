"""Custom exceptions for nlsgibbs."""

from typing import Any, List, Optional


class NLSGibbsError(Exception):
    """Base exception for all nlsgibbs errors."""

    pass


class DomainError(NLSGibbsError):
    """Raised when a parameter lies outside its mathematical domain."""

    pass


class AliasingError(NLSGibbsError):
    """Raised when a grid is too small to represent a mode set losslessly."""

    pass


class PrecisionError(NLSGibbsError):
    """Raised when a requested quantity cannot be computed exactly on a grid."""

    pass


class NormalizationError(NLSGibbsError):
    """Raised when a delta profile does not integrate to -1."""

    pass


class PotentialError(NLSGibbsError):
    """Raised when a potential is malformed or lacks a requested representation."""

    pass


class SizeError(NLSGibbsError):
    """Raised when a computation would exceed a configured size guard."""

    pass


class SamplingError(NLSGibbsError):
    """Raised when Monte Carlo sampling produces an unusable sample."""

    def __init__(self, message: str, sample_index: Optional[int] = None) -> None:
        super().__init__(message)
        self.sample_index = sample_index


class DegenerateEnsembleError(NLSGibbsError):
    """Raised when every weight of a Gibbs ensemble vanishes."""

    pass


class DegenerateStateError(NLSGibbsError):
    """Raised when a quantum thermal state has zero trace."""

    pass


class TruncationError(NLSGibbsError):
    """Raised when a Fock basis truncation would silently change a trace."""

    pass


class QuadratureError(NLSGibbsError):
    """Raised when a numerical quadrature fails to converge."""

    pass


class BlowUpError(NLSGibbsError):
    """Raised when a flow produces a non-finite state."""

    def __init__(
        self, message: str, last_state: Any = None, last_time: Optional[float] = None
    ) -> None:
        super().__init__(message)
        self.last_state = last_state
        self.last_time = last_time


class InternalConsistencyError(NLSGibbsError):
    """Raised when an assembled object violates a structural invariant."""

    pass


class ValidationError(NLSGibbsError):
    """Raised when scenario configuration validation fails."""

    def __init__(self, errors: List[str]) -> None:
        super().__init__("; ".join(errors))
        self.errors = list(errors)
