"""nlsgibbs - Classical and quantum Gibbs states of the focusing NLS on the torus."""

__version__ = "0.1.0"

from nlsgibbs.exceptions import (
    AliasingError,
    BlowUpError,
    DegenerateEnsembleError,
    DegenerateStateError,
    DomainError,
    InternalConsistencyError,
    NLSGibbsError,
    NormalizationError,
    PotentialError,
    PrecisionError,
    QuadratureError,
    SamplingError,
    SizeError,
    TruncationError,
    ValidationError,
)
from nlsgibbs.models import (
    Estimate,
    ExperimentReport,
    GridField,
    ModeSet,
    NormKind,
    ReportPoint,
    SpectralField,
    SweepKind,
)

__all__ = [
    "AliasingError",
    "BlowUpError",
    "DegenerateEnsembleError",
    "DegenerateStateError",
    "DomainError",
    "InternalConsistencyError",
    "NLSGibbsError",
    "NormalizationError",
    "PotentialError",
    "PrecisionError",
    "QuadratureError",
    "SamplingError",
    "SizeError",
    "TruncationError",
    "ValidationError",
    "Estimate",
    "ExperimentReport",
    "GridField",
    "ModeSet",
    "NormKind",
    "ReportPoint",
    "SpectralField",
    "SweepKind",
    "__version__",
]
