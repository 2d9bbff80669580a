"""Truncated focusing Gibbs measure: ensembles, observables and series."""

from nlsgibbs.classical.cutoff import (
    CutoffFunction,
    GaussianCutoff,
    PlateauCutoff,
    UnitCutoff,
    cutoff_from_dict,
)
from nlsgibbs.classical.energy import (
    hamiltonian_energy,
    interaction_energies,
    interaction_energy,
    mass,
    masses,
)
from nlsgibbs.classical.ensemble import (
    CorrelationEstimate,
    GibbsEnsemble,
    build_ensemble,
    correlation_gamma_p,
    expectation_rho,
)
from nlsgibbs.classical.observables import (
    ObservableKind,
    ObservableSpec,
    identity_kernel,
    kernel_norm,
    mode_projector,
    theta_values,
)
from nlsgibbs.classical.oracle import density_oracle_constant_w
from nlsgibbs.classical.series import (
    remainder_bound,
    series_bound,
    series_coefficient_a_m,
    series_coefficients,
    series_partial_sum,
    series_remainder,
    shifted_series_coefficient_b_m,
)
from nlsgibbs.classical.tail import tail_moment_check

__all__ = [
    "CorrelationEstimate",
    "CutoffFunction",
    "GaussianCutoff",
    "GibbsEnsemble",
    "ObservableKind",
    "ObservableSpec",
    "PlateauCutoff",
    "UnitCutoff",
    "build_ensemble",
    "correlation_gamma_p",
    "cutoff_from_dict",
    "density_oracle_constant_w",
    "expectation_rho",
    "hamiltonian_energy",
    "identity_kernel",
    "interaction_energies",
    "interaction_energy",
    "kernel_norm",
    "mass",
    "masses",
    "mode_projector",
    "remainder_bound",
    "series_bound",
    "series_coefficient_a_m",
    "series_coefficients",
    "series_partial_sum",
    "series_remainder",
    "shifted_series_coefficient_b_m",
    "tail_moment_check",
    "theta_values",
]
