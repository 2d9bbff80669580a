"""Mass, interaction energy and Hamiltonian of band-limited fields."""

from typing import Optional

import numpy as np

from nlsgibbs.exceptions import PrecisionError
from nlsgibbs.models import ModeSet, SpectralField
from nlsgibbs.potentials import Potential, fourier_coefficients
from nlsgibbs.spectral import (
    coefficients_to_grid,
    default_grid_size,
    eigenvalues,
    grid_to_coefficients,
)


def masses(coeffs: np.ndarray) -> np.ndarray:
    """N(phi) = sum_k |phi_hat(k)|^2 along the last axis."""
    return np.sum(np.abs(np.asarray(coeffs)) ** 2, axis=-1)


def mass(field: SpectralField) -> float:
    """Squared L2 norm of a field."""
    return float(masses(field.coeffs))


def density_coefficients(
    coeffs: np.ndarray, k_max: int, n_x: Optional[int] = None
) -> np.ndarray:
    """
    Fourier coefficients of |phi|^2 for |m| <= 2*k_max.

    Raises:
        PrecisionError: If n_x < 4*k_max + 1 (the density would alias)
    """
    size = n_x if n_x is not None else default_grid_size(k_max)
    if size < 4 * k_max + 1:
        raise PrecisionError(
            f"interaction needs at least {4 * k_max + 1} grid points, got {size}"
        )
    density = np.abs(coefficients_to_grid(coeffs, k_max, size)) ** 2
    return grid_to_coefficients(density, 2 * k_max)


def interaction_energies(
    coeffs: np.ndarray, w: Potential, k_max: int, n_x: Optional[int] = None
) -> np.ndarray:
    """
    W(phi) = 1/2 sum_{|m| <= 2 k_max} w_hat(m) |rho_hat(m)|^2 for a batch.

    For w = -delta this is -||phi||_4^4 / 2.
    """
    w_hat = fourier_coefficients(w, 2 * k_max)
    rho_hat = density_coefficients(coeffs, k_max, n_x)
    return 0.5 * np.sum(w_hat * np.abs(rho_hat) ** 2, axis=-1)


def interaction_energy(
    field: SpectralField, w: Potential, n_x: Optional[int] = None
) -> float:
    """
    Interaction energy of a band-limited field.

    Args:
        field: Field on the mode set
        w: Pair potential
        n_x: Evaluation grid (default: smallest alias-free grid)

    Returns:
        1/2 int int |phi(x)|^2 w(x - y) |phi(y)|^2 dx dy

    Raises:
        PrecisionError: If the grid is too small for the quartic form
    """
    return float(interaction_energies(field.coeffs, w, field.mode_set.k_max, n_x))


def direct_interaction_energy(field: SpectralField, w: Potential, n_x: int) -> float:
    """Brute-force double sum over grid pairs, for cross-checks."""
    density = np.abs(coefficients_to_grid(field.coeffs, field.mode_set.k_max, n_x)) ** 2
    samples = w.grid_samples(n_x)
    j = np.arange(n_x)
    # x_i - x_j = (i - j)/n_x sits at grid index (i - j + n_x/2) mod n_x
    kernel = samples[(j[:, None] - j[None, :] + n_x // 2) % n_x]
    return float(0.5 * density @ kernel @ density / n_x**2)


def free_energies(coeffs: np.ndarray, kappa: float, k_max: int) -> np.ndarray:
    """sum_k lambda_k |phi_hat(k)|^2 for a batch."""
    lam = eigenvalues(ModeSet(k_max), kappa)
    return np.sum(lam * np.abs(np.asarray(coeffs)) ** 2, axis=-1)


def hamiltonian_energy(
    field: SpectralField, w: Potential, kappa: float, n_x: Optional[int] = None
) -> float:
    """H(phi) = sum_k lambda_k |phi_hat(k)|^2 + W(phi)."""
    k_max = field.mode_set.k_max
    kinetic = float(free_energies(field.coeffs, kappa, k_max))
    return kinetic + interaction_energy(field, w, n_x)
