"""Taylor coefficients of the classical state in powers of the interaction."""

import math
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from nlsgibbs.classical.cutoff import CutoffFunction
from nlsgibbs.classical.energy import interaction_energies, masses
from nlsgibbs.classical.observables import theta_values
from nlsgibbs.exceptions import SizeError
from nlsgibbs.free_field import FreeFieldEnsemble
from nlsgibbs.models import Estimate
from nlsgibbs.potentials import Potential
from nlsgibbs.utils.stats import mean_estimate

MAX_CLASSICAL_ORDER = 6


def _check_series_order(m: int) -> None:
    if m < 0 or m > MAX_CLASSICAL_ORDER:
        raise SizeError(
            f"series order must lie in 0..{MAX_CLASSICAL_ORDER}, got m={m}"
        )


def _base_values(
    ensemble: FreeFieldEnsemble,
    xi: np.ndarray,
    p: int,
    w: Potential,
    f: Optional[CutoffFunction],
) -> Tuple[np.ndarray, np.ndarray]:
    coeffs = ensemble.coeffs
    theta = theta_values(coeffs, xi, p)
    if f is not None:
        theta = theta * f(masses(coeffs))
    energy = interaction_energies(coeffs, w, ensemble.mode_set.k_max)
    return theta, energy


def series_coefficients(
    ensemble: FreeFieldEnsemble,
    xi: np.ndarray,
    p: int,
    w: Potential,
    f: CutoffFunction,
    orders: Sequence[int],
) -> List[Estimate]:
    """
    a_m = ((-1)^m / m!) E_mu[Theta(xi) W^m f(N)] for several orders.

    The samples must come from the free field, unweighted.

    Raises:
        SizeError: If an order exceeds 6
    """
    for m in orders:
        _check_series_order(m)
    theta, energy = _base_values(ensemble, xi, p, w, f)
    results = []
    for m in orders:
        factor = (-1) ** m / math.factorial(m)
        results.append(mean_estimate(factor * theta * energy**m))
    return results


def series_coefficient_a_m(
    ensemble: FreeFieldEnsemble,
    xi: np.ndarray,
    p: int,
    w: Potential,
    f: CutoffFunction,
    m: int,
) -> Estimate:
    """Single classical Taylor coefficient a_m."""
    return series_coefficients(ensemble, xi, p, w, f, [m])[0]


def shifted_series_coefficient_b_m(
    ensemble: FreeFieldEnsemble,
    xi: np.ndarray,
    p: int,
    w: Potential,
    nu: float,
    m: int,
    f: Optional[CutoffFunction] = None,
) -> Estimate:
    """b_m = ((-1)^m / m!) E_mu[Theta(xi) W^m e^{-nu N}], optionally times f(N)."""
    _check_series_order(m)
    theta, energy = _base_values(ensemble, xi, p, w, f)
    damping = np.exp(-nu * masses(ensemble.coeffs))
    factor = (-1) ** m / math.factorial(m)
    return mean_estimate(factor * theta * energy**m * damping)


def unexpanded_numerator(
    ensemble: FreeFieldEnsemble,
    xi: np.ndarray,
    p: int,
    w: Potential,
    f: CutoffFunction,
    zeta: float = 1.0,
) -> Estimate:
    """E_mu[Theta(xi) e^{-zeta W} f(N)], the sum of the full series."""
    theta, energy = _base_values(ensemble, xi, p, w, f)
    return mean_estimate(theta * np.exp(-zeta * energy))


def series_remainder(
    ensemble: FreeFieldEnsemble,
    xi: np.ndarray,
    p: int,
    w: Potential,
    f: CutoffFunction,
    order: int,
    zeta: float = 1.0,
) -> Estimate:
    """
    R_M(zeta) = E_mu[Theta f (e^{-zeta W} - sum_{m<M} (-zeta W)^m / m!)].

    Evaluated on the same samples for both terms, so the error bar is that of
    the paired difference.
    """
    theta, energy = _base_values(ensemble, xi, p, w, f)
    partial = np.zeros_like(energy)
    for m in range(order):
        partial = partial + (-zeta * energy) ** m / math.factorial(m)
    return mean_estimate(theta * (np.exp(-zeta * energy) - partial))


def series_partial_sum(
    coefficients: Sequence[Union[Estimate, float, complex]], zeta: float = 1.0
) -> Union[float, complex]:
    """sum_m a_m zeta^m over the given coefficients."""
    total: Union[float, complex] = 0.0
    for m, a in enumerate(coefficients):
        value = a.value if isinstance(a, Estimate) else a
        total += value * zeta**m
    return total


def partial_sum_error(coefficients: Sequence[Estimate], zeta: float = 1.0) -> float:
    """Sum of absolute coefficient errors, valid whatever their correlation."""
    return float(
        sum(abs(a.std_error * zeta**m) for m, a in enumerate(coefficients))
    )


def series_bound(
    K: float, p: int, xi_norm: float, w_sup: float, m: int  # noqa: N803
) -> float:
    """K^p ||xi|| (K^2 ||w||_inf)^m / (2^m m!)."""
    return K**p * xi_norm * (K**2 * w_sup) ** m / (2**m * math.factorial(m))


def remainder_bound(
    K: float,  # noqa: N803
    p: int,
    xi_norm: float,
    w_sup: float,
    order: int,
    zeta: float = 1.0,
) -> float:
    """e^{|zeta| K^2 ||w||} K^p ||xi|| (K^2 ||w||)^M |zeta|^M / (2^M M!)."""
    growth = math.exp(abs(zeta) * K**2 * w_sup)
    return growth * series_bound(K, p, xi_norm, w_sup, order) * abs(zeta) ** order


def below_bound(estimate: Estimate, bound: float, sigmas: float = 3.0) -> bool:
    """|estimate| - sigmas * SE <= bound."""
    return abs(estimate.value) - sigmas * estimate.std_error <= bound
