"""Closed forms and basis sums for the free (quadratic) quantum state."""

import math
from typing import Tuple

import numpy as np

from nlsgibbs.exceptions import DomainError
from nlsgibbs.models import ModeSet
from nlsgibbs.spectral import eigenvalues


def _check_tau(tau: float) -> None:
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau}")


def log_free_partition_function(mode_set: ModeSet, kappa: float, tau: float) -> float:
    """log Z_{tau,0} = -sum_k log(1 - e^{-lambda_k / tau})."""
    _check_tau(tau)
    ratios = eigenvalues(mode_set, kappa) / tau
    return float(-np.sum(np.log(-np.expm1(-ratios))))


def free_partition_function(mode_set: ModeSet, kappa: float, tau: float) -> float:
    """
    Z_{tau,0} over the untruncated Fock space.

    Examples:
        >>> round(free_partition_function(ModeSet(0), 1.0, 1.0), 5)
        1.58198
    """
    return math.exp(log_free_partition_function(mode_set, kappa, tau))


def _layer_sums(
    mode_set: ModeSet, kappa: float, tau: float, n_max: int, marked: int = -1
) -> np.ndarray:
    """
    sum over states with n particles of e^{-H_0}, for n = 0..n_max.

    With marked = i the summand is multiplied by the occupation of mode i.
    Computed by multiplying per-mode generating polynomials in the particle
    number, truncated at degree n_max.
    """
    ratios = eigenvalues(mode_set, kappa) / tau
    j = np.arange(n_max + 1)
    total = np.zeros(n_max + 1)
    total[0] = 1.0
    for i, ratio in enumerate(ratios):
        factor = np.exp(-j * ratio)
        if i == marked:
            factor = factor * j
        total = np.convolve(total, factor)[: n_max + 1]
    return total


def free_partition_sum(
    mode_set: ModeSet, kappa: float, tau: float, n_max: int
) -> Tuple[float, float]:
    """
    Basis sum of e^{-H_0} over states with at most n_max particles.

    Returns:
        (truncated sum, relative tail 1 - sum / Z_{tau,0})
    """
    _check_tau(tau)
    total = float(_layer_sums(mode_set, kappa, tau, n_max).sum())
    full = free_partition_function(mode_set, kappa, tau)
    return total, float(1.0 - total / full)


def bose_two_point(
    mode_set: ModeSet, kappa: float, tau: float, nu: float = 0.0
) -> np.ndarray:
    """G^nu_tau(k, k) = 1 / (tau (e^{(lambda_k + nu)/tau} - 1)) per mode."""
    _check_tau(tau)
    ratios = (eigenvalues(mode_set, kappa) + nu) / tau
    return 1.0 / (tau * np.expm1(ratios))


def truncated_two_point(
    mode_set: ModeSet, kappa: float, tau: float, n_max: int
) -> np.ndarray:
    """
    tau^{-1} rho_{tau,0}(a*_k a_k) on the basis with at most n_max particles.

    Converges to the Bose factor as n_max grows.
    """
    _check_tau(tau)
    norm = _layer_sums(mode_set, kappa, tau, n_max).sum()
    occupied = [
        _layer_sums(mode_set, kappa, tau, n_max, marked=i).sum()
        for i in range(mode_set.d)
    ]
    return np.array(occupied) / (norm * tau)


def free_wick_four_point(
    two_point: np.ndarray, l: int, m: int, k: int, j: int  # noqa: E741
) -> float:
    """
    tau^{-2} rho_{tau,0}(a*_l a*_m a_k a_j) from the diagonal two-point function.

    Indices are positions in the mode set. The two pairings give
    G_l G_m (delta_{lj} delta_{mk} + delta_{lk} delta_{mj}).
    """
    value = 0.0
    if l == j and m == k:
        value += two_point[l] * two_point[m]
    if l == k and m == j:
        value += two_point[l] * two_point[m]
    return float(value)
