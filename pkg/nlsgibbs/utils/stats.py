"""Estimators and error bars for Monte Carlo samples."""

import math
from typing import Sequence, Tuple

import numpy as np

from nlsgibbs.exceptions import DegenerateEnsembleError
from nlsgibbs.models import Estimate


def mean_estimate(values: np.ndarray) -> Estimate:
    """
    Sample mean with standard error std(ddof=1)/sqrt(n).

    Complex samples get the error of the modulus, i.e. the real and imaginary
    variances are added.

    Raises:
        ValueError: If fewer than two samples are given
    """
    values = np.asarray(values)
    n = values.shape[0] if values.ndim else 0
    if n < 2:
        raise ValueError(f"need at least 2 samples for an error bar, got {n}")
    mean = values.mean()
    std_error = float(np.std(values, ddof=1) / math.sqrt(n))
    value = complex(mean) if np.iscomplexobj(values) else float(mean)
    return Estimate(value, std_error, n)


def jackknife_ratio(
    numerator: np.ndarray, denominator: np.ndarray
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Ratio of sums with leave-one-out jackknife errors.

    The central value is sum(num)/sum(den) itself, so the ratio of identical
    arrays is exactly one. Trailing axes of the numerator are carried through,
    which gives elementwise errors for matrix-valued observables.

    Args:
        numerator: Samples of shape (n, ...)
        denominator: Samples of shape (n,)

    Returns:
        (ratio, std_error) with the trailing shape of the numerator

    Raises:
        DegenerateEnsembleError: If the denominator sums to zero
    """
    num = np.asarray(numerator)
    den = np.asarray(denominator, dtype=float)
    n = den.shape[0]
    total_den = den.sum()
    if n == 0 or total_den == 0.0:
        raise DegenerateEnsembleError("all weights are zero")
    total_num = num.sum(axis=0)
    ratio = total_num / total_den
    if n < 2:
        return ratio, np.full(np.shape(ratio), math.inf)
    shape = (n,) + (1,) * (num.ndim - 1)
    loo_den = (total_den - den).reshape(shape)
    with np.errstate(divide="ignore", invalid="ignore"):
        loo = (total_num - num) / loo_den
        spread = np.abs(loo - loo.mean(axis=0)) ** 2
        std_error = np.sqrt((n - 1) / n * spread.sum(axis=0))
    std_error = np.where(np.isfinite(std_error), std_error, math.inf)
    return ratio, std_error


def ratio_estimate(values: np.ndarray, weights: np.ndarray) -> Estimate:
    """Weighted mean sum(w X)/sum(w) as an Estimate."""
    values = np.asarray(values)
    weights = np.asarray(weights, dtype=float)
    ratio, std_error = jackknife_ratio(values * weights, weights)
    value = complex(ratio) if np.iscomplexobj(ratio) else float(ratio)
    return Estimate(value, float(std_error), int(weights.shape[0]))


def hermitize(matrix: np.ndarray) -> np.ndarray:
    """Hermitian part (A + A^H)/2."""
    return 0.5 * (matrix + matrix.conj().T)


def trace_norm(matrix: np.ndarray) -> float:
    """Sum of singular values; eigenvalues are used for Hermitian input."""
    matrix = np.asarray(matrix)
    if np.allclose(matrix, matrix.conj().T, atol=1e-14, rtol=0.0):
        return float(np.abs(np.linalg.eigvalsh(hermitize(matrix))).sum())
    return float(np.linalg.svd(matrix, compute_uv=False).sum())


def loglog_slope(x: Sequence[float], y: Sequence[float]) -> float:
    """Least-squares slope of log y against log x; nan if undefined."""
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    keep = (xs > 0) & (ys > 0)
    if keep.sum() < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(xs[keep]), np.log(ys[keep]), 1)
    return float(slope)
