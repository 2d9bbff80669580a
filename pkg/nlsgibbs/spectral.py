"""
Analysis on the torus [-1/2, 1/2).

Fourier convention: g(x) = sum_k g_hat(k) e^{2 pi i k x} with
g_hat(k) = int g(x) e^{-2 pi i k x} dx. Grid points are x_j = -1/2 + j/n_x, so
the discrete transform picks up a factor (-1)^k relative to a plain FFT.
"""

import json
import math
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np

from nlsgibbs.exceptions import AliasingError, DomainError, PrecisionError
from nlsgibbs.models import GridField, ModeSet, NormKind, SpectralField, grid_points


def _check_kappa(kappa: float) -> None:
    if not kappa > 0:
        raise DomainError(f"kappa must be positive, got {kappa}")


def eigenvalue(k: int, kappa: float) -> float:
    """
    Eigenvalue of h = -Laplacian + kappa on the mode e^{2 pi i k x}.

    Args:
        k: Mode index (any integer)
        kappa: Positive mass parameter

    Returns:
        4 pi^2 k^2 + kappa

    Raises:
        DomainError: If kappa <= 0

    Examples:
        >>> eigenvalue(0, 1.0)
        1.0
    """
    _check_kappa(kappa)
    return 4.0 * math.pi**2 * float(k) ** 2 + kappa


def eigenvalues(mode_set: ModeSet, kappa: float) -> np.ndarray:
    """Eigenvalues lambda_k for all modes, in mode order."""
    _check_kappa(kappa)
    k = mode_set.modes.astype(float)
    return 4.0 * math.pi**2 * k**2 + kappa


def default_grid_size(k_max: int, factor: int = 4) -> int:
    """Smallest power of two with at least factor*k_max + 1 points."""
    needed = factor * int(k_max) + 1
    n_x = 1
    while n_x < needed:
        n_x *= 2
    return max(n_x, 4)


def _signs(modes: np.ndarray) -> np.ndarray:
    return np.where(modes % 2 == 0, 1.0, -1.0)


def coefficients_to_grid(coeffs: np.ndarray, k_max: int, n_x: int) -> np.ndarray:
    """
    Evaluate band-limited fields on the grid.

    Works along the last axis, so a batch of shape (n, d) gives (n, n_x).

    Raises:
        AliasingError: If the grid cannot hold the mode set
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    d = 2 * k_max + 1
    if n_x < d:
        raise AliasingError(f"grid of {n_x} points cannot represent {d} modes")
    modes = np.arange(-k_max, k_max + 1)
    padded = np.zeros(coeffs.shape[:-1] + (n_x,), dtype=complex)
    padded[..., modes % n_x] = coeffs * _signs(modes)
    return np.fft.ifft(padded, axis=-1) * n_x


def grid_to_coefficients(values: np.ndarray, k_max: int) -> np.ndarray:
    """
    Fourier coefficients of grid samples for |k| <= k_max.

    Raises:
        AliasingError: If the grid has fewer points than modes requested
    """
    values = np.asarray(values, dtype=complex)
    n_x = values.shape[-1]
    d = 2 * k_max + 1
    if n_x < d:
        raise AliasingError(f"grid of {n_x} points cannot resolve {d} modes")
    modes = np.arange(-k_max, k_max + 1)
    spectrum = np.fft.fft(values, axis=-1) / n_x
    return spectrum[..., modes % n_x] * _signs(modes)


def transform(
    field: Union[SpectralField, GridField],
    n_x: Optional[int] = None,
    mode_set: Optional[ModeSet] = None,
) -> Union[SpectralField, GridField]:
    """
    Move a field between its spectral and grid representations.

    Args:
        field: SpectralField (goes to the grid) or GridField (goes to modes)
        n_x: Grid size for the spectral-to-grid direction
            (default: smallest alias-free grid for quartic quantities)
        mode_set: Target modes for the grid-to-spectral direction

    Returns:
        The field in the other representation

    Raises:
        AliasingError: If n_x < d
        ValueError: If mode_set is missing for a GridField
    """
    if isinstance(field, SpectralField):
        k_max = field.mode_set.k_max
        size = n_x if n_x is not None else default_grid_size(k_max)
        return GridField(size, coefficients_to_grid(field.coeffs, k_max, size))
    if isinstance(field, GridField):
        if mode_set is None:
            raise ValueError("mode_set is required to transform a GridField")
        return SpectralField(
            mode_set, grid_to_coefficients(field.values, mode_set.k_max)
        )
    raise TypeError(f"cannot transform object of type {type(field).__name__}")


def norm(
    field: SpectralField,
    kind: NormKind = NormKind.L2,
    s: float = 0.0,
    n_x: Optional[int] = None,
) -> float:
    """
    Norm of a band-limited field.

    Hs uses the weight (1 + |k|)^{2s}, so Hs at s=0 is L2. L4 is computed by the
    trapezoid rule, which is exact for |phi|^4 when n_x >= 4*k_max + 1.

    Raises:
        PrecisionError: If the L4 grid is too small
    """
    coeffs = field.coeffs
    if kind is NormKind.L2:
        return float(np.sqrt(np.sum(np.abs(coeffs) ** 2)))
    if kind is NormKind.HS:
        weights = (1.0 + np.abs(field.mode_set.modes)) ** (2.0 * s)
        return float(np.sqrt(np.sum(weights * np.abs(coeffs) ** 2)))
    if kind is NormKind.L4:
        k_max = field.mode_set.k_max
        size = n_x if n_x is not None else default_grid_size(k_max)
        if size < 4 * k_max + 1:
            raise PrecisionError(
                f"L4 norm needs at least {4 * k_max + 1} grid points, got {size}"
            )
        values = coefficients_to_grid(coeffs, k_max, size)
        return float(np.mean(np.abs(values) ** 4) ** 0.25)
    raise ValueError(f"unknown norm kind: {kind}")


def l4_norms(coeffs: np.ndarray, k_max: int) -> np.ndarray:
    """L4 norms of a batch of fields of shape (n, d)."""
    values = coefficients_to_grid(coeffs, k_max, default_grid_size(k_max))
    return np.mean(np.abs(values) ** 4, axis=-1) ** 0.25


def heat_propagator(t: float, field: SpectralField, kappa: float) -> SpectralField:
    """
    Apply e^{-t h} to a field.

    Raises:
        DomainError: If t <= 0 or kappa <= 0
    """
    if not t > 0:
        raise DomainError(f"heat propagator time must be positive, got {t}")
    lam = eigenvalues(field.mode_set, kappa)
    return SpectralField(field.mode_set, field.coeffs * np.exp(-t * lam))


def periodic_heat_kernel(
    x: np.ndarray, t: float, kappa: float, n_images: Optional[int] = None
) -> np.ndarray:
    """
    Kernel of e^{-t h} on the torus as a sum of Gaussian images.

    e^{-t kappa} sum_n (4 pi t)^{-1/2} exp(-(x + n)^2 / (4 t)). The image count
    defaults to enough terms that the dropped images are below 1e-17.
    """
    if not t > 0:
        raise DomainError(f"heat kernel time must be positive, got {t}")
    _check_kappa(kappa)
    if n_images is None:
        n_images = int(math.ceil(math.sqrt(4.0 * t * 40.0 * math.log(10.0)))) + 1
    x = np.asarray(x, dtype=float)
    shifts = np.arange(-n_images, n_images + 1, dtype=float)
    images = np.exp(-((x[..., None] + shifts) ** 2) / (4.0 * t))
    return math.exp(-t * kappa) * images.sum(axis=-1) / math.sqrt(4.0 * math.pi * t)


def heat_kernel_convolution(
    field: SpectralField, t: float, kappa: float, n_x: int = 512
) -> SpectralField:
    """Convolve a field with the image-sum heat kernel by quadrature."""
    kernel = periodic_heat_kernel(grid_points(n_x), t, kappa)
    kernel_hat = grid_to_coefficients(kernel, field.mode_set.k_max)
    return SpectralField(field.mode_set, kernel_hat * field.coeffs)


def field_to_dict(
    field: SpectralField, kappa: Optional[float] = None
) -> Dict[str, Any]:
    """Serialize a field as {k_max, kappa, coeffs: [[re, im], ...]}."""
    return {
        "k_max": int(field.mode_set.k_max),
        "kappa": kappa,
        "coeffs": [[float(c.real), float(c.imag)] for c in field.coeffs],
    }


def field_from_dict(data: Dict[str, Any]) -> Tuple[SpectralField, Optional[float]]:
    """
    Parse a serialized field.

    Returns:
        The field and the recorded kappa (None when absent)
    """
    try:
        mode_set = ModeSet(int(data["k_max"]))
        coeffs = np.array([complex(re, im) for re, im in data["coeffs"]])
    except (KeyError, TypeError, ValueError) as e:
        raise ValueError(f"malformed field record: {e}") from e
    kappa = data.get("kappa")
    return SpectralField(mode_set, coeffs), (None if kappa is None else float(kappa))


def field_to_json(field: SpectralField, kappa: Optional[float] = None) -> str:
    """Compact JSON text of a field; floats round-trip exactly."""
    return json.dumps(field_to_dict(field, kappa), separators=(",", ":"))
