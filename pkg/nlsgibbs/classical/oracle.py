"""
Independent partition-function oracle for constant potentials.

For w = c the weight depends on the mass only, and N = sum_k |omega_k|^2 /
lambda_k is a sum of independent exponentials. Modes k and -k share a rate,
so N is Exp(lambda_0) plus one Gamma(2, lambda_k) per k >= 1.
"""

import logging
import math
from typing import Callable, List, Optional, Tuple

import numpy as np
from scipy.integrate import quad
from scipy.signal import fftconvolve

from nlsgibbs.classical.cutoff import CutoffFunction, PlateauCutoff
from nlsgibbs.exceptions import QuadratureError
from nlsgibbs.models import ModeSet
from nlsgibbs.spectral import eigenvalue

logger = logging.getLogger(__name__)

DEFAULT_GRID_POINTS = 2**16 + 1
TAIL_RATE_MULTIPLE = 45.0


def _component_densities(
    mode_set: ModeSet, kappa: float, s: np.ndarray
) -> List[np.ndarray]:
    lam0 = eigenvalue(0, kappa)
    densities = [lam0 * np.exp(-lam0 * s)]
    for k in range(1, mode_set.k_max + 1):
        lam = eigenvalue(k, kappa)
        densities.append(lam**2 * s * np.exp(-lam * s))
    return densities


def mass_density(
    mode_set: ModeSet, kappa: float, upper: float, n_points: int = DEFAULT_GRID_POINTS
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Density of N on [0, upper] by repeated trapezoid convolution.

    Returns:
        (s grid, density values)
    """
    s = np.linspace(0.0, upper, n_points)
    step = s[1] - s[0]
    densities = _component_densities(mode_set, kappa, s)
    density = densities[0]
    for component in densities[1:]:
        full = fftconvolve(density, component)[:n_points]
        # trapezoid: remove half of the two endpoint products
        correction = 0.5 * (density[0] * component + component[0] * density)
        density = step * (full - correction)
    return s, np.clip(density, 0.0, None)


def _upper_limit(mode_set: ModeSet, kappa: float, f: CutoffFunction) -> float:
    if f.is_compact:
        return f.radius
    mean = sum(1.0 / eigenvalue(k, kappa) for k in mode_set.modes)
    tail = mean + TAIL_RATE_MULTIPLE / kappa
    return min(f.radius, tail) if math.isfinite(f.radius) else tail


def _integrate(
    integrand: Callable[[float], float], upper: float, breakpoints: List[float]
) -> float:
    result = quad(
        integrand,
        0.0,
        upper,
        points=[b for b in breakpoints if 0.0 < b < upper] or None,
        limit=500,
        epsabs=1e-12,
        epsrel=1e-9,
        full_output=1,
    )
    if len(result) > 3:
        raise QuadratureError(f"adaptive quadrature did not converge: {result[3]}")
    return float(result[0])


def density_oracle_constant_w(
    c: float,
    f: CutoffFunction,
    mode_set: ModeSet,
    kappa: float,
    n_points: int = DEFAULT_GRID_POINTS,
) -> float:
    """
    z = int_0^inf e^{-c s^2/2} f(s) p_N(s) ds for the constant potential w = c.

    Args:
        c: Constant value of the potential
        f: Mass cutoff
        mode_set: Modes of the truncated model
        kappa: Positive mass parameter
        n_points: Resolution of the density grid

    Returns:
        Partition function z

    Raises:
        QuadratureError: If the adaptive quadrature fails to converge
    """
    upper = _upper_limit(mode_set, kappa, f)
    s, density = mass_density(mode_set, kappa, upper, n_points)

    def integrand(x: float) -> float:
        return float(
            math.exp(-0.5 * c * x * x) * f(np.array(x)) * np.interp(x, s, density)
        )

    breakpoints = []
    if isinstance(f, PlateauCutoff):
        breakpoints.append(f.plateau * f.K)
    z = _integrate(integrand, upper, breakpoints)
    logger.debug("density oracle: c=%g, k_max=%d, z=%.12g", c, mode_set.k_max, z)
    return z


def single_mode_partition(
    c: float, f: CutoffFunction, kappa: float, upper: Optional[float] = None
) -> float:
    """Closed-form density route for one mode: N ~ Exp(lambda_0)."""
    lam0 = eigenvalue(0, kappa)
    limit = upper if upper is not None else _upper_limit(ModeSet(0), kappa, f)

    def integrand(x: float) -> float:
        return float(math.exp(-0.5 * c * x * x - lam0 * x) * lam0 * f(np.array(x)))

    breakpoints = [f.plateau * f.K] if isinstance(f, PlateauCutoff) else []
    return _integrate(integrand, limit, breakpoints)
