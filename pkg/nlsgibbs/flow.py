"""
Strang-split integration of the Hartree / cubic NLS flow on the torus.

i d_t u = (-Laplacian + kappa) u + (w * |u|^2) u. Each step is
L(h/2) N(h) L(h/2) with the exact linear propagator L. The nonlinear
substep is the exact phase rotation on the grid in pseudospectral mode, or
the implicit midpoint rule for the projected nonlinearity in Galerkin mode.
When w * |u|^2 is constant in x the Galerkin substep is the exact phase too.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional

import numpy as np

from nlsgibbs.classical.energy import hamiltonian_energy, masses
from nlsgibbs.exceptions import BlowUpError, DomainError, PrecisionError, SizeError
from nlsgibbs.models import ModeSet, SpectralField
from nlsgibbs.potentials import ExactDelta, Potential, fourier_coefficients
from nlsgibbs.spectral import (
    coefficients_to_grid,
    default_grid_size,
    eigenvalues,
    grid_to_coefficients,
)

logger = logging.getLogger(__name__)

MAX_STEPS = 100_000_000
FIXED_POINT_TOLERANCE = 4.0 * np.finfo(float).eps
FIXED_POINT_ITERATIONS = 50
FLAT_POTENTIAL_TOLERANCE = 1e-12


@dataclass
class FlowConfig:
    """
    Integrator settings.

    Attributes:
        dt: Largest time step
        kappa: Positive mass parameter
        potential: Pair interaction
        galerkin: Keep the field on its mode set (exact truncated flow)
        n_x: Grid size (default: smallest alias-free grid in Galerkin mode,
            smallest grid holding the mode set in pseudospectral mode)
    """

    dt: float
    kappa: float
    potential: Potential
    galerkin: bool = True
    n_x: Optional[int] = None

    def __post_init__(self) -> None:
        """Validate flow config."""
        if not self.dt > 0:
            raise DomainError(f"time step must be positive, got {self.dt}")
        if not self.kappa > 0:
            raise DomainError(f"kappa must be positive, got {self.kappa}")
        if self.n_x is not None and (self.n_x < 4 or self.n_x & (self.n_x - 1)):
            raise ValueError(f"n_x must be a power of two >= 4, got {self.n_x}")

    def grid_size(self, k_max: int) -> int:
        """
        Grid used for a field with the given k_max.

        The pseudospectral default outputs |k| < n_x/2, which equals the input
        mode set whenever k_max + 1 is a power of two. Output mode sets are
        therefore fixed points of further calls.
        """
        if self.n_x is not None:
            size = self.n_x
        else:
            size = default_grid_size(k_max, factor=4 if self.galerkin else 2)
        if self.galerkin and size < 4 * k_max + 1:
            raise PrecisionError(
                f"Galerkin flow needs n_x >= {4 * k_max + 1}, got {size}"
            )
        if size < 2 * k_max + 1:
            raise PrecisionError(f"grid of {size} points cannot hold k_max={k_max}")
        return size

    def to_dict(self) -> Dict[str, Any]:
        return {
            "dt": self.dt,
            "kappa": self.kappa,
            "potential": self.potential.to_dict(),
            "galerkin": self.galerkin,
            "n_x": self.n_x,
        }


def step_count(t: float, dt: float) -> int:
    """
    Number of equal steps of size at most dt covering |t|.

    Raises:
        SizeError: If more than 1e8 steps would be needed
    """
    if t == 0.0:
        return 0
    ratio = abs(t) / dt
    if ratio > MAX_STEPS:
        raise SizeError(f"|t|/dt = {ratio:.3g} exceeds the {MAX_STEPS} step guard")
    return max(1, int(math.ceil(ratio - 1e-12)))


class _GalerkinStepper:
    """Flow of the Hamiltonian truncated to |k| <= k_max."""

    def __init__(self, config: FlowConfig, k_max: int):
        self.k_max = k_max
        self.n_x = config.grid_size(k_max)
        self.lam = eigenvalues(ModeSet(k_max), config.kappa)
        self.w_hat = fourier_coefficients(config.potential, 2 * k_max)

    def linear(self, coeffs: np.ndarray, h: float) -> np.ndarray:
        return coeffs * np.exp(-1j * h * self.lam)

    def force(self, coeffs: np.ndarray) -> np.ndarray:
        """-i P((w * |u|^2) u) on the mode set."""
        values = coefficients_to_grid(coeffs, self.k_max, self.n_x)
        rho_hat = grid_to_coefficients(np.abs(values) ** 2, 2 * self.k_max)
        potential = coefficients_to_grid(
            self.w_hat * rho_hat, 2 * self.k_max, self.n_x
        ).real
        return -1j * grid_to_coefficients(potential * values, self.k_max)

    def constant_potential(self, coeffs: np.ndarray) -> Optional[np.ndarray]:
        """Value of w * |u|^2 per row when it is flat in x, else None."""
        values = coefficients_to_grid(coeffs, self.k_max, self.n_x)
        rho_hat = grid_to_coefficients(np.abs(values) ** 2, 2 * self.k_max)
        potential_hat = self.w_hat * rho_hat
        centre = 2 * self.k_max
        ripple = np.abs(np.delete(potential_hat, centre, axis=-1))
        scale = np.max(np.abs(potential_hat), initial=0.0)
        if ripple.size and np.max(ripple) > FLAT_POTENTIAL_TOLERANCE * scale:
            return None
        return potential_hat[..., centre : centre + 1].real

    def nonlinear(self, coeffs: np.ndarray, h: float) -> np.ndarray:
        flat = self.constant_potential(coeffs)
        if flat is not None:
            return coeffs * np.exp(-1j * h * flat)
        # implicit midpoint keeps N exactly
        update = coeffs + h * self.force(coeffs)
        scale = np.max(np.abs(coeffs)) + 1e-300
        for _ in range(FIXED_POINT_ITERATIONS):
            new = coeffs + h * self.force(0.5 * (coeffs + update))
            change = np.max(np.abs(new - update))
            update = new
            if change <= FIXED_POINT_TOLERANCE * scale:
                break
        else:
            if not np.all(np.isfinite(update)):
                return update
            logger.warning(
                "implicit midpoint stopped after %d iterations (change %.3g)",
                FIXED_POINT_ITERATIONS,
                change,
            )
        return update

    def output_modes(self) -> int:
        return self.k_max

    def load(self, coeffs: np.ndarray) -> np.ndarray:
        return coeffs

    def unload(self, state: np.ndarray) -> np.ndarray:
        return state


class _PseudospectralStepper:
    """Grid flow with the exact phase substep; all grid modes are kept."""

    def __init__(self, config: FlowConfig, k_max: int):
        self.k_max = k_max
        self.n_x = config.grid_size(k_max)
        # FFT ordering of the grid modes; the Nyquist mode gets |k| = n_x/2
        self.frequencies = np.fft.fftfreq(self.n_x, 1.0 / self.n_x)
        self.lam = 4.0 * math.pi**2 * self.frequencies**2 + config.kappa
        self.signs = np.where(np.arange(self.n_x) % 2 == 0, 1.0, -1.0)
        self.local_sign: Optional[float] = None
        if isinstance(config.potential, ExactDelta):
            self.local_sign = float(config.potential.sign)
            self.w_hat = np.zeros(self.n_x)
        else:
            top = self.n_x // 2 - 1
            w_hat = fourier_coefficients(config.potential, top)
            modes = np.arange(-top, top + 1)
            self.w_hat = np.zeros(self.n_x)
            self.w_hat[modes % self.n_x] = w_hat

    def linear(self, values: np.ndarray, h: float) -> np.ndarray:
        spectrum = np.fft.fft(values, axis=-1)
        return np.fft.ifft(spectrum * np.exp(-1j * h * self.lam), axis=-1)

    def nonlinear(self, values: np.ndarray, h: float) -> np.ndarray:
        density = np.abs(values) ** 2
        if self.local_sign is not None:
            potential = self.local_sign * density
        else:
            potential = np.fft.ifft(
                np.fft.fft(density, axis=-1) * self.w_hat, axis=-1
            ).real
        return values * np.exp(-1j * h * potential)

    def output_modes(self) -> int:
        return self.n_x // 2 - 1

    def load(self, coeffs: np.ndarray) -> np.ndarray:
        return coefficients_to_grid(coeffs, self.k_max, self.n_x)

    def unload(self, state: np.ndarray) -> np.ndarray:
        nyquist = np.abs(np.fft.fft(state, axis=-1)[..., self.n_x // 2]) / self.n_x
        if np.any(nyquist > 0):
            logger.debug("dropping Nyquist amplitude up to %.3g", float(nyquist.max()))
        return grid_to_coefficients(state, self.output_modes())


def _stepper(config: FlowConfig, k_max: int) -> Any:
    if config.galerkin:
        return _GalerkinStepper(config, k_max)
    return _PseudospectralStepper(config, k_max)


def _advance(
    stepper: Any, state: np.ndarray, n_steps: int, h: float, start_time: float
) -> np.ndarray:
    for step in range(n_steps):
        new = stepper.linear(state, 0.5 * h)
        new = stepper.nonlinear(new, h)
        new = stepper.linear(new, 0.5 * h)
        if not np.all(np.isfinite(new)):
            last = stepper.unload(state)
            last_field = SpectralField(
                ModeSet(stepper.output_modes()), np.atleast_2d(last)[0]
            )
            raise BlowUpError(
                f"flow became non-finite at step {step + 1}",
                last_state=last_field,
                last_time=start_time + step * h,
            )
        state = new
    return state


def evolve_batch(
    coeffs: np.ndarray,
    t: float,
    config: FlowConfig,
    k_max: int,
    start_time: float = 0.0,
) -> np.ndarray:
    """
    Evolve many initial data of shape (n, d) to time t.

    Returns:
        Coefficients on the output mode set: the input one in Galerkin mode,
        |k| < n_x/2 in pseudospectral mode

    Raises:
        SizeError: If more than 1e8 steps would be needed
        BlowUpError: If the state becomes non-finite
    """
    stepper = _stepper(config, k_max)
    state = stepper.load(np.asarray(coeffs, dtype=complex))
    n_steps = step_count(t, config.dt)
    h = t / n_steps if n_steps else 0.0
    return stepper.unload(_advance(stepper, state, n_steps, h, start_time))


def evolve(field: SpectralField, t: float, config: FlowConfig) -> SpectralField:
    """
    S_t applied to one field; negative t runs the flow backwards.

    Raises:
        SizeError: If more than 1e8 steps would be needed
        BlowUpError: If the state becomes non-finite
        PrecisionError: If the grid is too small for the mode set
    """
    k_max = field.mode_set.k_max
    out = evolve_batch(field.coeffs[None, :], t, config, k_max)[0]
    return SpectralField(ModeSet(_stepper(config, k_max).output_modes()), out)


def embed(field: SpectralField, k_max: int) -> SpectralField:
    """Zero-pad a field to a larger mode set."""
    if k_max < field.mode_set.k_max:
        raise ValueError("cannot embed into a smaller mode set")
    pad = k_max - field.mode_set.k_max
    return SpectralField(ModeSet(k_max), np.pad(field.coeffs, (pad, pad)))


def flow_energy(field: SpectralField, config: FlowConfig) -> float:
    """Truncated Hamiltonian of a field on its mode set."""
    return hamiltonian_energy(field, config.potential, config.kappa)


@dataclass
class Trajectory:
    """Snapshots of a flow with conservation diagnostics."""

    times: List[float] = field(default_factory=list)
    fields: List[SpectralField] = field(default_factory=list)
    masses: List[float] = field(default_factory=list)
    energies: List[float] = field(default_factory=list)

    def mass_drift(self) -> float:
        """Largest relative mass change along the trajectory."""
        if not self.masses or self.masses[0] == 0.0:
            return 0.0
        return max(abs(m - self.masses[0]) for m in self.masses) / self.masses[0]

    def energy_drift(self) -> float:
        """Largest absolute energy change along the trajectory."""
        if not self.energies:
            return 0.0
        return max(abs(e - self.energies[0]) for e in self.energies)


def evolve_trajectory(
    field: SpectralField,
    t: float,
    config: FlowConfig,
    stride: int = 1,
    with_energy: bool = True,
) -> Trajectory:
    """
    Evolve and record snapshots every `stride` steps, plus the final state.

    Snapshots in pseudospectral mode live on the grid's mode set; the initial
    snapshot is padded to match.
    """
    if stride < 1:
        raise ValueError("stride must be at least 1")
    k_max = field.mode_set.k_max
    stepper = _stepper(config, k_max)
    out_modes = ModeSet(stepper.output_modes())
    n_steps = step_count(t, config.dt)
    h = t / n_steps if n_steps else 0.0
    trajectory = Trajectory()

    def record(time: float, snapshot: SpectralField) -> None:
        trajectory.times.append(time)
        trajectory.fields.append(snapshot)
        trajectory.masses.append(float(masses(snapshot.coeffs)))
        if with_energy:
            trajectory.energies.append(flow_energy(snapshot, config))

    state = stepper.load(field.coeffs[None, :])
    record(0.0, embed(field, out_modes.k_max))
    done = 0
    while done < n_steps:
        count = min(stride, n_steps - done)
        state = _advance(stepper, state, count, h, done * h)
        done += count
        snapshot = SpectralField(out_modes, stepper.unload(state)[0])
        record(t if done == n_steps else done * h, snapshot)
    return trajectory


def flow_difference(
    field: SpectralField,
    w: Potential,
    w_eps: Potential,
    t_final: float,
    config: FlowConfig,
    n_times: int = 10,
) -> float:
    """
    max over a time grid on [0, T] of ||u(t) - u_eps(t)||_2.

    Both flows share the step size and grid.

    Raises:
        BlowUpError: If either flow becomes non-finite
    """
    if t_final == 0.0:
        return 0.0
    n_steps = step_count(t_final, config.dt)
    stride = max(1, n_steps // n_times)
    first = evolve_trajectory(
        field, t_final, replace(config, potential=w), stride, with_energy=False
    )
    second = evolve_trajectory(
        field, t_final, replace(config, potential=w_eps), stride, with_energy=False
    )
    return max(
        float(np.linalg.norm(a.coeffs - b.coeffs))
        for a, b in zip(first.fields, second.fields)
    )
