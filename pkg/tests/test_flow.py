"""Tests for the split-step NLS / Hartree flow."""

import math

import numpy as np
import pytest

from nlsgibbs.classical import mass
from nlsgibbs.exceptions import BlowUpError, DomainError, PrecisionError, SizeError
from nlsgibbs.flow import (
    FlowConfig,
    embed,
    evolve,
    evolve_batch,
    evolve_trajectory,
    flow_difference,
    flow_energy,
    step_count,
)
from nlsgibbs.models import ModeSet, SpectralField
from nlsgibbs.potentials import (
    Constant,
    DeltaApprox,
    ExactDelta,
    FourierCoeffs,
    Potential,
    fourier_coefficients,
)
from nlsgibbs.spectral import eigenvalues


def small_field(k_max: int = 2, amplitude: float = 0.3, seed: int = 0) -> SpectralField:
    rng = np.random.default_rng(seed)
    d = 2 * k_max + 1
    coeffs = amplitude * (rng.normal(size=d) + 1j * rng.normal(size=d))
    return SpectralField(ModeSet(k_max), coeffs)


class TestFlowConfig:
    """Tests for FlowConfig class."""

    def test_validation(self) -> None:
        """Test dt, kappa and n_x are checked."""
        with pytest.raises(DomainError):
            FlowConfig(0.0, 1.0, Constant(0.0))
        with pytest.raises(DomainError):
            FlowConfig(0.1, 0.0, Constant(0.0))
        with pytest.raises(ValueError):
            FlowConfig(0.1, 1.0, Constant(0.0), n_x=6)

    def test_galerkin_grid(self) -> None:
        """Test the Galerkin flow needs an alias-free grid."""
        config = FlowConfig(0.1, 1.0, Constant(0.0), n_x=4)
        with pytest.raises(PrecisionError):
            config.grid_size(1)
        assert FlowConfig(0.1, 1.0, Constant(0.0)).grid_size(1) == 8

    def test_step_count(self) -> None:
        """Test equal steps no larger than dt."""
        assert step_count(1.0, 0.3) == 4
        assert step_count(-1.0, 0.25) == 4
        assert step_count(0.0, 0.1) == 0
        with pytest.raises(SizeError):
            step_count(1.0, 1e-9)


class TestEvolve:
    """Tests for evolve and evolve_batch."""

    def test_free_flow_is_phase(self) -> None:
        """Test w = 0 multiplies each mode by e^{-i lambda_k t}."""
        field = small_field()
        config = FlowConfig(0.01, 1.0, Constant(0.0))
        out = evolve(field, 0.37, config)
        expected = field.coeffs * np.exp(-0.37j * eigenvalues(field.mode_set, 1.0))
        assert np.max(np.abs(out.coeffs - expected)) < 1e-12

    def test_constant_potential_galerkin(self) -> None:
        """Test w = c adds the phase e^{-i c N t}."""
        field = small_field()
        n = mass(field)
        config = FlowConfig(1e-3, 1.0, Constant(0.4))
        out = evolve(field, 0.5, config)
        lam = eigenvalues(field.mode_set, 1.0)
        expected = field.coeffs * np.exp(-0.5j * (lam + 0.4 * n))
        assert np.max(np.abs(out.coeffs - expected)) < 1e-8

    def test_constant_potential_pseudospectral(self) -> None:
        """Test the exact phase substep is exact for w = c."""
        field = small_field()
        n = mass(field)
        config = FlowConfig(0.01, 1.0, Constant(0.4), galerkin=False)
        out = evolve(field, 0.5, config)
        k_max = out.mode_set.k_max
        assert k_max == 3
        lam = eigenvalues(out.mode_set, 1.0)
        expected = embed(field, k_max).coeffs * np.exp(-0.5j * (lam + 0.4 * n))
        assert np.max(np.abs(out.coeffs - expected)) < 1e-12

    def test_time_reversible(self) -> None:
        """Test S_{-t} S_t = id for the Galerkin flow."""
        field = small_field(seed=1)
        config = FlowConfig(1e-2, 1.0, FourierCoeffs([0.5, -0.3, 0.1]))
        back = evolve(evolve(field, 0.2, config), -0.2, config)
        assert np.max(np.abs(back.coeffs - field.coeffs)) < 1e-10

    def test_zero_time(self) -> None:
        """Test S_0 = id."""
        field = small_field()
        out = evolve(field, 0.0, FlowConfig(0.1, 1.0, ExactDelta()))
        assert np.array_equal(out.coeffs, field.coeffs)

    def test_batch_matches_single(self) -> None:
        """Test rows of a batch evolve independently."""
        config = FlowConfig(1e-2, 1.0, ExactDelta())
        fields = [small_field(seed=s) for s in range(3)]
        batch = evolve_batch(np.stack([f.coeffs for f in fields]), 0.1, config, 2)
        for row, field in zip(batch, fields):
            assert np.allclose(row, evolve(field, 0.1, config).coeffs, atol=1e-13)

    def test_blow_up(self) -> None:
        """Test a non-finite state raises with the last finite state."""
        field = small_field(k_max=1, amplitude=1e3)
        config = FlowConfig(0.1, 1.0, ExactDelta())
        with np.errstate(all="ignore"):
            with pytest.raises(BlowUpError) as info:
                evolve(field, 1.0, config)
        assert info.value.last_time == 0.0
        assert np.array_equal(info.value.last_state.coeffs, field.coeffs)

    def test_time_reversible_long_run(self) -> None:
        """Test S_{-1} S_1 = id to 1e-9 with dt = 1e-3."""
        field = small_field(seed=1)
        config = FlowConfig(1e-3, 1.0, FourierCoeffs([0.5, -0.3, 0.1]))
        back = evolve(evolve(field, 1.0, config), -1.0, config)
        assert np.max(np.abs(back.coeffs - field.coeffs)) < 1e-9

    def test_pseudospectral_reversible(self) -> None:
        """Test the grid flow is reversible and keeps a grid-sized mode set."""
        field = small_field(k_max=3, seed=2)
        config = FlowConfig(1e-3, 1.0, FourierCoeffs([0.5, -0.3, 0.1]), galerkin=False)
        forward = evolve(field, 1.0, config)
        back = evolve(forward, -1.0, config)
        assert forward.mode_set.k_max == 3
        assert back.mode_set.k_max == 3
        assert np.max(np.abs(back.coeffs - field.coeffs)) < 1e-9

    def test_pseudospectral_mode_set_settles(self) -> None:
        """Test one call may grow the mode set to the grid's and later calls keep it."""
        config = FlowConfig(1e-2, 1.0, ExactDelta(), galerkin=False)
        once = evolve(small_field(k_max=2), 0.05, config)
        twice = evolve(once, 0.05, config)
        assert once.mode_set.k_max == 3
        assert twice.mode_set.k_max == 3


class TestConservation:
    """Tests for mass and energy conservation along trajectories."""

    def test_galerkin_mass(self) -> None:
        """Test the truncated flow conserves N to roundoff."""
        config = FlowConfig(1e-3, 1.0, FourierCoeffs([0.5, -0.3, 0.1]))
        trajectory = evolve_trajectory(small_field(), 0.2, config, stride=50)
        assert trajectory.mass_drift() < 1e-12

    def test_galerkin_energy(self) -> None:
        """Test the truncated Hamiltonian drifts only at the splitting error."""
        config = FlowConfig(1e-3, 1.0, ExactDelta())
        field = small_field()
        trajectory = evolve_trajectory(field, 0.2, config, stride=50)
        assert trajectory.energy_drift() < 1e-4 * abs(flow_energy(field, config))

    def test_pseudospectral_trajectory(self) -> None:
        """Test snapshots share the grid mode set and conserve mass for w = c."""
        config = FlowConfig(1e-2, 1.0, Constant(0.3), galerkin=False)
        trajectory = evolve_trajectory(small_field(), 0.1, config, stride=3)
        assert trajectory.times == pytest.approx([0.0, 0.03, 0.06, 0.09, 0.1])
        assert {f.mode_set.k_max for f in trajectory.fields} == {3}
        assert trajectory.mass_drift() < 1e-12

    @pytest.mark.parametrize("w", [ExactDelta(), FourierCoeffs([0.5, -0.3, 0.1])])
    def test_energy_drift_is_second_order(self, w: Potential) -> None:
        """Test halving dt cuts the Hamiltonian drift at least 3.5 times."""
        field = small_field(k_max=1, amplitude=0.5, seed=3)
        drifts = [
            evolve_trajectory(
                field, 0.2, FlowConfig(dt, 1.0, w), stride=round(0.02 / dt)
            ).energy_drift()
            for dt in (2e-3, 1e-3, 5e-4)
        ]
        assert drifts[-1] > 0
        assert drifts[0] >= 3.5 * drifts[1]
        assert drifts[1] >= 3.5 * drifts[2]

    def test_stride_positive(self) -> None:
        """Test the snapshot stride is checked."""
        config = FlowConfig(1e-2, 1.0, Constant(0.0))
        with pytest.raises(ValueError):
            evolve_trajectory(small_field(), 0.1, config, stride=0)


class TestHelpers:
    """Tests for embed and flow_difference."""

    def test_embed(self) -> None:
        """Test zero padding keeps coefficients on their modes."""
        field = small_field(k_max=1)
        padded = embed(field, 3)
        assert padded.coefficient(1) == field.coefficient(1)
        assert padded.coefficient(3) == 0
        with pytest.raises(ValueError):
            embed(padded, 1)

    def test_flow_difference_same_potential(self) -> None:
        """Test identical flows have zero distance."""
        config = FlowConfig(1e-2, 1.0, Constant(0.0))
        w = FourierCoeffs([0.2, 0.1])
        assert flow_difference(small_field(), w, w, 0.1, config) == 0.0

    def test_flow_difference_grows_with_gap(self) -> None:
        """Test a larger potential gap gives a larger flow distance."""
        config = FlowConfig(1e-2, 1.0, Constant(0.0))
        w = Constant(0.2)
        near = flow_difference(small_field(), w, Constant(0.25), 0.2, config)
        far = flow_difference(small_field(), w, Constant(0.5), 0.2, config)
        assert 0 < near < far

    def test_flow_difference_shrinks_with_epsilon(self) -> None:
        """Test the local focusing flow is approached as eps decreases."""
        config = FlowConfig(1e-3, 1.0, ExactDelta())
        field = small_field(amplitude=0.5, seed=4)
        distances = [
            flow_difference(field, ExactDelta(), DeltaApprox(eps), 0.5, config)
            for eps in (0.2, 0.1, 0.05)
        ]
        assert distances[0] > distances[1] > distances[2] > 0


class TestPlaneWaves:
    """Tests for plane-wave solutions, whose density is flat in x."""

    @staticmethod
    def plane_wave(k: int, amplitude: float, k_max: int = 3) -> SpectralField:
        coeffs = np.zeros(2 * k_max + 1, dtype=complex)
        coeffs[k + k_max] = amplitude
        return SpectralField(ModeSet(k_max), coeffs)

    @pytest.mark.parametrize("galerkin", [True, False])
    def test_local_focusing_standing_wave(self, galerkin: bool) -> None:
        """Test A = 1, k = 0, kappa = 1 under -delta is constant in time."""
        field = self.plane_wave(0, 1.0)
        config = FlowConfig(1e-3, 1.0, ExactDelta(), galerkin=galerkin)
        out = evolve(field, 1.0, config)
        assert out.mode_set.k_max == 3
        assert np.max(np.abs(out.coeffs - field.coeffs)) < 1e-10

    @pytest.mark.parametrize("galerkin", [True, False])
    def test_hartree_phase_rate(self, galerkin: bool) -> None:
        """Test the phase turns at 4 pi^2 k^2 + kappa + A^2 w_hat(0)."""
        w = FourierCoeffs([0.5, -0.3, 0.1])
        field = self.plane_wave(1, 0.7)
        config = FlowConfig(1e-2, 1.0, w, galerkin=galerkin)
        out = evolve(field, 0.5, config)
        rate = 4.0 * math.pi**2 + 1.0 + 0.49 * fourier_coefficients(w, 0)[0]
        expected = self.plane_wave(1, 0.7 * np.exp(-0.5j * rate))
        assert np.max(np.abs(out.coeffs - expected.coeffs)) < 1e-10
