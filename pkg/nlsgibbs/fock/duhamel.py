"""
Duhamel expansion of the quantum state in powers of the interaction.

a_{tau,m} = (-1)^m / Z_{tau,0} Tr(int_{0 < t_m < ... < t_1 < 1} Theta e^{-(1-t_1)H_0}
W e^{-(t_1-t_2)H_0} ... W e^{-t_m H_0} f(N)). H_0 is diagonal in the basis, so
every semigroup is an exponential of its diagonal and the time integrals are
done by composite Gauss-Legendre quadrature.
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy.special import exprel

from nlsgibbs.classical.cutoff import CutoffFunction
from nlsgibbs.classical.observables import kernel_norm
from nlsgibbs.classical.series import remainder_bound, series_bound
from nlsgibbs.exceptions import SizeError, TruncationError
from nlsgibbs.fock.basis import FockBasis
from nlsgibbs.fock.free import log_free_partition_function
from nlsgibbs.fock.operators import interaction_operator, lift_operator
from nlsgibbs.potentials import Potential
from nlsgibbs.spectral import eigenvalues

logger = logging.getLogger(__name__)

MAX_QUANTUM_ORDER = 2
MIN_QUADRATURE_ORDER = 16
# exponent range covered by one panel
PANEL_SPREAD = 8.0
NEGLIGIBLE_BLOCK = 1e-18
NODE_BATCH = 2048


def gauss_legendre_panels(order: int, n_panels: int) -> Tuple[np.ndarray, np.ndarray]:
    """Composite Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(0.0, 1.0, n_panels + 1)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


@dataclass
class _Block:
    energies: np.ndarray
    theta: np.ndarray
    interaction: np.ndarray
    cutoff: float

    @property
    def spread(self) -> float:
        return float(self.energies.max() - self.energies.min())

    def panels(self) -> int:
        return max(1, int(math.ceil(self.spread / PANEL_SPREAD)))


class DuhamelExpansion:
    """
    Terms of A_tau(zeta) = Tr(Theta e^{-(H_0 + zeta W)} f(N)) / Z_{tau,0}.

    Only the block-diagonal part of Theta(xi) contributes to the trace, so each
    (n, P) block is handled independently.
    """

    def __init__(
        self,
        basis: FockBasis,
        kappa: float,
        tau: float,
        w: Potential,
        f: CutoffFunction,
        xi: np.ndarray,
        p: int,
    ):
        if f.radius * tau > basis.n_max:
            raise TruncationError(
                f"cutoff radius {f.radius:g} times tau {tau:g} exceeds n_max"
            )
        self.basis = basis
        self.kappa = kappa
        self.tau = tau
        self.potential = w
        self.cutoff = f
        self.xi = np.asarray(xi, dtype=complex)
        self.p = p
        self.log_z0 = log_free_partition_function(basis.mode_set, kappa, tau)
        energies = basis.states @ eigenvalues(basis.mode_set, kappa) / tau
        theta = lift_operator(basis, self.xi, p, tau)
        interaction = interaction_operator(basis, tau, w)
        cut = f(basis.particle_numbers / tau)
        self.blocks: List[_Block] = []
        for key, rows in basis.blocks.items():
            if cut[rows.start] == 0.0:
                continue
            self.blocks.append(
                _Block(
                    energies[rows],
                    theta.block(key),
                    interaction.block(key),
                    float(cut[rows.start]),
                )
            )

    def _z0(self) -> float:
        return math.exp(self.log_z0)

    def _negligible(self, block: _Block, m: int) -> bool:
        scale = float(np.max(np.abs(block.interaction))) if m else 1.0
        size = float(np.max(np.abs(block.theta))) * block.energies.size
        bound = math.exp(-block.energies.min()) * size * scale**m * block.cutoff
        return bound < NEGLIGIBLE_BLOCK

    def coefficient(self, m: int, order: int = MIN_QUADRATURE_ORDER) -> float:
        """
        a_{tau,m} for m in {0, 1, 2} by simplex quadrature.

        Raises:
            SizeError: If m > 2
            ValueError: If the quadrature order is below 16
        """
        if m < 0 or m > MAX_QUANTUM_ORDER:
            raise SizeError(f"quantum Duhamel order must lie in 0..2, got m={m}")
        if order < MIN_QUADRATURE_ORDER:
            raise ValueError(
                f"quadrature order must be at least {MIN_QUADRATURE_ORDER}"
            )
        total = 0.0
        for block in self.blocks:
            if self._negligible(block, m):
                continue
            if m == 0:
                value = np.sum(np.diag(block.theta) * np.exp(-block.energies))
            elif m == 1:
                value = self._first_order(block, order)
            else:
                value = self._second_order(block, order)
            total += float(np.real(value)) * block.cutoff
        return (-1) ** m * total / self._z0()

    def _first_order(self, block: _Block, order: int) -> complex:
        nodes, weights = gauss_legendre_panels(order, block.panels())
        e = block.energies
        mixed = block.theta.T * block.interaction
        left = np.exp(-(1.0 - nodes)[:, None] * e[None, :])
        right = np.exp(-nodes[:, None] * e[None, :])
        values = np.einsum("qi,ij,qj->q", left, mixed, right)
        return complex(np.dot(weights, values))

    def _second_order(self, block: _Block, order: int) -> complex:
        nodes, weights = gauss_legendre_panels(order, block.panels())
        # t1 = u, t2 = u v maps the unit square onto the simplex, Jacobian u
        u = np.repeat(nodes, nodes.size)
        v = np.tile(nodes, nodes.size)
        jacobian = np.repeat(weights, weights.size) * np.tile(weights, weights.size) * u
        t1, t2 = u, u * v
        e = block.energies
        interaction = block.interaction
        closing = block.theta.T
        total = 0j
        for start in range(0, u.size, NODE_BATCH):
            sl = slice(start, start + NODE_BATCH)
            a = np.exp(-(1.0 - t1[sl])[:, None] * e[None, :])
            b = np.exp(-(t1[sl] - t2[sl])[:, None] * e[None, :])
            c = np.exp(-t2[sl][:, None] * e[None, :])
            first = a[:, :, None] * interaction[None, :, :] * b[:, None, :]
            second = interaction[None, :, :] * c[:, None, :]
            product = first @ second
            values = np.einsum("il,qil->q", closing, product)
            total += np.dot(jacobian[sl], values)
        return total

    def first_order_exact(self) -> float:
        """a_{tau,1} from the closed-form time integral."""
        total = 0.0
        for block in self.blocks:
            e = block.energies
            gap = e[:, None] - e[None, :]
            lower = np.minimum(e[:, None], e[None, :])
            kernel = np.exp(-lower) * exprel(-np.abs(gap))
            mixed = block.theta.T * block.interaction
            total += float(np.real(np.sum(mixed * kernel))) * block.cutoff
        return -total / self._z0()

    def exact_value(self, zeta: float = 1.0) -> float:
        """A_tau(zeta) = Tr(Theta e^{-(H_0 + zeta W)} f(N)) / Z_{tau,0}."""
        total = 0.0
        for block in self.blocks:
            hamiltonian = np.diag(block.energies) + zeta * block.interaction
            energies, vectors = np.linalg.eigh(hamiltonian)
            rotated = vectors.conj().T @ block.theta @ vectors
            value = np.sum(np.real(np.diag(rotated)) * np.exp(-energies))
            total += float(value) * block.cutoff
        return total / self._z0()

    def remainder(
        self, order: int, zeta: float = 1.0, quadrature_order: int = 16
    ) -> float:
        """R_M(zeta) = A_tau(zeta) - sum_{m < M} a_{tau,m} zeta^m, M <= 3."""
        if order > MAX_QUANTUM_ORDER + 1:
            raise SizeError(f"remainder order must be at most 3, got {order}")
        partial = sum(
            self.coefficient(m, quadrature_order) * zeta**m for m in range(order)
        )
        return self.exact_value(zeta) - partial

    def bound(self, m: int) -> float:
        """K^p ||xi|| (K^2 ||w||_inf)^m / (2^m m!)."""
        return series_bound(
            self.cutoff.radius,
            self.p,
            kernel_norm(self.xi),
            self.potential.sup_norm(),
            m,
        )

    def remainder_bound(self, order: int, zeta: float = 1.0) -> float:
        """Feynman-Kac type bound on |R_M(zeta)|."""
        return remainder_bound(
            self.cutoff.radius,
            self.p,
            kernel_norm(self.xi),
            self.potential.sup_norm(),
            order,
            zeta,
        )


def duhamel_coefficient_a_tau_m(
    basis: FockBasis,
    kappa: float,
    tau: float,
    w: Potential,
    f: CutoffFunction,
    xi: np.ndarray,
    p: int,
    m: int,
    order: int = MIN_QUADRATURE_ORDER,
) -> float:
    """
    Quantum Duhamel coefficient a^xi_{tau,m}.

    Args:
        basis: Fock basis with n_max >= K tau
        kappa: Positive mass parameter
        tau: Mean-field parameter
        w: Pair potential
        f: Mass cutoff
        xi: p-particle kernel
        p: Order of the lift
        m: Expansion order, 0..2
        order: Gauss-Legendre points per panel and axis

    Raises:
        SizeError: If m > 2
        TruncationError: If the basis is too small for the cutoff
    """
    return DuhamelExpansion(basis, kappa, tau, w, f, xi, p).coefficient(m, order)


def duhamel_remainder(
    basis: FockBasis,
    kappa: float,
    tau: float,
    w: Potential,
    f: CutoffFunction,
    xi: np.ndarray,
    p: int,
    order: int,
    zeta: float = 1.0,
) -> float:
    """A_tau(zeta) minus the Duhamel terms below the given order."""
    expansion = DuhamelExpansion(basis, kappa, tau, w, f, xi, p)
    return expansion.remainder(order, zeta)


def shifted_duhamel_coefficient(
    basis: FockBasis,
    kappa: float,
    nu: float,
    tau: float,
    w: Potential,
    f: CutoffFunction,
    xi: np.ndarray,
    p: int,
    m: int,
    order: Optional[int] = None,
) -> float:
    """Coefficient of the model with chemical potential shifted, h -> h + nu."""
    return duhamel_coefficient_a_tau_m(
        basis, kappa + nu, tau, w, f, xi, p, m, order or MIN_QUADRATURE_ORDER
    )
