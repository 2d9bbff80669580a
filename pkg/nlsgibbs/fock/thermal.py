"""
Thermal states e^{-H_tau} f(N_tau) by per-block diagonalization.

H_tau = H_{tau,0} + zeta W_tau conserves (n, P), so one Hermitian
eigendecomposition per block gives e^{-sH}, e^{i t tau H} and every trace.
"""

import logging
import math
import time
from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np
import scipy.sparse as sp

from nlsgibbs.classical.cutoff import CutoffFunction, UnitCutoff
from nlsgibbs.classical.observables import check_order
from nlsgibbs.exceptions import (
    DegenerateStateError,
    InternalConsistencyError,
    TruncationError,
)
from nlsgibbs.fock.basis import BlockKey, FockBasis
from nlsgibbs.fock.free import free_partition_sum, log_free_partition_function
from nlsgibbs.fock.operators import BlockOperator, monomial_triplets
from nlsgibbs.utils.stats import hermitize

logger = logging.getLogger(__name__)

RECONSTRUCTION_TOLERANCE = 1e-10
UNIT_CUTOFF_TAIL = 1e-12


class ThermalDecomposition:
    """
    Eigenvalues and eigenvectors of H_tau = H_{tau,0} + zeta W_tau per block.

    Attributes:
        basis: Fock basis
        tau: Mean-field parameter
        zeta: Coupling multiplying W_tau
        energies: Eigenvalues in basis order (block by block)
        vectors: Block-diagonal sparse matrix of eigenvectors
        interacting: False when no interaction was included
    """

    def __init__(
        self,
        basis: FockBasis,
        tau: float,
        zeta: float,
        blocks: Dict[BlockKey, Tuple[np.ndarray, np.ndarray]],
        interacting: bool,
        kappa: float,
    ):
        self.basis = basis
        self.tau = tau
        self.zeta = zeta
        self.kappa = kappa
        self.interacting = interacting
        self.blocks = blocks
        ordered = [blocks[key] for key in basis.block_keys]
        self.energies = np.concatenate([e for e, _ in ordered])
        self.vectors = sp.block_diag([v for _, v in ordered], format="csr")

    def particle_numbers(self) -> np.ndarray:
        """Particle number of each eigenvector (constant per block)."""
        return self.basis.particle_numbers

    def evolution(self, t: float) -> sp.csr_matrix:
        """e^{-i t tau H_tau} as a sparse block-diagonal matrix."""
        phases = sp.diags(np.exp(-1j * t * self.tau * self.energies))
        return (self.vectors @ phases @ self.vectors.conj().T).tocsr()


def _diagonalize(
    key: BlockKey, block: np.ndarray
) -> Tuple[BlockKey, np.ndarray, np.ndarray]:
    energies, vectors = np.linalg.eigh(block)
    scale = max(1.0, float(np.max(np.abs(block))) if block.size else 1.0)
    error = np.max(np.abs(vectors @ np.diag(energies) @ vectors.conj().T - block))
    if error > RECONSTRUCTION_TOLERANCE * scale:
        raise InternalConsistencyError(
            f"eigendecomposition of block {key} is inaccurate ({error:.3g})"
        )
    return key, energies, vectors


def decompose(
    h0: BlockOperator,
    kappa: float,
    interaction: Optional[BlockOperator] = None,
    zeta: float = 1.0,
    executor: Optional[Executor] = None,
) -> ThermalDecomposition:
    """
    Diagonalize H_tau block by block.

    Args:
        h0: Free Hamiltonian H_{tau,0}
        kappa: Mass parameter of h0, used by free-state closed forms
        interaction: W_tau or W'_tau (None for the free state)
        zeta: Real coupling in front of the interaction
        executor: Optional pool; blocks are diagonalized in parallel

    Returns:
        ThermalDecomposition

    Raises:
        InternalConsistencyError: If H_tau couples blocks or a block's
            reconstruction error exceeds 1e-10
    """
    basis = h0.basis
    tau = float(h0.tau) if h0.tau is not None else 1.0
    started = time.perf_counter()
    if interaction is None:
        energies = h0.matrix.diagonal().real
        blocks = {}
        for key, rows in basis.blocks.items():
            dim = rows.stop - rows.start
            blocks[key] = (energies[rows].copy(), np.eye(dim))
        return ThermalDecomposition(basis, tau, zeta, blocks, False, kappa)

    hamiltonian = h0 + interaction.scaled(zeta)
    if not hamiltonian.is_block_diagonal():
        raise InternalConsistencyError("H_tau couples different (n, P) blocks")
    keys = basis.block_keys
    dense = [hamiltonian.block(key) for key in keys]
    if executor is None:
        results = [_diagonalize(k, b) for k, b in zip(keys, dense)]
    else:
        results = list(executor.map(_diagonalize, keys, dense))
    blocks = {key: (energies, vectors) for key, energies, vectors in results}
    logger.info(
        "diagonalized %d blocks (%d states) in %.2fs",
        len(keys),
        basis.size,
        time.perf_counter() - started,
    )
    return ThermalDecomposition(basis, tau, zeta, blocks, True, kappa)


def check_truncation(
    decomposition: ThermalDecomposition, f: CutoffFunction, tau: float
) -> None:
    """
    Refuse states whose cutoff does not vanish beyond the basis.

    Raises:
        TruncationError: If K tau > n_max, or if the unit cutoff is used with an
            interaction or with a free tail above 1e-12
    """
    basis = decomposition.basis
    if isinstance(f, UnitCutoff):
        if decomposition.interacting:
            raise TruncationError("the unit cutoff is only sound for the free state")
        _, tail = free_partition_sum(
            basis.mode_set, decomposition.kappa, tau, basis.n_max
        )
        if not tail < UNIT_CUTOFF_TAIL:
            raise TruncationError(
                f"free tail beyond n_max={basis.n_max} is {tail:.3g}, "
                f"above {UNIT_CUTOFF_TAIL}"
            )
        return
    if f.radius * tau > basis.n_max:
        raise TruncationError(
            f"cutoff radius {f.radius:g} times tau {tau:g} exceeds n_max={basis.n_max}"
        )


class ThermalState:
    """
    The state A -> Tr(A e^{-H_tau} f(N_tau)) / Tr(e^{-H_tau} f(N_tau)).

    Weights are shifted by the smallest energy so that large |E| stays finite;
    log_partition_function carries the shift.
    """

    def __init__(
        self, decomposition: ThermalDecomposition, f: CutoffFunction, tau: float
    ):
        check_truncation(decomposition, f, tau)
        self.decomposition = decomposition
        self.cutoff = f
        self.tau = tau
        energies = decomposition.energies
        cut = f(decomposition.particle_numbers() / tau)
        support = cut > 0
        if not np.any(support):
            raise DegenerateStateError("the cutoff vanishes on the whole basis")
        self.shift = float(np.min(energies[support]))
        self.weights = np.where(support, np.exp(-(energies - self.shift)) * cut, 0.0)
        total = float(self.weights.sum())
        if total == 0.0 or not math.isfinite(total):
            raise DegenerateStateError(f"thermal trace is {total}")
        self._total = total
        probabilities = sp.diags(self.weights / total)
        vectors = decomposition.vectors
        self.density = (vectors @ probabilities @ vectors.conj().T).tocsr()

    @property
    def log_partition_function(self) -> float:
        """log Z_tau."""
        return math.log(self._total) - self.shift

    @property
    def partition_function(self) -> float:
        """Z_tau (may overflow to inf for strongly focusing states)."""
        try:
            return math.exp(self.log_partition_function)
        except OverflowError:
            return math.inf

    def expectation(self, op: BlockOperator) -> complex:
        """Tr(A rho_tau) = sum_ij A_ij rho_ji."""
        return complex(op.matrix.multiply(self.density.T).sum())

    def expectation_triplets(
        self, rows: np.ndarray, cols: np.ndarray, values: np.ndarray
    ) -> complex:
        """Tr(A rho_tau) for A given by its nonzero entries."""
        if rows.size == 0:
            return 0j
        entries = np.asarray(self.density[cols, rows]).ravel()
        return complex(np.sum(values * entries))


@dataclass
class PartitionFunctions:
    """Z_tau, Z_{tau,0} and their ratio, with logarithms."""

    log_z_tau: float
    log_z_tau0: float

    @property
    def z_tau(self) -> float:
        return _safe_exp(self.log_z_tau)

    @property
    def z_tau0(self) -> float:
        return _safe_exp(self.log_z_tau0)

    @property
    def relative(self) -> float:
        """Relative partition function Z_tau / Z_{tau,0}."""
        return _safe_exp(self.log_z_tau - self.log_z_tau0)


def _safe_exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return math.inf


def partition_functions(
    decomposition: ThermalDecomposition, f: CutoffFunction, tau: float
) -> PartitionFunctions:
    """
    Z_tau from the eigenvalues and Z_{tau,0} from the product formula.

    Raises:
        TruncationError: If the cutoff does not vanish beyond the basis
    """
    state = ThermalState(decomposition, f, tau)
    basis = decomposition.basis
    log_z0 = log_free_partition_function(basis.mode_set, decomposition.kappa, tau)
    return PartitionFunctions(state.log_partition_function, log_z0)


def quantum_expectation(
    op: BlockOperator,
    decomposition: ThermalDecomposition,
    f: CutoffFunction,
    tau: float,
) -> complex:
    """rho_tau(A) via the eigenbasis."""
    return ThermalState(decomposition, f, tau).expectation(op)


def correlation_from_state(state: ThermalState, p: int) -> np.ndarray:
    """
    gamma_{tau,p}(k; l) = tau^{-p} rho_tau(a*_{l1}..a*_{lp} a_{k1}..a_{kp}).

    Multi-indices are flattened as k1 * d + k2; the result is Hermitized.
    """
    check_order(p)
    basis = state.decomposition.basis
    modes = basis.mode_set.modes
    d = basis.mode_set.d
    size = d**p
    gamma = np.zeros((size, size), dtype=complex)
    labels: List[List[int]] = [
        [int(modes[j]) for j in np.unravel_index(i, (d,) * p)] for i in range(size)
    ]
    for row, ks in enumerate(labels):
        for col, ls in enumerate(labels):
            triplets = monomial_triplets(basis, ls, ks)
            gamma[row, col] = state.expectation_triplets(*triplets)
    return hermitize(gamma) / state.tau**p


def gamma_tau_p(
    decomposition: ThermalDecomposition, f: CutoffFunction, tau: float, p: int
) -> np.ndarray:
    """
    Quantum p-particle correlation function.

    Raises:
        SizeError: If p > 2
    """
    return correlation_from_state(ThermalState(decomposition, f, tau), p)


def heisenberg_evolve(
    op: BlockOperator, decomposition: ThermalDecomposition, t: float, tau: float
) -> BlockOperator:
    """Psi^t_tau(A) = e^{i t tau H} A e^{-i t tau H}."""
    if t == 0.0:
        return op
    if tau != decomposition.tau:
        raise ValueError("tau does not match the decomposition")
    forward = decomposition.evolution(t)
    evolved = forward.conj().T @ op.matrix @ forward
    return BlockOperator(op.basis, evolved, op.hermitian, op.tau, f"Psi({op.name})")
