"""
Second-quantized operators on the truncated Fock basis.

Ladder monomials are built for all basis states at once: annihilators and
creators act on the occupation arrays, and targets are looked up by key.
Operators are stored as one global CSR matrix with the basis's block layout.
"""

import logging
import struct
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import BinaryIO, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp

from nlsgibbs.classical.observables import check_order
from nlsgibbs.exceptions import (
    DomainError,
    InternalConsistencyError,
    PrecisionError,
)
from nlsgibbs.fock.basis import BlockKey, FockBasis
from nlsgibbs.potentials import Potential, fourier_coefficients, value_at_zero
from nlsgibbs.spectral import eigenvalues

logger = logging.getLogger(__name__)

HERMITICITY_TOLERANCE = 1e-12

Triplets = Tuple[np.ndarray, np.ndarray, np.ndarray]


class OperatorKind(Enum):
    """Operators available from build_operator."""

    H0 = "H0"
    N_TAU = "Ntau"
    W_TAU = "Wtau"
    W_TAU_PRIME = "WtauPrime"
    THETA = "Theta"


@dataclass
class BlockOperator:
    """
    Operator on a truncated Fock basis.

    Attributes:
        basis: Basis the matrix acts on
        matrix: Sparse matrix in basis order
        hermitian: Whether the operator is Hermitian
        tau: Mean-field parameter, if the operator carries one
        name: Label used in logs and dumps
    """

    basis: FockBasis
    matrix: sp.csr_matrix
    hermitian: bool = True
    tau: Optional[float] = None
    name: str = ""

    def __post_init__(self) -> None:
        """Validate operator shape."""
        self.matrix = sp.csr_matrix(self.matrix, dtype=complex)
        size = self.basis.size
        if self.matrix.shape != (size, size):
            raise ValueError(
                f"operator shape {self.matrix.shape} does not match basis size {size}"
            )

    def block(self, key: BlockKey) -> np.ndarray:
        """Dense matrix of one (n, P) block."""
        rows = self.basis.blocks[key]
        return self.matrix[rows, rows].toarray()

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def is_block_diagonal(self) -> bool:
        """True when no entry couples different (n, P) blocks."""
        coo = self.matrix.tocoo()
        ids = self.basis.block_ids
        return bool(np.all(ids[coo.row] == ids[coo.col]))

    def hermiticity_error(self) -> float:
        """Largest entry of A - A^H."""
        diff = self.matrix - self.matrix.conj().T
        return float(np.max(np.abs(diff.data))) if diff.nnz else 0.0

    def __add__(self, other: "BlockOperator") -> "BlockOperator":
        return BlockOperator(
            self.basis,
            self.matrix + other.matrix,
            self.hermitian and other.hermitian,
            self.tau,
            f"{self.name}+{other.name}",
        )

    def scaled(self, factor: float) -> "BlockOperator":
        """Real multiple of the operator."""
        return BlockOperator(
            self.basis, self.matrix * factor, self.hermitian, self.tau, self.name
        )

    def __matmul__(self, other: "BlockOperator") -> "BlockOperator":
        return BlockOperator(
            self.basis,
            self.matrix @ other.matrix,
            False,
            self.tau,
            f"{self.name}*{other.name}",
        )


def monomial_triplets(
    basis: FockBasis, creators: Sequence[int], annihilators: Sequence[int]
) -> Triplets:
    """
    Nonzero entries of a*_{c1}...a*_{cq} a_{a1}...a_{ar} on the basis.

    Modes are given as momenta k. Targets that leave the basis (more than
    n_max particles) are dropped.

    Returns:
        (rows, cols, values) of the matrix in basis order
    """
    mode_set = basis.mode_set
    occupations = basis.states.copy()
    sources = np.arange(basis.size)
    amplitudes = np.ones(basis.size)
    for k in reversed(list(annihilators)):
        i = mode_set.index(k)
        present = occupations[:, i]
        keep = present > 0
        occupations, sources = occupations[keep], sources[keep]
        amplitudes = amplitudes[keep] * np.sqrt(present[keep])
        occupations[:, i] -= 1
    for k in reversed(list(creators)):
        i = mode_set.index(k)
        amplitudes = amplitudes * np.sqrt(occupations[:, i] + 1.0)
        occupations[:, i] += 1
    targets = basis.lookup(occupations)
    inside = targets >= 0
    return targets[inside], sources[inside], amplitudes[inside]


def ladder_operator(
    basis: FockBasis, creators: Sequence[int], annihilators: Sequence[int]
) -> sp.csr_matrix:
    """Sparse matrix of a normal-ordered ladder monomial on the basis."""
    rows, cols, values = monomial_triplets(basis, creators, annihilators)
    return sp.csr_matrix(
        (values.astype(complex), (rows, cols)), shape=(basis.size, basis.size)
    )


def _from_triplets(basis: FockBasis, parts: List[Triplets]) -> sp.csr_matrix:
    size = basis.size
    if not parts:
        return sp.csr_matrix((size, size), dtype=complex)
    rows = np.concatenate([p[0] for p in parts])
    cols = np.concatenate([p[1] for p in parts])
    values = np.concatenate([p[2] for p in parts]).astype(complex)
    # duplicates are summed on conversion
    return sp.coo_matrix((values, (rows, cols)), shape=(size, size)).tocsr()


def _check_hermitian(op: BlockOperator) -> BlockOperator:
    scale = max(1.0, float(np.max(np.abs(op.matrix.data))) if op.matrix.nnz else 1.0)
    error = op.hermiticity_error()
    if error > HERMITICITY_TOLERANCE * scale:
        raise InternalConsistencyError(
            f"assembled {op.name} is not Hermitian (deviation {error:.3g})"
        )
    return op


def free_hamiltonian(basis: FockBasis, kappa: float, tau: float) -> BlockOperator:
    """H_{tau,0} = sum_k lambda_k a*_k a_k / tau, diagonal in the basis."""
    energies = basis.states @ eigenvalues(basis.mode_set, kappa) / tau
    return BlockOperator(basis, sp.diags(energies.astype(complex)), True, tau, "H0")


def number_operator(basis: FockBasis, tau: float) -> BlockOperator:
    """N_tau = (number of particles) / tau."""
    values = basis.particle_numbers / tau
    return BlockOperator(basis, sp.diags(values.astype(complex)), True, tau, "Ntau")


def interaction_operator(
    basis: FockBasis, tau: float, w: Optional[Potential]
) -> BlockOperator:
    """
    W_tau = (1/2 tau^2) sum_{r,s,m} w_hat(m) a*_{r+m} a*_{s-m} a_r a_s.

    All four indices range over the mode set, matching the classical quartic
    form of the truncated model.

    Raises:
        PrecisionError: If no potential is given
    """
    if w is None:
        raise PrecisionError("the interaction operator needs w_hat up to 2 k_max")
    k_max = basis.mode_set.k_max
    w_hat = fourier_coefficients(w, 2 * k_max)
    parts: List[Triplets] = []
    modes = basis.mode_set.modes
    for r in modes:
        for s in modes:
            for m in range(-2 * k_max, 2 * k_max + 1):
                coefficient = w_hat[m + 2 * k_max]
                if coefficient == 0.0:
                    continue
                if abs(r + m) > k_max or abs(s - m) > k_max:
                    continue
                rows, cols, values = monomial_triplets(
                    basis, [int(r + m), int(s - m)], [int(r), int(s)]
                )
                parts.append((rows, cols, coefficient * values))
    matrix = _from_triplets(basis, parts) / (2.0 * tau**2)
    op = BlockOperator(basis, matrix, True, tau, "Wtau")
    return _check_hermitian(op)


def lift_operator(
    basis: FockBasis, xi: np.ndarray, p: int, tau: float
) -> BlockOperator:
    """
    Theta_tau(xi) = tau^{-p} sum xi[l, k] a*_{l1}..a*_{lp} a_{k1}..a_{kp}.

    Multi-indices are flattened as l1 * d + l2. The kernel need not conserve
    momentum; such entries couple different blocks.
    """
    check_order(p)
    xi = np.asarray(xi, dtype=complex)
    d = basis.mode_set.d
    if xi.shape != (d**p, d**p):
        raise ValueError(f"kernel shape {xi.shape} does not match d^p = {d**p}")
    modes = basis.mode_set.modes
    parts: List[Triplets] = []
    for row, col in zip(*np.nonzero(xi)):
        ls = [int(modes[j]) for j in np.unravel_index(row, (d,) * p)]
        ks = [int(modes[j]) for j in np.unravel_index(col, (d,) * p)]
        rows, cols, values = monomial_triplets(basis, ls, ks)
        parts.append((rows, cols, xi[row, col] * values))
    hermitian = bool(np.allclose(xi, xi.conj().T, atol=HERMITICITY_TOLERANCE))
    matrix = _from_triplets(basis, parts) / tau**p
    return BlockOperator(basis, matrix, hermitian, tau, f"Theta_p{p}")


def build_operator(
    kind: Union[OperatorKind, str],
    basis: FockBasis,
    kappa: float,
    tau: float,
    w: Optional[Potential] = None,
    xi: Optional[np.ndarray] = None,
    p: int = 1,
) -> BlockOperator:
    """
    Assemble one of H0, N_tau, W_tau, W'_tau or Theta_tau(xi).

    W'_tau = W_tau + (w(0) / 2 tau) N_tau, with w(0) of the truncated model.

    Raises:
        DomainError: If tau <= 0 or kappa <= 0
        PrecisionError: If W_tau is requested without a potential
        InternalConsistencyError: If an assembled interaction is not Hermitian
    """
    kind = OperatorKind(kind)
    if not tau > 0:
        raise DomainError(f"tau must be positive, got {tau}")
    if kind is OperatorKind.H0:
        return free_hamiltonian(basis, kappa, tau)
    if kind is OperatorKind.N_TAU:
        return number_operator(basis, tau)
    if kind is OperatorKind.W_TAU:
        return interaction_operator(basis, tau, w)
    if kind is OperatorKind.W_TAU_PRIME:
        interaction = interaction_operator(basis, tau, w)
        assert w is not None
        w0 = value_at_zero(w, basis.mode_set.k_max)
        shift = number_operator(basis, tau).scaled(w0 / (2.0 * tau))
        op = interaction + shift
        op.name = "WtauPrime"
        return op
    if xi is None:
        raise ValueError("Theta needs a kernel xi")
    return lift_operator(basis, xi, p, tau)


@dataclass
class CCRDefect:
    """Deviation of [a_k, a*_k] from the identity on the truncated basis."""

    k: int
    max_below_top: float
    max_top: float

    @property
    def confined_to_top(self) -> bool:
        return self.max_below_top == 0.0


def ccr_defect(basis: FockBasis, k: int) -> CCRDefect:
    """
    [a_k, a*_k] - 1 restricted to the basis.

    Creation from the top layer leaves the basis, so the commutator is exact
    below n_max and deviates on the top layer only.
    """
    create = ladder_operator(basis, [k], [])
    annihilate = ladder_operator(basis, [], [k])
    defect = (annihilate @ create - create @ annihilate).toarray() - np.eye(basis.size)
    per_state = np.max(np.abs(defect), axis=1)
    top = basis.particle_numbers == basis.n_max
    result = CCRDefect(
        k,
        float(per_state[~top].max()) if np.any(~top) else 0.0,
        float(per_state[top].max()) if np.any(top) else 0.0,
    )
    logger.info(
        "CCR defect for mode %d: %.3g below n_max, %.3g on the top layer",
        k,
        result.max_below_top,
        result.max_top,
    )
    return result


_HEADER = struct.Struct("<qqq")


def dump_operator(op: BlockOperator, target: Union[str, Path, BinaryIO]) -> None:
    """
    Write a block-diagonal operator in the binary block layout.

    Each block is int64 n, int64 P, int64 dim, then dim*dim complex128 values
    in row-major order, all little-endian.

    Raises:
        ValueError: If the operator couples different blocks
    """
    if not op.is_block_diagonal():
        raise ValueError(f"operator {op.name} is not block diagonal")
    if isinstance(target, (str, Path)):
        with open(target, "wb") as handle:
            dump_operator(op, handle)
        return
    for key in op.basis.block_keys:
        block = op.block(key)
        target.write(_HEADER.pack(key[0], key[1], block.shape[0]))
        target.write(np.ascontiguousarray(block, dtype="<c16").tobytes())


def load_blocks(source: Union[str, Path, BinaryIO]) -> Dict[BlockKey, np.ndarray]:
    """Read blocks written by dump_operator."""
    if isinstance(source, (str, Path)):
        with open(source, "rb") as handle:
            return load_blocks(handle)
    blocks: Dict[BlockKey, np.ndarray] = {}
    while True:
        header = source.read(_HEADER.size)
        if not header:
            break
        if len(header) != _HEADER.size:
            raise ValueError("truncated operator dump")
        n, momentum, dim = _HEADER.unpack(header)
        payload = source.read(16 * dim * dim)
        if len(payload) != 16 * dim * dim:
            raise ValueError("truncated operator dump")
        blocks[(n, momentum)] = np.frombuffer(payload, dtype="<c16").reshape(dim, dim)
    return blocks


def load_operator(
    source: Union[str, Path, BinaryIO], basis: FockBasis, name: str = ""
) -> BlockOperator:
    """
    Rebuild a BlockOperator from a dump on the same basis.

    Raises:
        ValueError: If the dump's blocks do not match the basis
    """
    blocks = load_blocks(source)
    if set(blocks) != set(basis.blocks):
        raise ValueError("operator dump does not match the basis blocks")
    ordered = [blocks[key] for key in basis.block_keys]
    matrix = sp.block_diag(ordered, format="csr")
    hermitian = all(
        np.allclose(b, b.conj().T, atol=HERMITICITY_TOLERANCE) for b in ordered
    )
    return BlockOperator(basis, matrix, hermitian, None, name)
