"""Observables on field samples: lifts Theta(xi) and scalar functionals."""

from dataclasses import dataclass
from enum import Enum
from typing import Any, Dict, Optional

import numpy as np

from nlsgibbs.classical.energy import free_energies, interaction_energies, masses
from nlsgibbs.exceptions import SizeError
from nlsgibbs.models import ModeSet
from nlsgibbs.potentials import Potential
from nlsgibbs.spectral import l4_norms


def check_order(p: int) -> None:
    """
    Guard the p-particle order.

    Raises:
        SizeError: If p is not 1 or 2
    """
    if p not in (1, 2):
        raise SizeError(f"only p in {{1, 2}} is supported, got p={p}")


def tensor_power(coeffs: np.ndarray, p: int) -> np.ndarray:
    """phi^{(x) p} as vectors of length d^p, batch along the first axis."""
    check_order(p)
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    if p == 1:
        return coeffs
    n, d = coeffs.shape
    return np.einsum("ni,nj->nij", coeffs, coeffs).reshape(n, d * d)


def identity_kernel(mode_set: ModeSet, p: int = 1) -> np.ndarray:
    """Identity on the p-particle mode space."""
    check_order(p)
    return np.eye(mode_set.d**p, dtype=complex)


def mode_projector(mode_set: ModeSet, k: int) -> np.ndarray:
    """Rank-one projector onto mode k (p = 1)."""
    xi = np.zeros((mode_set.d, mode_set.d), dtype=complex)
    i = mode_set.index(k)
    xi[i, i] = 1.0
    return xi


def rank_one_kernel(vector: np.ndarray) -> np.ndarray:
    """|v><v| for a vector on the p-particle mode space."""
    vector = np.asarray(vector, dtype=complex)
    return np.outer(vector, np.conj(vector))


def kernel_norm(xi: np.ndarray) -> float:
    """Operator norm of a kernel matrix."""
    return float(np.linalg.norm(np.asarray(xi), 2))


def kernel_order(xi: np.ndarray, mode_set: ModeSet) -> int:
    """
    Infer p from the kernel shape.

    Raises:
        SizeError: If the shape is not (d^p, d^p) with p in {1, 2}
    """
    xi = np.asarray(xi)
    for p in (1, 2):
        if xi.shape == (mode_set.d**p, mode_set.d**p):
            return p
    raise SizeError(f"kernel of shape {xi.shape} is not a 1- or 2-particle kernel")


def theta_values(coeffs: np.ndarray, xi: np.ndarray, p: int) -> np.ndarray:
    """
    Theta(xi) = <phi^{(x)p}, xi phi^{(x)p}> per sample.

    The kernel entry xi[l, k] multiplies conj(phi_l) phi_k.
    """
    vectors = tensor_power(coeffs, p)
    return np.einsum("nl,lk,nk->n", np.conj(vectors), np.asarray(xi), vectors)


class ObservableKind(Enum):
    """Scalar functionals available as observables."""

    THETA = "theta"
    MASS = "mass"
    INTERACTION = "interaction"
    HAMILTONIAN = "hamiltonian"
    L4 = "l4"


@dataclass
class ObservableSpec:
    """Either a lift Theta(xi) of order p or a scalar functional."""

    kind: ObservableKind
    xi: Optional[np.ndarray] = None
    p: int = 1

    def __post_init__(self) -> None:
        """Validate observable spec."""
        if self.kind is ObservableKind.THETA:
            if self.xi is None:
                raise ValueError("a lift observable needs a kernel xi")
            check_order(self.p)
            self.xi = np.asarray(self.xi, dtype=complex)
            size = self.xi.shape[0]
            if self.xi.shape != (size, size):
                raise ValueError("kernel must be a square matrix")

    @classmethod
    def theta(cls, xi: np.ndarray, p: int = 1) -> "ObservableSpec":
        return cls(ObservableKind.THETA, xi, p)

    def norm(self) -> float:
        """Operator norm of xi (1 for scalar functionals)."""
        return kernel_norm(self.xi) if self.xi is not None else 1.0

    def evaluate(
        self,
        coeffs: np.ndarray,
        k_max: int,
        w: Optional[Potential] = None,
        kappa: Optional[float] = None,
    ) -> np.ndarray:
        """
        Per-sample values on coefficients of shape (n, d).

        Raises:
            ValueError: If w or kappa is needed and missing
        """
        coeffs = np.atleast_2d(coeffs)
        if self.kind is ObservableKind.THETA:
            assert self.xi is not None
            if self.xi.shape[0] != (2 * k_max + 1) ** self.p:
                raise SizeError("kernel does not match the mode set")
            return theta_values(coeffs, self.xi, self.p)
        if self.kind is ObservableKind.MASS:
            return masses(coeffs)
        if self.kind is ObservableKind.L4:
            return l4_norms(coeffs, k_max)
        if w is None:
            raise ValueError(f"observable '{self.kind.value}' needs a potential")
        interaction = interaction_energies(coeffs, w, k_max)
        if self.kind is ObservableKind.INTERACTION:
            return interaction
        if kappa is None:
            raise ValueError("the Hamiltonian observable needs kappa")
        return free_energies(coeffs, kappa, k_max) + interaction

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind.value}
        if self.xi is not None:
            data["p"] = self.p
            data["xi"] = [[[z.real, z.imag] for z in row] for row in self.xi]
        return data
