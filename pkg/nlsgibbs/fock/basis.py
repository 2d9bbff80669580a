"""
Occupation-number basis of the truncated bosonic Fock space.

States are occupation vectors (n_k) over the mode set with total particle
number at most n_max. They are ordered by block (n, P), where P = sum k n_k is
the total momentum, and lexicographically inside a block, so every block is a
contiguous range of basis indices.
"""

import itertools
import logging
from typing import Dict, List, Sequence, Tuple

import numpy as np
from scipy.special import comb

from nlsgibbs.exceptions import SizeError
from nlsgibbs.models import ModeSet

logger = logging.getLogger(__name__)

DEFAULT_SIZE_LIMIT = 200_000

BlockKey = Tuple[int, int]


def basis_size(d: int, n_max: int) -> int:
    """Number of occupation vectors over d modes with at most n_max particles."""
    return int(comb(n_max + d, d, exact=True))


def _layer(d: int, n: int) -> np.ndarray:
    """All occupation vectors over d modes with exactly n particles."""
    if n == 0:
        return np.zeros((1, d), dtype=np.int64)
    picks = np.array(
        list(itertools.combinations_with_replacement(range(d), n)), dtype=np.int64
    )
    occupations = np.zeros((picks.shape[0], d), dtype=np.int64)
    rows = np.repeat(np.arange(picks.shape[0]), n)
    np.add.at(occupations, (rows, picks.ravel()), 1)
    return occupations


class FockBasis:
    """
    Truncated Fock basis with (particle number, momentum) blocks.

    Attributes:
        mode_set: Modes of the one-particle space
        n_max: Largest total particle number kept
        states: Occupation vectors, shape (size, d)
        particle_numbers: Total particle number per state
        momenta: Total momentum per state
        blocks: Block key -> slice of basis indices
    """

    def __init__(
        self, mode_set: ModeSet, n_max: int, size_limit: int = DEFAULT_SIZE_LIMIT
    ):
        if n_max < 0:
            raise ValueError(f"n_max must be non-negative, got {n_max}")
        self.mode_set = mode_set
        self.n_max = int(n_max)
        d = mode_set.d
        size = basis_size(d, self.n_max)
        if size > size_limit:
            raise SizeError(
                f"Fock basis with d={d}, n_max={n_max} has {size} states, "
                f"limit is {size_limit}"
            )
        self.radix = self.n_max + 1
        if self.radix ** d >= 2**63:
            raise SizeError("occupation keys would overflow 64-bit integers")

        states = np.concatenate([_layer(d, n) for n in range(self.n_max + 1)])
        numbers = states.sum(axis=1)
        momenta = states @ mode_set.modes
        # np.lexsort uses the last key as primary
        keys = [states[:, i] for i in range(d - 1, -1, -1)] + [momenta, numbers]
        order = np.lexsort(keys)
        self.states = states[order]
        self.particle_numbers = numbers[order]
        self.momenta = momenta[order]

        self.blocks: Dict[BlockKey, slice] = {}
        boundaries = np.flatnonzero(
            (np.diff(self.particle_numbers) != 0) | (np.diff(self.momenta) != 0)
        )
        starts = np.concatenate([[0], boundaries + 1])
        stops = np.concatenate([boundaries + 1, [size]])
        for start, stop in zip(starts, stops):
            key = (int(self.particle_numbers[start]), int(self.momenta[start]))
            self.blocks[key] = slice(int(start), int(stop))
        self.block_ids = np.repeat(np.arange(len(self.blocks)), stops - starts)

        self._weights = self.radix ** np.arange(d, dtype=np.int64)
        encoded = self.encode(self.states)
        self._sorted_positions = np.argsort(encoded)
        self._sorted_keys = encoded[self._sorted_positions]
        logger.debug(
            "Fock basis: d=%d, n_max=%d, %d states, %d blocks",
            d,
            self.n_max,
            size,
            len(self.blocks),
        )

    @property
    def size(self) -> int:
        return int(self.states.shape[0])

    def __len__(self) -> int:
        return self.size

    @property
    def block_keys(self) -> List[BlockKey]:
        """Block keys in basis order."""
        return list(self.blocks)

    def block_key_of(self, index: int) -> BlockKey:
        """(n, P) of a basis state."""
        return int(self.particle_numbers[index]), int(self.momenta[index])

    def encode(self, occupations: np.ndarray) -> np.ndarray:
        """Mixed-radix integer keys of occupation vectors."""
        return np.asarray(occupations, dtype=np.int64) @ self._weights

    def lookup(self, occupations: np.ndarray) -> np.ndarray:
        """
        Basis indices of occupation vectors; -1 for vectors outside the basis.

        Vectors with negative entries or more than n_max particles are outside.
        """
        occupations = np.atleast_2d(np.asarray(occupations, dtype=np.int64))
        valid = np.all(occupations >= 0, axis=1) & (
            occupations.sum(axis=1) <= self.n_max
        )
        keys = self.encode(np.where(valid[:, None], occupations, 0))
        positions = np.searchsorted(self._sorted_keys, keys)
        positions = np.clip(positions, 0, self.size - 1)
        found = valid & (self._sorted_keys[positions] == keys)
        return np.where(found, self._sorted_positions[positions], -1)

    def index_of(self, occupation: Sequence[int]) -> int:
        """Basis index of one occupation vector (ordered like the mode set)."""
        return int(self.lookup(np.asarray(occupation))[0])

    def layer(self, n: int) -> np.ndarray:
        """Indices of states with exactly n particles."""
        return np.flatnonzero(self.particle_numbers == n)


def build_basis(
    mode_set: ModeSet, n_max: int, size_limit: int = DEFAULT_SIZE_LIMIT
) -> FockBasis:
    """
    Enumerate the truncated Fock basis.

    Args:
        mode_set: One-particle modes
        n_max: Largest total particle number
        size_limit: Refuse bases with more states than this

    Returns:
        FockBasis

    Raises:
        SizeError: If the basis exceeds size_limit

    Examples:
        >>> len(build_basis(ModeSet(1), 2))
        10
    """
    return FockBasis(mode_set, n_max, size_limit)
