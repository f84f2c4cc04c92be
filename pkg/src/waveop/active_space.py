"""
Active Space

Ordered selection of m zeroth-order states spanning the model space S0.
"""

from dataclasses import dataclass
from typing import Sequence, Tuple

import numpy as np

from src.models.hamiltonian import active_indices


@dataclass(frozen=True)
class ActiveSpace:
    """
    Active indices into a basis of size N_m.

    Attributes:
        indices: Ordered, distinct indices in [0, size)
        size: Basis dimension N_m
    """
    indices: Tuple[int, ...]
    size: int

    def __post_init__(self):
        checked = active_indices(self.indices, self.size)
        object.__setattr__(self, "indices", tuple(int(i) for i in checked))

    @classmethod
    def from_indices(cls, indices: Sequence[int], size: int) -> "ActiveSpace":
        return cls(tuple(indices), size)

    @property
    def m(self) -> int:
        return len(self.indices)

    @property
    def index_array(self) -> np.ndarray:
        return np.asarray(self.indices, dtype=int)

    @property
    def mask(self) -> np.ndarray:
        """True on active rows."""
        mask = np.zeros(self.size, dtype=bool)
        mask[self.index_array] = True
        return mask

    @property
    def complement(self) -> np.ndarray:
        return np.flatnonzero(~self.mask)

    def embedding(self) -> np.ndarray:
        """(N_m, m) matrix whose columns are the active unit vectors (P0 as a map)."""
        embed = np.zeros((self.size, self.m), dtype=complex)
        embed[self.index_array, np.arange(self.m)] = 1.0
        return embed

    def embed(self, blocks: np.ndarray) -> np.ndarray:
        """Lift (..., m, k) model-space coefficients into (..., N_m, k) full vectors."""
        blocks = np.asarray(blocks)
        full = np.zeros(blocks.shape[:-2] + (self.size, blocks.shape[-1]), dtype=complex)
        full[..., self.index_array, :] = blocks
        return full
