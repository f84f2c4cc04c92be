"""
Time-Dependent Hamiltonian

H(t) = diag(eps) - mu E(t) - i V_opt(t) Q0 in the zeroth-order eigenbasis.
HamiltonianModel evaluates its action on whole time series of matrices
without ever forming the (N_t, N_m, N_m) stack.
"""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from src.models.basis import ZerothOrderBasis
from src.models.pulses import PulseSpec, TimeAbsorber, eval_field
from src.utils.errors import InvalidInputError


def active_indices(active, size: int) -> np.ndarray:
    """
    Validated index array of an active space.

    Accepts an ActiveSpace (anything with an 'indices' attribute) or a plain
    index sequence.
    """
    indices = np.asarray(getattr(active, "indices", active), dtype=int).ravel()
    if indices.size == 0:
        raise InvalidInputError("active space must contain at least one state")
    if np.any(indices < 0) or np.any(indices >= size):
        raise InvalidInputError(f"active index out of range [0, {size}): {indices.tolist()}")
    if np.unique(indices).size != indices.size:
        raise InvalidInputError(f"active indices must be distinct: {indices.tolist()}")
    return indices


def complement_mask(active, size: int) -> np.ndarray:
    mask = np.ones(size, dtype=bool)
    mask[active_indices(active, size)] = False
    return mask


@dataclass(frozen=True)
class HamiltonianModel:
    """
    Everything needed to evaluate H(t): basis, pulses, optional time absorber.

    Attributes:
        basis: Zeroth-order eigenbasis with its dipole matrix
        pulses: Laser pulses driving the dipole coupling
        absorber: Time absorber on the complement, or None
        hbar: Reduced Planck constant in model units
        T0: Physical end time; None falls back to the absorber onset
    """
    basis: ZerothOrderBasis
    pulses: Tuple[PulseSpec, ...] = ()
    absorber: Optional[TimeAbsorber] = None
    hbar: float = 1.0
    T0: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if self.hbar <= 0:
            raise InvalidInputError(f"hbar must be positive, got {self.hbar}")
        if self.T0 is None and self.absorber is not None:
            object.__setattr__(self, "T0", self.absorber.T0)
        if self.T0 is not None and not self.T0 > 0:
            raise InvalidInputError(f"physical end time must be positive, got {self.T0}")

    @property
    def size(self) -> int:
        return self.basis.size

    @property
    def energies(self) -> np.ndarray:
        return self.basis.energies

    @property
    def dipole(self) -> np.ndarray:
        return self.basis.dipole

    @property
    def dissipative(self) -> bool:
        """True when the basis itself carries a CAP (complex energies)."""
        return not self.basis.hermitian

    def field(self, t) -> np.ndarray:
        return eval_field(self.pulses, t)

    def absorber_value(self, t) -> np.ndarray:
        if self.absorber is None:
            return np.zeros_like(np.asarray(t, dtype=float))
        return self.absorber.value(t)

    def absorber_integral(self, t) -> np.ndarray:
        if self.absorber is None:
            return np.zeros_like(np.asarray(t, dtype=float))
        return self.absorber.integral(t)

    def without_pulses(self) -> "HamiltonianModel":
        return HamiltonianModel(self.basis, (), self.absorber, self.hbar, self.T0)

    def without_absorber(self) -> "HamiltonianModel":
        return HamiltonianModel(self.basis, self.pulses, None, self.hbar, self.T0)

    def apply(self, blocks: np.ndarray, times: np.ndarray, active) -> np.ndarray:
        """
        H(t_j) @ blocks[j] for every j.

        Args:
            blocks: (N_t, N_m, k) complex series
            times: (N_t,) sample times
            active: Active space defining Q0 for the absorber

        Returns:
            (N_t, N_m, k) series
        """
        field = self.field(times)[:, np.newaxis, np.newaxis]
        result = self.energies[np.newaxis, :, np.newaxis] * blocks
        result = result - field * np.matmul(self.dipole, blocks)
        if self.absorber is not None:
            damping = self.absorber_value(times)[:, np.newaxis, np.newaxis]
            mask = complement_mask(active, self.size)[np.newaxis, :, np.newaxis]
            result = result - 1j * damping * (mask * blocks)
        return result

    def columns(self, times: np.ndarray, indices: Sequence[int]) -> np.ndarray:
        """
        H(t_j)[:, indices] for every j, shape (N_t, N_m, len(indices)).

        Absorber entries vanish on active columns, so they are left out.
        """
        indices = np.asarray(indices, dtype=int)
        field = self.field(times)[:, np.newaxis, np.newaxis]
        columns = -field * self.dipole[np.newaxis, :, indices]
        columns[:, indices, np.arange(indices.size)] += self.energies[indices]
        return columns


def assemble_hamiltonian(basis: ZerothOrderBasis, pulses: Sequence[PulseSpec],
                         absorber: Optional[TimeAbsorber], active, t: float) -> np.ndarray:
    """
    Dense H(t) in the eigenbasis.

    Args:
        basis: Zeroth-order basis
        pulses: Pulse list
        absorber: Time absorber or None
        active: Active space (indices) defining Q0
        t: Time

    Returns:
        (N_m, N_m) complex matrix
    """
    n = basis.size
    mask = complement_mask(active, n)
    hamiltonian = np.diag(basis.energies).astype(complex)
    hamiltonian -= float(eval_field(pulses, t)) * basis.dipole
    if absorber is not None:
        hamiltonian[mask, mask] -= 1j * float(absorber.value(t))
    return hamiltonian


def hamiltonian_at(model: HamiltonianModel, active, t: float) -> np.ndarray:
    return assemble_hamiltonian(model.basis, model.pulses, model.absorber, active, t)
