"""
Zeroth-Order Basis

Eigen-decomposition of the field-free Hamiltonian H0, in the hermitian or the
complex-symmetric (c-product normalized) setting, and the two-surface basis
with its inter-surface dipole matrix.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np
import scipy.linalg

from src.utils.errors import DegeneracyError, InvalidInputError
from src.utils.log_utils import get_module_logger

logger = get_module_logger('models')

MODES = ("hermitian", "complex-symmetric")
SYMMETRY_TOLERANCE = 1e-10
C_NORM_TOLERANCE = 1e-10


@dataclass(frozen=True)
class ZerothOrderBasis:
    """
    Eigenbasis of H0 and the dipole matrix expressed in it.

    Attributes:
        energies: (N_m,) eigenvalues, ascending real part
        vectors: (n_grid, N_m) right eigenvectors (identity for level models)
        mode: 'hermitian' or 'complex-symmetric'
        dipole: (N_m, N_m) dipole matrix mu_ij in the eigenbasis
        labels: (surface, v) per state
    """
    energies: np.ndarray = field(repr=False)
    vectors: np.ndarray = field(repr=False)
    mode: str
    dipole: np.ndarray = field(repr=False)
    labels: Tuple[Tuple[int, int], ...] = field(default=(), repr=False)

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidInputError(f"unknown basis mode '{self.mode}', expected one of {MODES}")
        energies = np.asarray(self.energies, dtype=complex)
        dipole = np.asarray(self.dipole, dtype=complex)
        n = energies.shape[0]
        if dipole.shape != (n, n):
            raise InvalidInputError(f"dipole matrix shape {dipole.shape} does not match {n} states")
        labels = tuple(tuple(int(v) for v in label) for label in self.labels) or \
            tuple((0, i) for i in range(n))
        if len(labels) != n:
            raise InvalidInputError(f"{len(labels)} labels for {n} states")
        object.__setattr__(self, "energies", energies)
        object.__setattr__(self, "dipole", dipole)
        object.__setattr__(self, "labels", labels)

    @property
    def size(self) -> int:
        return self.energies.shape[0]

    @property
    def hermitian(self) -> bool:
        return self.mode == "hermitian"

    def index_of(self, surface: int, level: int) -> int:
        try:
            return self.labels.index((surface, level))
        except ValueError:
            raise InvalidInputError(f"no state (surface={surface}, v={level}) in the basis") from None

    def surface_indices(self, surface: int) -> list:
        return [i for i, (s, _) in enumerate(self.labels) if s == surface]


def _check_symmetry(matrix: np.ndarray, mode: str) -> None:
    scale = max(1.0, float(np.max(np.abs(matrix))))
    partner = matrix.conj().T if mode == "hermitian" else matrix.T
    asymmetry = float(np.max(np.abs(matrix - partner)))
    if asymmetry > SYMMETRY_TOLERANCE * scale:
        raise InvalidInputError(
            f"matrix is not {mode} (max deviation {asymmetry:.3e}); choose the matching mode")


def diagonalize_h0(matrix: np.ndarray, mode: str = "hermitian") -> ZerothOrderBasis:
    """
    Diagonalize the field-free Hamiltonian.

    Hermitian matrices use eigh (orthonormal vectors). Complex-symmetric
    matrices use the general eigensolver and each vector is rescaled to unit
    c-norm v^T v = 1.

    Args:
        matrix: Square complex matrix
        mode: 'hermitian' or 'complex-symmetric'

    Returns:
        ZerothOrderBasis sorted by ascending real part, zero dipole
    """
    matrix = np.asarray(matrix)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise InvalidInputError(f"H0 must be square, got shape {matrix.shape}")
    if mode not in MODES:
        raise InvalidInputError(f"unknown basis mode '{mode}', expected one of {MODES}")
    _check_symmetry(matrix, mode)

    if mode == "hermitian":
        if np.iscomplexobj(matrix) and not np.any(matrix.imag):
            matrix = matrix.real
        energies, vectors = scipy.linalg.eigh(matrix)
        energies = energies.astype(complex)
    else:
        energies, vectors = scipy.linalg.eig(matrix)
        c_norms = np.sum(vectors * vectors, axis=0)
        for j, c_norm in enumerate(c_norms):
            if abs(c_norm) < C_NORM_TOLERANCE:
                raise DegeneracyError(j, c_norm)
        vectors = vectors / np.sqrt(c_norms)

    order = np.argsort(energies.real, kind="stable")
    energies = energies[order]
    vectors = vectors[:, order]
    n = matrix.shape[0]
    logger.debug(f"Diagonalized {n}x{n} {mode} H0: lowest eigenvalue {energies[0]:.6g}")
    return ZerothOrderBasis(energies=energies, vectors=vectors, mode=mode,
                            dipole=np.zeros((n, n), dtype=complex))


def couple_surfaces(lower: ZerothOrderBasis, upper: ZerothOrderBasis,
                    points: np.ndarray, dipole_function: Callable[[np.ndarray], np.ndarray],
                    energy_cutoff: Optional[float] = None) -> ZerothOrderBasis:
    """
    Join two surface bases and build their inter-surface dipole coupling.

    mu_ij = sum_r chi_i(r) mu(r) chi_j(r) for i on the lower and j on the
    upper surface (conjugated left vector in the hermitian case); both
    intra-surface blocks are zero.

    Args:
        lower: Basis of surface 0
        upper: Basis of surface 1
        points: Coordinate grid points shared by both surfaces
        dipole_function: mu(r), vectorised
        energy_cutoff: Drop upper-surface states with Re eps above this value

    Returns:
        Combined ZerothOrderBasis labelled (0, v) then (1, v)
    """
    upper_energies, upper_vectors = upper.energies, upper.vectors
    if energy_cutoff is not None:
        keep = upper_energies.real <= energy_cutoff
        upper_energies, upper_vectors = upper_energies[keep], upper_vectors[:, keep]
        logger.info(f"Energy cutoff {energy_cutoff}: keeping {int(keep.sum())}/{upper.size} upper states")

    mode = "hermitian" if lower.hermitian and upper.hermitian else "complex-symmetric"
    mu_r = np.asarray(dipole_function(np.asarray(points, dtype=float)), dtype=float)
    left = lower.vectors.conj() if mode == "hermitian" else lower.vectors
    block = left.T @ (mu_r[:, np.newaxis] * upper_vectors)

    n_lower, n_upper = lower.size, upper_energies.shape[0]
    dipole = np.zeros((n_lower + n_upper, n_lower + n_upper), dtype=complex)
    dipole[:n_lower, n_lower:] = block
    dipole[n_lower:, :n_lower] = block.conj().T if mode == "hermitian" else block.T

    vectors = scipy.linalg.block_diag(lower.vectors, upper_vectors)
    labels = tuple((0, v) for v in range(n_lower)) + tuple((1, v) for v in range(n_upper))
    return ZerothOrderBasis(energies=np.concatenate([lower.energies, upper_energies]),
                            vectors=vectors, mode=mode, dipole=dipole, labels=labels)


def lowest_states(basis: ZerothOrderBasis, n_states: int) -> ZerothOrderBasis:
    """Keep the n_states lowest states of a single-surface basis."""
    if n_states < 1 or n_states > basis.size:
        raise InvalidInputError(f"cannot keep {n_states} of {basis.size} states")
    keep = slice(0, n_states)
    return ZerothOrderBasis(energies=basis.energies[keep], vectors=basis.vectors[:, keep],
                            mode=basis.mode, dipole=basis.dipole[keep, keep],
                            labels=basis.labels[keep])


def bound_state_count(basis: ZerothOrderBasis, surface: int = 0, threshold: float = 1e-3) -> int:
    """States of a surface with Re eps < 0 and |Im eps| < threshold."""
    indices = basis.surface_indices(surface)
    energies = basis.energies[indices]
    return int(np.count_nonzero((energies.real < 0) & (np.abs(energies.imag) < threshold)))


def bound_state_indices(basis: ZerothOrderBasis, surface: int = 0, threshold: float = 1e-3) -> list:
    return [i for i in basis.surface_indices(surface)
            if basis.energies[i].real < 0 and abs(basis.energies[i].imag) < threshold]


def levels_basis(energies, dipole, mode: str = "hermitian") -> ZerothOrderBasis:
    """Basis given directly by its eigenvalues and dipole matrix (no grid)."""
    energies = np.asarray(energies, dtype=complex)
    n = energies.shape[0]
    dipole = np.asarray(dipole, dtype=complex)
    if mode == "hermitian" and not np.allclose(dipole, dipole.conj().T, atol=SYMMETRY_TOLERANCE):
        raise InvalidInputError("dipole matrix of a hermitian level model must be hermitian")
    return ZerothOrderBasis(energies=energies, vectors=np.eye(n, dtype=complex), mode=mode,
                            dipole=dipole, labels=tuple((0, i) for i in range(n)))
