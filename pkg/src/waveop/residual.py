"""
Bloch Residual and Effective Hamiltonians

Series built from the current wave operator X at every grid time:
the residual of the Bloch equation, the m x m effective Hamiltonian and the
dressed complement diagonal.
"""

from typing import Tuple, Union

import numpy as np

from src.models.hamiltonian import HamiltonianModel
from src.timegrid.grid import TimeGrid
from src.timegrid.spectral import derivative_values
from src.waveop.active_space import ActiveSpace
from src.waveop.operators import ReducedWaveOperator

WaveOperatorLike = Union[ReducedWaveOperator, np.ndarray]


def _blocks(X: WaveOperatorLike) -> np.ndarray:
    return X.blocks if isinstance(X, ReducedWaveOperator) else np.asarray(X, dtype=complex)


def _h_omega(blocks: np.ndarray, model: HamiltonianModel, grid: TimeGrid,
             active: ActiveSpace) -> np.ndarray:
    """H(t_j) (P0 + X(t_j)) as (N_t, N_m, m)."""
    return model.columns(grid.times, active.indices) + model.apply(blocks, grid.times, active)


def effective_hamiltonian(X: WaveOperatorLike, model: HamiltonianModel, grid: TimeGrid,
                          active: ActiveSpace) -> np.ndarray:
    """
    H_eff(t_j) = P0 H(t_j) (P0 + X(t_j)).

    Returns:
        (N_t, m, m) complex series
    """
    blocks = _blocks(X)
    idx = active.index_array
    field = model.field(grid.times)[:, np.newaxis, np.newaxis]
    coupling = model.dipole[np.ix_(idx, idx)][np.newaxis] + np.matmul(model.dipole[idx, :], blocks)
    heff = -field * coupling
    heff[:, np.arange(active.m), np.arange(active.m)] += model.energies[idx]
    return heff


def residual(X: WaveOperatorLike, model: HamiltonianModel, grid: TimeGrid,
             active: ActiveSpace, heff: np.ndarray = None) -> np.ndarray:
    """
    Delta(t) = Q0 H (P0 + X) - X H_eff - i hbar dX/dt.

    The time derivative is taken spectrally.

    Args:
        X: Current wave operator
        model: Hamiltonian model
        grid: Time grid
        active: Active space
        heff: Precomputed effective Hamiltonian series (optional)

    Returns:
        (N_t, N_m, m) series, active rows zero
    """
    blocks = _blocks(X)
    if heff is None:
        heff = effective_hamiltonian(blocks, model, grid, active)
    delta = _h_omega(blocks, model, grid, active) - np.matmul(blocks, heff)
    delta -= 1j * model.hbar * derivative_values(blocks, grid)
    delta[:, active.index_array, :] = 0.0
    return delta


def dressed_diagonal(X: WaveOperatorLike, model: HamiltonianModel, grid: TimeGrid,
                     active: ActiveSpace, include_absorber: bool = True) -> np.ndarray:
    """
    Complement diagonal of Q0 [H(t) - X(t) H(t)] Q0.

    H~_qq = eps_q - E mu_qq - i V_opt + E sum_p X_qp mu_pq

    Returns:
        (N_t, N_m) series; active entries are zero
    """
    blocks = _blocks(X)
    idx = active.index_array
    field = model.field(grid.times)[:, np.newaxis]
    dressing = np.einsum("tqp,pq->tq", blocks, model.dipole[idx, :])
    diagonal = model.energies[np.newaxis, :] - field * np.diagonal(model.dipole)[np.newaxis, :] \
        + field * dressing
    if include_absorber:
        diagonal = diagonal - 1j * model.absorber_value(grid.times)[:, np.newaxis]
    diagonal[:, idx] = 0.0
    return diagonal


def residual_and_effective(X: WaveOperatorLike, model: HamiltonianModel, grid: TimeGrid,
                           active: ActiveSpace) -> Tuple[np.ndarray, np.ndarray]:
    blocks = _blocks(X)
    heff = effective_hamiltonian(blocks, model, grid, active)
    return residual(blocks, model, grid, active, heff=heff), heff
