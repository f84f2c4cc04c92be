"""
Reference Propagator

Plain step-by-step propagation with the midpoint exponential
psi <- expm(-i H(t_mid) dt / hbar) psi, used to validate the global solver and
to build exact wave operators on small models.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from src.models.hamiltonian import HamiltonianModel, complement_mask
from src.timegrid.grid import TimeGrid
from src.utils.errors import InvalidInputError, SingularProjectionError
from src.utils.log_utils import get_module_logger
from src.waveop.active_space import ActiveSpace

logger = get_module_logger('oracle')

SINGULAR_TOLERANCE = 1e-8


def stacked_hamiltonians(model: HamiltonianModel, active, times: np.ndarray) -> np.ndarray:
    """(len(times), N_m, N_m) dense H(t) for every requested time."""
    times = np.asarray(times, dtype=float)
    field = model.field(times)[:, np.newaxis, np.newaxis]
    stack = np.diag(model.energies)[np.newaxis] - field * model.dipole[np.newaxis]
    if model.absorber is not None:
        damping = model.absorber_value(times)[:, np.newaxis, np.newaxis]
        stack = stack - 1j * damping * np.diag(complement_mask(active, model.size).astype(float))[np.newaxis]
    return stack


def oracle_propagate(model: HamiltonianModel, grid: TimeGrid, active, psi0: np.ndarray,
                     n_substeps: int = 10, include_endpoint: bool = False) -> np.ndarray:
    """
    Propagate one or several initial states through the grid.

    Args:
        model: Hamiltonian model
        grid: Time grid (samples are reported at its times)
        active: Active space defining Q0 for the time absorber
        psi0: (N_m,) state or (N_m, k) columns
        n_substeps: Midpoint substeps per grid step (>= 1)
        include_endpoint: Also report the state at T

    Returns:
        (N_t, N_m[, k]) or (N_t + 1, N_m[, k]) states
    """
    if int(n_substeps) != n_substeps or n_substeps < 1:
        raise InvalidInputError(f"n_substeps must be an integer >= 1, got {n_substeps}")
    psi0 = np.asarray(psi0, dtype=complex)
    single = psi0.ndim == 1
    state = psi0[:, np.newaxis] if single else psi0.copy()
    if state.shape[0] != model.size:
        raise InvalidInputError(f"initial state has {state.shape[0]} rows, model has {model.size} states")

    n_steps = grid.n_time if include_endpoint else grid.n_time - 1
    delta = grid.dt / n_substeps
    offsets = (np.arange(n_substeps) + 0.5) * delta
    samples = np.empty((n_steps + 1,) + state.shape, dtype=complex)
    samples[0] = state

    for j in range(n_steps):
        hamiltonians = stacked_hamiltonians(model, active, grid.times[j] + offsets)
        steps = scipy.linalg.expm(-1j * delta / model.hbar * hamiltonians)
        for step in steps:
            state = step @ state
        samples[j + 1] = state

    logger.debug(f"Reference propagation: {n_steps} steps x {n_substeps} substeps, "
                 f"{state.shape[1]} column(s)")
    return samples[..., 0] if single else samples


@dataclass
class OracleWaveOperator:
    """Exact X(t_j) = Q0 U P0 (P0 U P0)^-1 on the grid and at T."""
    blocks: np.ndarray = field(repr=False)
    final: np.ndarray = field(repr=False)
    condition_numbers: np.ndarray = field(repr=False)
    states: np.ndarray = field(repr=False)


def oracle_wave_operator(model: HamiltonianModel, grid: TimeGrid, active: ActiveSpace,
                         n_substeps: int = 10,
                         singular_tolerance: float = SINGULAR_TOLERANCE) -> OracleWaveOperator:
    """
    Wave operator from the reference propagator.

    Args:
        model: Hamiltonian model
        grid: Time grid
        active: Active space
        n_substeps: Midpoint substeps per grid step
        singular_tolerance: Smallest admissible singular value of P0 U P0

    Returns:
        OracleWaveOperator (blocks at grid times, final at T)
    """
    idx = active.index_array
    states = oracle_propagate(model, grid, active, active.embedding(), n_substeps, include_endpoint=True)
    projected = states[:, idx, :]
    singular_values = np.linalg.svd(projected, compute_uv=False)
    smallest = singular_values[:, -1]
    with np.errstate(divide="ignore"):
        conditions = np.where(smallest > 0, singular_values[:, 0] / smallest, np.inf)

    singular = np.flatnonzero(smallest < singular_tolerance)
    if singular.size:
        edges = np.append(grid.times, grid.T)
        raise SingularProjectionError(edges[singular], conditions[singular])

    # X = Q0 U P0 (P0 U P0)^-1 via a solve on the transposed system
    wave = np.linalg.solve(projected.transpose(0, 2, 1), states.transpose(0, 2, 1)).transpose(0, 2, 1)
    wave[:, idx, :] = 0.0
    return OracleWaveOperator(blocks=wave[:-1], final=wave[-1], condition_numbers=conditions,
                              states=states)
