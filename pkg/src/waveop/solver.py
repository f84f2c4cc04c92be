"""
Global Solver

Iterates residual -> effective propagation -> spectral increment on the whole
time grid until the convergence factor F_n = ||dX^(n)||^2 / ||X^(n)||^2 drops
below eps. Divergence ends the loop with a report, never an exception.
"""

import time
from typing import Optional

import numpy as np

from src.models.hamiltonian import HamiltonianModel
from src.timegrid.grid import TimeGrid
from src.utils.errors import InvalidInputError
from src.utils.log_utils import get_module_logger
from src.waveop.active_space import ActiveSpace
from src.waveop.increment import choose_energy_shift, increment
from src.waveop.operators import (STATUS_CONVERGED, STATUS_DIVERGED, STATUS_STALLED,
                                  ReducedWaveOperator, SolveOptions, SolveReport)
from src.waveop.propagation import propagate_effective
from src.waveop.residual import dressed_diagonal, effective_hamiltonian, residual

logger = get_module_logger('waveop')


def convergence_factor(increment_norm: float, operator_norm: float) -> float:
    """||dX||^2 / ||X||^2, 0 for a zero increment and inf for X = 0 with dX != 0."""
    if increment_norm == 0.0:
        return 0.0
    if operator_norm == 0.0:
        return float("inf")
    return (increment_norm / operator_norm) ** 2


def _growing(factors, patience: int) -> bool:
    if len(factors) <= patience:
        return False
    tail = factors[-(patience + 1):]
    return all(later > earlier for earlier, later in zip(tail, tail[1:]))


def solve(model: HamiltonianModel, grid: TimeGrid, active: ActiveSpace,
          options: Optional[SolveOptions] = None) -> SolveReport:
    """
    Compute the reduced wave operator on the whole grid.

    X^(0) = 0 and X^(1) = dX^(0); every later iteration n >= 1 reports F_n
    before applying dX^(n).

    Args:
        model: Hamiltonian model
        grid: Time grid
        active: Active space of dimension m
        options: Iteration control

    Returns:
        SolveReport (status converged, diverged or stalled)
    """
    options = options or SolveOptions()
    if active.size != model.size:
        raise InvalidInputError(f"active space built for {active.size} states, model has {model.size}")
    if model.absorber is not None and not np.isclose(model.absorber.T, grid.T):
        raise InvalidInputError(f"time absorber ends at {model.absorber.T}, grid at {grid.T}")

    hbar = model.hbar
    complement_energies = model.energies[active.complement]
    shift = options.energy_shift
    if shift is None:
        shift = choose_energy_shift(complement_energies, grid, hbar)

    logger.info(f"Solving: N_m={model.size}, m={active.m}, N_t={grid.n_time}, T={grid.T}, "
                f"eps={options.eps:.1e}, energy shift={shift:.6g}")

    X = ReducedWaveOperator.zeros(grid, active)
    factors, norms = [], []
    status, reason = STATUS_STALLED, f"no convergence within {options.max_iterations} iterations"
    iteration = 0
    started = time.time()

    while True:
        heff = effective_hamiltonian(X, model, grid, active)
        propagator = propagate_effective(heff, grid, hbar=hbar, magnus_order=options.magnus_order,
                                         condition_threshold=options.condition_threshold)
        delta = residual(X, model, grid, active, heff=heff)
        dressed = dressed_diagonal(X, model, grid, active)
        step = increment(X.blocks, delta, heff, dressed, grid, shift, model, active, propagator,
                         denominator_tolerance=options.denominator_tolerance,
                         workers=options.workers)

        step_norm = step.norm()
        if iteration > 0:
            factor = convergence_factor(step_norm, X.norm())
            factors.append(factor)

        X = X.with_increment(step.blocks, step.final)
        norms.append(X.norm())
        block_norm = X.max_block_norm()

        if iteration == 0:
            logger.info(f"Iteration 0: ||X^(1)|| = {norms[-1]:.3e}")
        else:
            logger.info(f"Iteration {iteration}: F = {factors[-1]:.3e}, ||X|| = {norms[-1]:.3e}")

        if not (np.isfinite(block_norm) and np.isfinite(step_norm)):
            status, reason = STATUS_DIVERGED, "non-finite wave operator"
            break
        if block_norm > options.divergence_bound:
            status, reason = STATUS_DIVERGED, (f"max_t ||X(t)|| = {block_norm:.3e} exceeds "
                                               f"{options.divergence_bound:.1e}")
            break
        if factors and factors[-1] <= options.eps:
            status, reason = STATUS_CONVERGED, f"F_{iteration} = {factors[-1]:.3e} <= {options.eps:.1e}"
            break
        if _growing(factors, options.growth_patience):
            status, reason = STATUS_DIVERGED, (f"convergence factor grew {options.growth_patience} "
                                               f"iterations in a row")
            break
        if iteration >= options.max_iterations:
            break
        iteration += 1

    if status == STATUS_DIVERGED:
        logger.error(f"Divergence after {len(factors)} iterations: {reason}")
    elif status == STATUS_STALLED:
        logger.warning(f"Stalled: {reason} (last F = {factors[-1]:.3e})" if factors else f"Stalled: {reason}")
    else:
        logger.info(f"Converged in {len(factors)} iterations ({time.time() - started:.1f}s)")

    # Effective quantities consistent with the final X
    heff = effective_hamiltonian(X, model, grid, active)
    propagator = propagate_effective(heff, grid, hbar=hbar, magnus_order=options.magnus_order,
                                     condition_threshold=options.condition_threshold)
    return SolveReport(status=status, factors=factors, wave_operator=X, effective_hamiltonian=heff,
                       propagator=propagator, model=model, grid=grid, active=active,
                       energy_shift=float(shift), norms=norms, reason=reason)


def propagate_columns(report: SolveReport, include_endpoint: bool = False) -> np.ndarray:
    """
    (P0 + X(t_j)) U(t_j, 0; H_eff) for every active column.

    Returns:
        (N_t, N_m, m), or (N_t + 1, N_m, m) with the boundary sample at T
    """
    states = np.matmul(report.wave_operator.omega(), report.propagator.samples)
    if include_endpoint:
        final = report.wave_operator.omega_final() @ report.propagator.final
        states = np.concatenate([states, final[np.newaxis]], axis=0)
    return states


def propagate_state(report: SolveReport, psi0: np.ndarray, include_endpoint: bool = False) -> np.ndarray:
    """
    psi(t_j) = (P0 + X(t_j)) U(t_j, 0; H_eff) psi0.

    Args:
        report: Solved report
        psi0: Initial state, either N_m components inside S0 or m active coefficients
        include_endpoint: Append psi(T)

    Returns:
        (N_t, N_m) or (N_t + 1, N_m) states
    """
    active = report.active
    psi0 = np.asarray(psi0, dtype=complex).ravel()
    if psi0.size == active.size:
        outside = np.linalg.norm(psi0[active.complement])
        if outside > 1e-12 * max(1.0, np.linalg.norm(psi0)):
            raise InvalidInputError(f"initial state has weight {outside:.3e} outside the active space")
        coefficients = psi0[active.index_array]
    elif psi0.size == active.m:
        coefficients = psi0
    else:
        raise InvalidInputError(f"initial state has {psi0.size} components, expected "
                                f"{active.size} or {active.m}")
    return propagate_columns(report, include_endpoint) @ coefficients
