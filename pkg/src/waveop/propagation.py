"""
Effective Propagation

U(t_k, 0; H_eff) as the ordered product of per-step exponentials. Step
integrals come from one spectral prefix integration of the whole H_eff series.
"""

import numpy as np
import scipy.linalg

from src.timegrid.grid import TimeGrid
from src.timegrid.spectral import cumulative_integral_values
from src.utils.errors import InvalidInputError
from src.utils.log_utils import get_module_logger
from src.waveop.operators import EffectivePropagator

logger = get_module_logger('waveop')


def step_generators(heff: np.ndarray, grid: TimeGrid, hbar: float = 1.0,
                    magnus_order: int = 4) -> np.ndarray:
    """
    Per-step Magnus generators M_k with U(t_k) = exp(M_k) U(t_{k-1}).

    Order 2 is -i/hbar times the step integral B0 of H_eff. Order 4 adds the
    commutator [B1', B0'] of the scaled zeroth and first moments, where
    B1 = (1/h) int (s - s_mid) H_eff(s) ds over the step.

    Returns:
        (N_t, m, m) generators; entry k-1 covers [t_{k-1}, t_k], the last one ends at T
    """
    heff = np.asarray(heff, dtype=complex)
    if heff.ndim != 3 or heff.shape[0] != grid.n_time or heff.shape[1] != heff.shape[2]:
        raise InvalidInputError(f"H_eff series must be (N_t, m, m), got {heff.shape}")
    if magnus_order not in (2, 4):
        raise InvalidInputError(f"magnus_order must be 2 or 4, got {magnus_order}")

    prefix = cumulative_integral_values(heff, grid, include_endpoint=True)
    b0 = np.diff(prefix, axis=0)
    scale = -1j / hbar
    if magnus_order == 2:
        return scale * b0

    # int_a^b (s - mid) H ds = (h/2)(F(b) + F(a)) - int_a^b F ds, with F split
    # into mean*s (integrated exactly) plus a periodic part
    h = grid.dt
    mean = heff.mean(axis=0)
    edges = np.append(grid.times, grid.T)
    periodic = prefix[:-1] - mean[np.newaxis] * grid.times[:, np.newaxis, np.newaxis]
    second = cumulative_integral_values(periodic, grid, include_endpoint=True)
    square_steps = np.diff(edges ** 2)[:, np.newaxis, np.newaxis]
    integral_f = 0.5 * mean[np.newaxis] * square_steps + np.diff(second, axis=0)
    b1 = (0.5 * h * (prefix[1:] + prefix[:-1]) - integral_f) / h

    a0, a1 = scale * b0, scale * b1
    return a0 + (np.matmul(a1, a0) - np.matmul(a0, a1))


def _stacked_exponential(generators: np.ndarray, condition_threshold: float):
    """exp of every generator via eigendecomposition, expm where the eigenbasis is ill-conditioned."""
    values, vectors = np.linalg.eig(generators)
    conditions = np.linalg.cond(vectors)
    conditions = np.where(np.isfinite(conditions), conditions, np.inf)
    fallback = conditions > condition_threshold

    good = ~fallback
    exponentials = np.empty_like(generators)
    if np.any(good):
        v = vectors[good]
        scaled = v * np.exp(values[good])[:, np.newaxis, :]
        # V diag(e^w) V^-1 via a solve on the transposed system
        exponentials[good] = np.linalg.solve(v.transpose(0, 2, 1), scaled.transpose(0, 2, 1)).transpose(0, 2, 1)
    if np.any(fallback):
        exponentials[fallback] = scipy.linalg.expm(generators[fallback])
    return exponentials, int(np.count_nonzero(fallback)), float(np.max(conditions))


def propagate_effective(heff: np.ndarray, grid: TimeGrid, hbar: float = 1.0,
                        magnus_order: int = 4, condition_threshold: float = 1e8) -> EffectivePropagator:
    """
    U(t_k, 0; H_eff) for all k and at T.

    Args:
        heff: (N_t, m, m) effective Hamiltonian series
        grid: Time grid
        hbar: Reduced Planck constant
        magnus_order: 2 (literal step exponential) or 4
        condition_threshold: Eigenvector condition number triggering the expm fallback

    Returns:
        EffectivePropagator
    """
    generators = step_generators(heff, grid, hbar=hbar, magnus_order=magnus_order)
    steps, fallback_steps, max_condition = _stacked_exponential(generators, condition_threshold)
    if fallback_steps:
        logger.warning(f"Effective propagation: {fallback_steps}/{grid.n_time} steps used "
                       f"scaling-and-squaring (eigenvector condition up to {max_condition:.3e})")

    m = heff.shape[1]
    samples = np.empty((grid.n_time, m, m), dtype=complex)
    current = np.eye(m, dtype=complex)
    samples[0] = current
    for k in range(1, grid.n_time):
        current = steps[k - 1] @ current
        samples[k] = current
    final = steps[-1] @ current

    return EffectivePropagator(samples=samples, final=final, fallback_steps=fallback_steps,
                               max_condition=max_condition)
