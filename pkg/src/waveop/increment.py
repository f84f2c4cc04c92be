"""
Spectral Increment

Solves the linearised Bloch equation for the increment dX of the wave
operator with two FFTs per column:

    Lambda(t) = exp(i phi_in(t)/hbar) Delta(t) U(t)
    Z         = IFFT[ FFT(exp(-i sigma t/hbar) Lambda) / (eps_q + sigma + 2 pi hbar nu) ]
    dX(t)     = exp(-i phi_out(t)/hbar) [exp(-i eps_q t/hbar) Z(0) - exp(i sigma t/hbar) Z(t)] U(t)^-1

phi_in integrates the field dressing of the complement diagonal; phi_out adds
the time absorber. dX(0) = 0, so X(0) stays zero.
"""

from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np
import scipy.fft

from src.models.hamiltonian import HamiltonianModel
from src.timegrid.grid import TimeGrid
from src.timegrid.spectral import cumulative_integral_values
from src.utils.errors import InvalidInputError, ResonantDenominatorError
from src.utils.log_utils import get_module_logger
from src.waveop.active_space import ActiveSpace
from src.waveop.operators import EffectivePropagator
from src.waveop.propagation import propagate_effective

logger = get_module_logger('waveop')

SHIFT_CANDIDATES = 64


@dataclass
class IncrementResult:
    """dX on the grid plus its boundary value at T."""
    blocks: np.ndarray
    final: np.ndarray
    min_denominator: float

    def norm(self) -> float:
        return float(np.linalg.norm(self.blocks.ravel()))


def nearest_denominators(energies: np.ndarray, shift: float, grid: TimeGrid,
                         hbar: float = 1.0) -> Tuple[np.ndarray, np.ndarray]:
    """
    Smallest |eps_q + sigma + 2 pi hbar nu| over the frequency bins, per energy.

    Returns:
        (magnitudes, bin indices) per energy
    """
    energies = np.asarray(energies, dtype=complex)
    spacing = 2.0 * np.pi * hbar / grid.T
    half = grid.n_time // 2
    # nu_k = k/T with k in [-N/2, N/2 - 1]; the closest k cancels Re(eps + sigma)
    k = np.clip(np.round(-(energies.real + shift) / spacing), -half, half - 1).astype(int)
    magnitudes = np.abs(energies + shift + spacing * k)
    return magnitudes, np.mod(k, grid.n_time)


def choose_energy_shift(energies: np.ndarray, grid: TimeGrid, hbar: float = 1.0) -> float:
    """
    Shift sigma keeping every complement denominator away from zero.

    Sub-bin offsets k/64 of the frequency spacing 2 pi hbar/T are scanned and
    the one maximising the smallest denominator wins.
    """
    energies = np.asarray(energies, dtype=complex)
    if energies.size == 0:
        return 0.0
    spacing = 2.0 * np.pi * hbar / grid.T
    best_shift, best_margin = 0.0, -1.0
    for k in range(SHIFT_CANDIDATES):
        shift = spacing * k / SHIFT_CANDIDATES
        margin = float(np.min(nearest_denominators(energies, shift, grid, hbar)[0]))
        if margin > best_margin + 1e-15:
            best_shift, best_margin = shift, margin

    if best_margin < 1.0 / (10.0 * grid.T):
        logger.warning(f"Energy shift {best_shift:.6g}: smallest denominator {best_margin:.3e} "
                       f"is below 1/(10T) = {1.0 / (10.0 * grid.T):.3e}")
    else:
        logger.debug(f"Energy shift {best_shift:.6g}, smallest denominator {best_margin:.3e}")
    return best_shift


def check_denominators(energies: np.ndarray, rows: np.ndarray, shift: float, grid: TimeGrid,
                       hbar: float, tolerance: float) -> float:
    """Raise ResonantDenominatorError naming the worst (row, bin) pair below tolerance."""
    magnitudes, bins = nearest_denominators(energies, shift, grid, hbar)
    worst = int(np.argmin(magnitudes))
    smallest = float(magnitudes[worst])
    if smallest < tolerance:
        frequency = float(grid.frequencies[bins[worst]])
        denominator = energies[worst] + shift + 2.0 * np.pi * hbar * frequency
        raise ResonantDenominatorError(int(rows[worst]), int(bins[worst]), frequency,
                                       complex(denominator), shift)
    return smallest


def _solve_column(lam_column: np.ndarray, denominators: np.ndarray) -> np.ndarray:
    spectrum = scipy.fft.fft(lam_column, axis=0)
    return scipy.fft.ifft(spectrum / denominators, axis=0)


def increment(X: np.ndarray, delta: np.ndarray, heff: np.ndarray, dressed: np.ndarray,
              grid: TimeGrid, energy_shift: float, model: HamiltonianModel, active: ActiveSpace,
              propagator: Optional[EffectivePropagator] = None, denominator_tolerance: float = 1e-10,
              workers: int = 1) -> IncrementResult:
    """
    Increment dX of the wave operator.

    Args:
        X: (N_t, N_m, m) current wave operator blocks
        delta: (N_t, N_m, m) residual series
        heff: (N_t, m, m) effective Hamiltonian series
        dressed: (N_t, N_m) complement diagonal including the absorber
        grid: Time grid
        energy_shift: Real shift sigma
        model: Hamiltonian model (energies, hbar, absorber)
        active: Active space
        propagator: U(t, 0; H_eff) built from heff (computed when omitted)
        denominator_tolerance: Smallest admissible spectral denominator
        workers: Threads for the per-column solves

    Returns:
        IncrementResult with active rows zero
    """
    if np.shape(X) != np.shape(delta):
        raise InvalidInputError(f"wave operator {np.shape(X)} and residual {np.shape(delta)} differ in shape")
    hbar = model.hbar
    rows = active.complement
    times = grid.times
    m = active.m
    result = IncrementResult(np.zeros_like(delta), np.zeros((active.size, m), dtype=complex), np.inf)
    if rows.size == 0 or not np.any(delta):
        return result

    if propagator is None:
        propagator = propagate_effective(heff, grid, hbar=hbar)
    energies = model.energies[rows]
    result.min_denominator = check_denominators(energies, rows, energy_shift, grid, hbar,
                                                denominator_tolerance)

    # Phase of the dressed diagonal without H0 and without the absorber
    absorber_rate = model.absorber_value(times)[:, np.newaxis]
    dressing = dressed[:, rows] - energies[np.newaxis, :] + 1j * absorber_rate
    phi_in = cumulative_integral_values(dressing, grid, include_endpoint=True)
    absorbed = np.append(model.absorber_integral(times), model.absorber_integral(grid.T))[:, np.newaxis]
    phi_out = phi_in - 1j * absorbed

    lam = np.exp(1j * phi_in[:-1] / hbar)[:, :, np.newaxis] * np.matmul(delta[:, rows, :], propagator.samples)
    lam *= np.exp(-1j * energy_shift * times / hbar)[:, np.newaxis, np.newaxis]

    denominators = (energies[np.newaxis, :] + energy_shift
                    + 2.0 * np.pi * hbar * grid.frequencies[:, np.newaxis])
    z = np.empty_like(lam)
    if workers > 1 and m > 1:
        with ThreadPoolExecutor(max_workers=min(workers, m)) as executor:
            futures = {executor.submit(_solve_column, lam[:, :, k], denominators): k for k in range(m)}
            for future in as_completed(futures):
                z[:, :, futures[future]] = future.result()
    else:
        for k in range(m):
            z[:, :, k] = _solve_column(lam[:, :, k], denominators)

    edges = np.append(times, grid.T)[:, np.newaxis]
    z_edges = np.concatenate([z, z[:1]], axis=0)
    start = np.exp(-1j * energies[np.newaxis, :] * edges / hbar)[:, :, np.newaxis] * z[np.newaxis, 0]
    bracket = start - np.exp(1j * energy_shift * edges / hbar)[:, :, np.newaxis] * z_edges
    bracket *= np.exp(-1j * phi_out / hbar)[:, :, np.newaxis]

    # A U^-1 via a solve on the transposed system
    propagators = np.concatenate([propagator.samples, propagator.final[np.newaxis]], axis=0)
    solved = np.linalg.solve(propagators.transpose(0, 2, 1), bracket.transpose(0, 2, 1)).transpose(0, 2, 1)

    result.blocks[:, rows, :] = solved[:-1]
    result.final[rows, :] = solved[-1]
    result.blocks[0] = 0.0
    return result
