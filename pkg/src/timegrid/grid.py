"""
Time Grid

Uniform sample times on [0, T) and the paired signed frequency grid used by
every spectral operation of the solver.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.fft

from src.utils.errors import GridError


@dataclass(frozen=True)
class TimeGrid:
    """
    Sample times t_j = jT/N_t and signed frequencies nu_j.

    Frequencies follow the FFT ordering: nu_j = j/T for j < N_t/2,
    nu_{N_t/2} = -N_t/(2T), and nu_j = -nu_{N_t-j} above the middle.
    """
    T: float
    n_time: int
    times: np.ndarray = field(repr=False, compare=False)
    frequencies: np.ndarray = field(repr=False, compare=False)

    @property
    def dt(self) -> float:
        return self.T / self.n_time

    @property
    def angular_frequencies(self) -> np.ndarray:
        """2*pi*nu for every bin."""
        return 2.0 * np.pi * self.frequencies

    def index_at_or_before(self, t: float) -> int:
        """Index of the last sample with t_j <= t (clipped to the grid)."""
        j = int(np.floor(t / self.dt + 1e-9))
        return min(max(j, 0), self.n_time - 1)


def make_time_grid(T: float, n_time: int) -> TimeGrid:
    """
    Build the time/frequency grid.

    Args:
        T: Total duration (> 0)
        n_time: Number of samples, a power of two >= 2

    Returns:
        TimeGrid
    """
    if not np.isfinite(T) or T <= 0:
        raise GridError(f"total duration must be positive, got T={T}")
    if isinstance(n_time, bool) or int(n_time) != n_time:
        raise GridError(f"number of time samples must be an integer, got {n_time}")
    n_time = int(n_time)
    if n_time < 2 or n_time % 2:
        raise GridError(f"number of time samples must be even and >= 2, got {n_time}")
    if n_time & (n_time - 1):
        raise GridError(f"number of time samples must be a power of two, got {n_time}")

    times = np.arange(n_time) * (T / n_time)
    frequencies = scipy.fft.fftfreq(n_time, d=T / n_time)
    times.setflags(write=False)
    frequencies.setflags(write=False)
    return TimeGrid(T=float(T), n_time=n_time, times=times, frequencies=frequencies)
