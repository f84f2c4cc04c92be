"""
Spectral Primitives

FFT pair with symmetric 1/sqrt(N_t) normalization, spectral derivative and the
cumulative definite integrals F_j = int_0^{t_j} f dt' obtained with two FFTs.

All functions act along axis 0, so a series may carry trailing axes (for
instance N_t blocks of N_m x m matrices).
"""

from dataclasses import dataclass, field
from typing import Union

import numpy as np
import scipy.fft
from typing_extensions import Literal

from src.timegrid.grid import TimeGrid
from src.utils.errors import InvalidInputError

Domain = Literal["time", "frequency"]


@dataclass(frozen=True)
class SpectralSeries:
    """N_t samples bound to a TimeGrid, tagged with their domain."""
    values: np.ndarray = field(repr=False)
    grid: TimeGrid
    domain: Domain = "time"

    def __post_init__(self):
        if self.domain not in ("time", "frequency"):
            raise InvalidInputError(f"unknown series domain '{self.domain}'")
        values = np.asarray(self.values)
        if values.ndim == 0 or values.shape[0] != self.grid.n_time:
            raise InvalidInputError(
                f"series length {values.shape[0] if values.ndim else 0} does not match "
                f"grid size {self.grid.n_time}")
        object.__setattr__(self, "values", values)


def _check_domain(series: SpectralSeries, expected: Domain) -> None:
    if series.domain != expected:
        raise InvalidInputError(
            f"expected a {expected}-domain series, got a {series.domain}-domain one")


def fft_forward(series: SpectralSeries) -> SpectralSeries:
    """Time samples -> frequency bins (unitary convention)."""
    _check_domain(series, "time")
    spectrum = scipy.fft.fft(series.values, axis=0, norm="ortho")
    return SpectralSeries(spectrum, series.grid, "frequency")


def fft_inverse(series: SpectralSeries) -> SpectralSeries:
    """Frequency bins -> time samples (unitary convention)."""
    _check_domain(series, "frequency")
    samples = scipy.fft.ifft(series.values, axis=0, norm="ortho")
    return SpectralSeries(samples, series.grid, "time")


def _bin_shape(values: np.ndarray) -> tuple:
    return (values.shape[0],) + (1,) * (values.ndim - 1)


def _nyquist_mask(grid: TimeGrid) -> np.ndarray:
    mask = np.ones(grid.n_time, dtype=bool)
    mask[grid.n_time // 2] = False
    return mask


def _as_values(samples: Union[SpectralSeries, np.ndarray], grid: TimeGrid = None):
    if isinstance(samples, SpectralSeries):
        _check_domain(samples, "time")
        return samples.values, samples.grid
    values = np.asarray(samples)
    if grid is None:
        raise InvalidInputError("a TimeGrid is required for raw sample arrays")
    length = values.shape[0] if values.ndim else 0
    if length != grid.n_time:
        raise InvalidInputError(f"series length {length} does not match grid size {grid.n_time}")
    return values, grid


def cumulative_integral_values(values: np.ndarray, grid: TimeGrid,
                               include_endpoint: bool = False) -> np.ndarray:
    """
    Prefix integrals of raw samples along axis 0.

    The mean is integrated exactly as mean * t; the oscillatory remainder is
    divided bin-wise by i*2*pi*nu (Nyquist bin dropped) and brought back with
    one inverse FFT.

    Args:
        values: (N_t, ...) samples
        grid: Time grid of the samples
        include_endpoint: Append F(T) = mean * T as an extra sample

    Returns:
        (N_t, ...) or (N_t + 1, ...) prefix integrals, F_0 = 0 exactly
    """
    values, grid = _as_values(values, grid)
    real_input = not np.iscomplexobj(values)
    mean = values.mean(axis=0)
    remainder = values - mean

    omega = grid.angular_frequencies
    divisor = np.zeros(grid.n_time, dtype=complex)
    keep = _nyquist_mask(grid) & (omega != 0.0)
    divisor[keep] = 1.0 / (1j * omega[keep])

    spectrum = scipy.fft.fft(remainder, axis=0)
    periodic = scipy.fft.ifft(spectrum * divisor.reshape(_bin_shape(values)), axis=0)
    if real_input:
        periodic = periodic.real

    t = grid.times.reshape(_bin_shape(values))
    integral = mean * t + (periodic - periodic[0])
    integral[0] = 0.0

    if include_endpoint:
        endpoint = (mean * grid.T)[np.newaxis, ...]
        integral = np.concatenate([integral, endpoint.astype(integral.dtype)], axis=0)
    return integral


def spectral_cumulative_integral(samples: SpectralSeries,
                                 include_endpoint: bool = False) -> np.ndarray:
    """
    All N_t definite integrals F_j = int_0^{t_j} f dt' of a time-domain series.

    Args:
        samples: Time-domain series
        include_endpoint: Also return F(T) as the last entry

    Returns:
        Array of prefix integrals
    """
    values, grid = _as_values(samples)
    return cumulative_integral_values(values, grid, include_endpoint=include_endpoint)


def derivative_values(values: np.ndarray, grid: TimeGrid) -> np.ndarray:
    """Bin-wise i*2*pi*nu derivative of raw samples along axis 0."""
    values, grid = _as_values(values, grid)
    factor = 1j * grid.angular_frequencies * _nyquist_mask(grid)
    spectrum = scipy.fft.fft(values, axis=0)
    derivative = scipy.fft.ifft(spectrum * factor.reshape(_bin_shape(values)), axis=0)
    if not np.iscomplexobj(values):
        derivative = derivative.real
    return derivative


def spectral_derivative(samples: SpectralSeries) -> SpectralSeries:
    """Time derivative of a periodic band-limited series."""
    values, grid = _as_values(samples)
    return SpectralSeries(derivative_values(values, grid), grid, "time")
