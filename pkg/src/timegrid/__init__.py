from src.timegrid.grid import TimeGrid, make_time_grid
from src.timegrid.spectral import (
    SpectralSeries,
    fft_forward,
    fft_inverse,
    spectral_cumulative_integral,
    spectral_derivative,
    cumulative_integral_values,
    derivative_values,
)

__all__ = [
    "TimeGrid",
    "make_time_grid",
    "SpectralSeries",
    "fft_forward",
    "fft_inverse",
    "spectral_cumulative_integral",
    "spectral_derivative",
    "cumulative_integral_values",
    "derivative_values",
]
