"""
Error Types

Exception hierarchy shared by the library packages and the run controller.
Divergence of the iterative solver is not an error; it is reported in the
SolveReport.
"""

from typing import List, Optional, Sequence


class WaveOperatorError(Exception):
    """Base class for every error raised by the integrator."""


class InvalidInputError(WaveOperatorError, ValueError):
    """Input rejected before any computation started."""


class GridError(InvalidInputError):
    """Time or coordinate grid that the spectral machinery cannot use."""


class ConfigError(InvalidInputError):
    """
    Unparseable or inconsistent run configuration.

    Args:
        message: What went wrong
        source: File name (or '<string>')
        line: 1-based line number, when known
        column: 1-based column number, when known
    """

    def __init__(self, message: str, source: str = "<string>",
                 line: Optional[int] = None, column: Optional[int] = None):
        self.source = source
        self.line = line
        self.column = column
        self.detail = message
        super().__init__(self._format())

    def _format(self) -> str:
        location = self.source
        if self.line is not None:
            location += f":{self.line}"
            if self.column is not None:
                location += f":{self.column}"
        return f"{location}: {self.detail}"


class DegeneracyError(WaveOperatorError):
    """A complex-symmetric eigenvector has (near) zero c-norm."""

    def __init__(self, index: int, c_norm: complex):
        self.index = index
        self.c_norm = c_norm
        super().__init__(
            f"eigenvector {index} is self-orthogonal under the c-product "
            f"(<j*|j> = {c_norm:.3e}); degenerate complex-symmetric spectrum")


class ResonantDenominatorError(WaveOperatorError):
    """A spectral denominator of the increment vanished; change the energy shift."""

    def __init__(self, row: int, frequency_bin: int, frequency: float,
                 denominator: complex, energy_shift: float):
        self.row = row
        self.frequency_bin = frequency_bin
        self.frequency = frequency
        self.denominator = denominator
        self.energy_shift = energy_shift
        super().__init__(
            f"resonant denominator |{denominator:.3e}| for basis row {row} at "
            f"frequency bin {frequency_bin} (nu = {frequency:.6g}) with energy "
            f"shift {energy_shift:.6g}; choose another energy_shift")


class NumericalConsistencyError(WaveOperatorError):
    """A quantity violated a bound it must satisfy mathematically."""


class SingularProjectionError(WaveOperatorError):
    """P0 U P0 is singular at some grid times, so the wave operator does not exist."""

    def __init__(self, times: Sequence[float], condition_numbers: Sequence[float]):
        self.times: List[float] = list(times)
        self.condition_numbers: List[float] = list(condition_numbers)
        preview = ", ".join(f"{t:.6g}" for t in self.times[:8])
        more = "" if len(self.times) <= 8 else f" (+{len(self.times) - 8} more)"
        super().__init__(
            f"P0 U P0 is singular at t = {preview}{more}; "
            f"the Fubini-Study distance reaches pi/2 there")


class FloquetError(WaveOperatorError):
    """The final-time model-space propagator could not be diagonalised."""
