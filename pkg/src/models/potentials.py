"""
Potential Curves and Grid Hamiltonians

Potential energy curves (quartic polynomial, tabulated, analytic surrogate),
the radial complex absorbing potential and the Fourier-grid Hamiltonian
matrix on a periodic coordinate grid.
"""

import os
from dataclasses import dataclass, field
from typing import Dict, Optional, Tuple

import numpy as np
import scipy.fft
from scipy.interpolate import CubicSpline

from src.utils.errors import GridError, InvalidInputError
from src.utils.log_utils import get_module_logger

logger = get_module_logger('models')

CURVE_KINDS = ("quartic", "tabulated", "analytic-surrogate")
SURROGATE_FORMS = ("morse", "repulsive")
MIN_GRID_POINTS = 16


@dataclass(frozen=True)
class CoordinateGrid:
    """
    Uniform periodic grid of n_points on [x_min, x_max).

    The period is x_max - x_min, so x_max itself is not a grid point.
    """
    x_min: float
    x_max: float
    n_points: int

    def __post_init__(self):
        if not (np.isfinite(self.x_min) and np.isfinite(self.x_max)) or self.x_max <= self.x_min:
            raise GridError(f"coordinate grid needs x_min < x_max, got [{self.x_min}, {self.x_max}]")
        if int(self.n_points) != self.n_points or self.n_points < MIN_GRID_POINTS:
            raise GridError(
                f"coordinate grid needs at least {MIN_GRID_POINTS} points, got {self.n_points}")

    @property
    def length(self) -> float:
        return self.x_max - self.x_min

    @property
    def spacing(self) -> float:
        return self.length / self.n_points

    @property
    def points(self) -> np.ndarray:
        return self.x_min + np.arange(self.n_points) * self.spacing


@dataclass(frozen=True)
class PotentialCurve:
    """
    One electronic potential energy curve and the reduced mass moving on it.

    Args:
        kind: 'quartic', 'tabulated' or 'analytic-surrogate'
        mass: Reduced mass (model units)
        coefficients: Ascending polynomial coefficients c0..c4 (quartic)
        table: (n, 2) array of (coordinate, energy) rows (tabulated)
        form: 'morse' or 'repulsive' (analytic-surrogate)
        parameters: Surrogate parameters (D, a, r_e) or (A, b, r_e)
    """
    kind: str
    mass: float
    coefficients: Tuple[float, ...] = ()
    table: Optional[np.ndarray] = field(default=None, repr=False, compare=False)
    form: Optional[str] = None
    parameters: Dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in CURVE_KINDS:
            raise InvalidInputError(f"unknown curve kind '{self.kind}', expected one of {CURVE_KINDS}")
        if not np.isfinite(self.mass) or self.mass <= 0:
            raise InvalidInputError(f"reduced mass must be positive, got {self.mass}")

        if self.kind == "quartic":
            coefficients = tuple(float(c) for c in self.coefficients)
            if not 1 <= len(coefficients) <= 5:
                raise InvalidInputError(
                    f"quartic curve takes 1 to 5 coefficients, got {len(coefficients)}")
            if not np.all(np.isfinite(coefficients)):
                raise InvalidInputError("quartic coefficients must be finite")
            object.__setattr__(self, "coefficients", coefficients)

        elif self.kind == "tabulated":
            table = np.asarray(self.table, dtype=float)
            if table.ndim != 2 or table.shape[1] != 2 or table.shape[0] < 4:
                raise InvalidInputError("tabulated curve needs at least 4 (coordinate, energy) rows")
            if np.any(np.diff(table[:, 0]) <= 0):
                raise InvalidInputError("tabulated curve coordinates must be strictly increasing")
            if not np.all(np.isfinite(table)):
                raise InvalidInputError("tabulated curve contains non-finite values")
            table.setflags(write=False)
            object.__setattr__(self, "table", table)

        else:
            if self.form not in SURROGATE_FORMS:
                raise InvalidInputError(
                    f"unknown surrogate form '{self.form}', expected one of {SURROGATE_FORMS}")
            required = ("D", "a", "r_e") if self.form == "morse" else ("A", "b", "r_e")
            missing = [name for name in required if name not in self.parameters]
            if missing:
                raise InvalidInputError(f"{self.form} surrogate is missing parameters {missing}")

    def evaluate(self, x) -> np.ndarray:
        """Curve energies at the coordinates x."""
        x = np.asarray(x, dtype=float)

        if self.kind == "quartic":
            # polyval wants the highest power first
            return np.polyval(self.coefficients[::-1], x)

        if self.kind == "tabulated":
            lo, hi = self.table[0, 0], self.table[-1, 0]
            if np.any(x < lo) or np.any(x > hi):
                raise GridError(
                    f"tabulated curve defined on [{lo}, {hi}], grid reaches "
                    f"[{x.min()}, {x.max()}]")
            return CubicSpline(self.table[:, 0], self.table[:, 1])(x)

        p = self.parameters
        if self.form == "morse":
            decay = np.exp(-p["a"] * (x - p["r_e"]))
            return p["D"] * (1.0 - decay) ** 2 - p["D"]
        return p["A"] * np.exp(-p["b"] * (x - p["r_e"]))


@dataclass(frozen=True)
class RadialCAP:
    """
    Monomial complex absorbing potential eta * ((r - onset) / (end - onset))**exponent.

    The matrix element added to the Hamiltonian is -i times this value. When
    end is None the grid edge is used.
    """
    onset: float
    strength: float
    exponent: float = 3.0
    end: Optional[float] = None

    def __post_init__(self):
        for name in ("onset", "strength", "exponent"):
            value = getattr(self, name)
            if not np.isfinite(value) or value < 0:
                raise InvalidInputError(f"CAP {name} must be a finite value >= 0, got {value}")
        if self.end is not None and self.end <= self.onset:
            raise InvalidInputError(f"CAP end {self.end} must lie beyond onset {self.onset}")

    def value(self, r, end: Optional[float] = None) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        end = self.end if self.end is not None else end
        if end is None:
            end = float(np.max(r))
        if end <= self.onset:
            return np.zeros_like(r)
        ramp = np.clip((r - self.onset) / (end - self.onset), 0.0, None)
        return self.strength * ramp ** self.exponent


def kinetic_matrix(grid: CoordinateGrid, mass: float, hbar: float = 1.0) -> np.ndarray:
    """
    Periodic Fourier-grid kinetic energy matrix.

    Args:
        grid: Coordinate grid
        mass: Reduced mass
        hbar: Reduced Planck constant in model units

    Returns:
        (n, n) real symmetric matrix
    """
    n = grid.n_points
    k = 2.0 * np.pi * scipy.fft.fftfreq(n, d=grid.spacing)
    # T = F^-1 diag(k^2) F applied to the identity, column by column
    kinetic = scipy.fft.ifft((k ** 2)[:, np.newaxis] * scipy.fft.fft(np.eye(n), axis=0), axis=0).real
    kinetic = 0.5 * (kinetic + kinetic.T)
    return (hbar ** 2 / (2.0 * mass)) * kinetic


def build_grid_hamiltonian(curve: PotentialCurve, grid: CoordinateGrid,
                           cap: Optional[RadialCAP] = None, hbar: float = 1.0) -> np.ndarray:
    """
    Kinetic + potential (+ -i CAP) matrix of one surface on the coordinate grid.

    Args:
        curve: Potential curve with its reduced mass
        grid: Coordinate grid (>= 16 points)
        cap: Optional radial absorbing potential
        hbar: Reduced Planck constant

    Returns:
        (n, n) complex matrix
    """
    x = grid.points
    potential = curve.evaluate(x)
    if not np.all(np.isfinite(potential)):
        raise GridError(f"{curve.kind} curve is not finite on [{grid.x_min}, {grid.x_max})")

    hamiltonian = kinetic_matrix(grid, curve.mass, hbar).astype(complex)
    hamiltonian[np.diag_indices_from(hamiltonian)] += potential
    if cap is not None:
        hamiltonian[np.diag_indices_from(hamiltonian)] -= 1j * cap.value(x, end=grid.x_max)

    logger.debug(f"Grid Hamiltonian: {grid.n_points} points on [{grid.x_min}, {grid.x_max}), "
                 f"curve={curve.kind}, cap={'on' if cap is not None else 'off'}")
    return hamiltonian


def load_tabulated_curve(path: str, mass: float) -> PotentialCurve:
    """
    Read a two-column (coordinate, energy) text file into a tabulated curve.

    Lines starting with '#' are ignored.
    """
    if not os.path.exists(path):
        raise InvalidInputError(f"curve table not found: {path}")
    try:
        table = np.loadtxt(path, comments="#", ndmin=2)
    except ValueError as e:
        raise InvalidInputError(f"could not read curve table {path}: {e}") from e
    logger.info(f"Loaded tabulated curve with {table.shape[0]} rows from {path}")
    return PotentialCurve(kind="tabulated", mass=mass, table=table)


def curve_from_spec(spec: dict, base_dir: Optional[str] = None) -> PotentialCurve:
    """
    Build a PotentialCurve from its configuration dictionary.

    Args:
        spec: {'kind': ..., 'mass': ..., plus kind-specific keys}
        base_dir: Directory that relative table paths are resolved against
    """
    kind = spec.get("kind")
    mass = spec.get("mass")
    if mass is None:
        raise InvalidInputError(f"curve spec for kind '{kind}' has no 'mass'")
    if kind == "quartic":
        return PotentialCurve(kind=kind, mass=float(mass), coefficients=tuple(spec.get("coefficients", ())))
    if kind == "tabulated":
        if "file" in spec:
            path = spec["file"]
            if base_dir and not os.path.isabs(path):
                path = os.path.join(base_dir, path)
            return load_tabulated_curve(path, float(mass))
        return PotentialCurve(kind=kind, mass=float(mass), table=np.asarray(spec.get("table", [])))
    if kind == "analytic-surrogate":
        parameters = {k: float(v) for k, v in spec.get("parameters", {}).items()}
        return PotentialCurve(kind=kind, mass=float(mass), form=spec.get("form"), parameters=parameters)
    raise InvalidInputError(f"unknown curve kind '{kind}', expected one of {CURVE_KINDS}")
