"""
Model Builders

Turn the 'model', 'pulses' and 'absorber' sections of a run configuration into
a HamiltonianModel, and resolve active-space selectors against a basis.
"""

from typing import Callable, List, Optional, Sequence

import numpy as np

from src.models.basis import (ZerothOrderBasis, bound_state_indices, couple_surfaces,
                              diagonalize_h0, levels_basis, lowest_states)
from src.models.hamiltonian import HamiltonianModel
from src.models.potentials import CoordinateGrid, RadialCAP, build_grid_hamiltonian, curve_from_spec
from src.models.pulses import ABSORBER_STRENGTH, TimeAbsorber, pulses_from_spec
from src.utils.errors import InvalidInputError
from src.utils.log_utils import get_module_logger

logger = get_module_logger('models')


def _complex(value) -> complex:
    # Complex numbers travel through JSON as [re, im]
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise InvalidInputError(f"complex values are written as [re, im], got {value}")
        return complex(float(value[0]), float(value[1]))
    return complex(value)


def dipole_function_from_spec(spec) -> Callable[[np.ndarray], np.ndarray]:
    """mu(r) from {'kind': 'constant'|'linear'|'polynomial', ...} or a bare number."""
    if spec is None:
        spec = {"kind": "constant", "value": 1.0}
    if isinstance(spec, (int, float)):
        spec = {"kind": "constant", "value": float(spec)}

    kind = spec.get("kind")
    if kind == "constant":
        value = float(spec.get("value", 1.0))
        return lambda r: np.full_like(np.asarray(r, dtype=float), value)
    if kind == "linear":
        slope, offset = float(spec.get("slope", 1.0)), float(spec.get("offset", 0.0))
        return lambda r: slope * np.asarray(r, dtype=float) + offset
    if kind == "polynomial":
        coefficients = [float(c) for c in spec.get("coefficients", [])][::-1]
        return lambda r: np.polyval(coefficients, np.asarray(r, dtype=float))
    raise InvalidInputError(f"unknown dipole kind '{kind}', expected constant, linear or polynomial")


def _levels_dipole(spec: dict, n: int) -> np.ndarray:
    dipole = spec.get("dipole")
    if dipole is not None:
        matrix = np.array([[_complex(v) for v in row] for row in dipole], dtype=complex)
        if matrix.shape != (n, n):
            raise InvalidInputError(f"dipole matrix must be {n}x{n}, got {matrix.shape}")
        return matrix

    matrix = np.zeros((n, n), dtype=complex)
    for entry in spec.get("couplings", []):
        if len(entry) != 3:
            raise InvalidInputError(f"coupling entries are [i, j, value], got {entry}")
        i, j, value = int(entry[0]), int(entry[1]), _complex(entry[2])
        if not (0 <= i < n and 0 <= j < n):
            raise InvalidInputError(f"coupling index out of range for {n} levels: {entry}")
        matrix[i, j] = value
        matrix[j, i] = value if spec.get("mode", "hermitian") != "hermitian" else np.conj(value)
    return matrix


def _surface_basis(curve_spec: dict, grid: CoordinateGrid, cap: Optional[RadialCAP],
                   mode: str, n_states: int, hbar: float, base_dir: Optional[str]) -> ZerothOrderBasis:
    curve = curve_from_spec(curve_spec, base_dir=base_dir)
    matrix = build_grid_hamiltonian(curve, grid, cap=cap, hbar=hbar)
    return lowest_states(diagonalize_h0(matrix, mode), n_states)


def build_basis(spec: dict, hbar: float = 1.0, base_dir: Optional[str] = None) -> ZerothOrderBasis:
    """
    Zeroth-order basis from a model specification.

    Args:
        spec: {'kind': 'levels', ...} or {'kind': 'two-surface', ...}
        hbar: Reduced Planck constant
        base_dir: Directory for relative curve-table paths

    Returns:
        ZerothOrderBasis
    """
    kind = spec.get("kind")
    if kind == "levels":
        energies = [_complex(e) for e in spec.get("energies", [])]
        if not energies:
            raise InvalidInputError("level model needs a non-empty 'energies' list")
        mode = spec.get("mode", "hermitian")
        return levels_basis(energies, _levels_dipole(spec, len(energies)), mode=mode)

    if kind == "two-surface":
        for key in ("lower", "upper", "grid"):
            if key not in spec:
                raise InvalidInputError(f"two-surface model is missing '{key}'")
        g = spec["grid"]
        grid = CoordinateGrid(float(g["x_min"]), float(g["x_max"]), int(g["n_points"]))
        cap_spec = spec.get("cap")
        cap = None
        if cap_spec:
            cap = RadialCAP(onset=float(cap_spec["onset"]), strength=float(cap_spec["strength"]),
                            exponent=float(cap_spec.get("exponent", 3.0)),
                            end=cap_spec.get("end"))
        mode = spec.get("mode", "complex-symmetric" if cap is not None else "hermitian")

        n_states = spec.get("n_states", grid.n_points)
        if isinstance(n_states, int):
            n_states = [n_states, n_states]
        lower = _surface_basis(spec["lower"], grid, cap, mode, int(n_states[0]), hbar, base_dir)
        upper = _surface_basis(spec["upper"], grid, cap, mode, int(n_states[1]), hbar, base_dir)

        basis = couple_surfaces(lower, upper, grid.points, dipole_function_from_spec(spec.get("dipole")),
                                energy_cutoff=spec.get("energy_cutoff"))
        logger.info(f"Two-surface basis: {lower.size} + {basis.size - lower.size} states ({basis.mode})")
        return basis

    raise InvalidInputError(f"unknown model kind '{kind}', expected 'levels' or 'two-surface'")


def build_model(model_spec: dict, pulses: Sequence[dict], absorber_spec: Optional[dict],
                T: float, T0: float, base_dir: Optional[str] = None,
                basis: Optional[ZerothOrderBasis] = None) -> HamiltonianModel:
    """
    Assemble the HamiltonianModel of a run.

    Args:
        model_spec: 'model' section
        pulses: 'pulses' section
        absorber_spec: 'absorber' section ({'enabled', 'exponent', 'strength'})
        T: Total duration
        T0: Physical end time
        base_dir: Directory for relative paths
        basis: Prebuilt basis (skips the diagonalization)
    """
    hbar = float(model_spec.get("hbar", 1.0))
    if basis is None:
        basis = build_basis(model_spec, hbar=hbar, base_dir=base_dir)

    absorber = None
    if absorber_spec and absorber_spec.get("enabled", True):
        absorber = TimeAbsorber(T0=T0, T=T, exponent=float(absorber_spec.get("exponent", 2.0)),
                                strength=float(absorber_spec.get("strength", ABSORBER_STRENGTH)))
    return HamiltonianModel(basis=basis, pulses=pulses_from_spec(pulses), absorber=absorber, hbar=hbar,
                            T0=float(T0))


def resolve_active(entries: Sequence, basis: ZerothOrderBasis) -> List[int]:
    """
    Expand an active-space description into basis indices, order preserved.

    Entries are plain indices or selectors:
        {'surface': s, 'levels': [v, ...]}
        {'surface': s, 'first': k, 'skip': j | "bound"}
        {'surface': s, 'last': k}
        {'surface': s, 'bound': true, 'threshold': 1e-3}
    """
    indices: List[int] = []
    for entry in entries:
        if isinstance(entry, (int, np.integer)) and not isinstance(entry, bool):
            indices.append(int(entry))
            continue
        if not isinstance(entry, dict) or "surface" not in entry:
            raise InvalidInputError(f"invalid active-space entry {entry!r}")

        surface = int(entry["surface"])
        on_surface = basis.surface_indices(surface)
        if "levels" in entry:
            indices.extend(basis.index_of(surface, int(v)) for v in entry["levels"])
        elif "first" in entry:
            skip, count = entry.get("skip", 0), int(entry["first"])
            # "bound" skips past the bound states of the surface
            if skip == "bound":
                skip = len(bound_state_indices(basis, surface, float(entry.get("threshold", 1e-3))))
            skip = int(skip)
            chosen = on_surface[skip:skip + count]
            if len(chosen) != count:
                raise InvalidInputError(
                    f"surface {surface} has {len(on_surface)} states, cannot take {count} after {skip}")
            indices.extend(chosen)
        elif "last" in entry:
            count = int(entry["last"])
            if count > len(on_surface):
                raise InvalidInputError(f"surface {surface} has only {len(on_surface)} states")
            indices.extend(on_surface[len(on_surface) - count:])
        elif entry.get("bound"):
            indices.extend(bound_state_indices(basis, surface, float(entry.get("threshold", 1e-3))))
        else:
            raise InvalidInputError(f"active-space selector needs levels, first, last or bound: {entry!r}")
    return indices
