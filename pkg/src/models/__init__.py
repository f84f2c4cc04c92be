from src.models.potentials import (
    CoordinateGrid,
    PotentialCurve,
    RadialCAP,
    build_grid_hamiltonian,
    kinetic_matrix,
    load_tabulated_curve,
)
from src.models.pulses import PulseSpec, TimeAbsorber, eval_field
from src.models.basis import (
    ZerothOrderBasis,
    bound_state_count,
    bound_state_indices,
    couple_surfaces,
    diagonalize_h0,
    levels_basis,
)
from src.models.hamiltonian import HamiltonianModel, assemble_hamiltonian, hamiltonian_at
from src.models.builders import build_basis, build_model, resolve_active

__all__ = [
    "CoordinateGrid",
    "PotentialCurve",
    "RadialCAP",
    "build_grid_hamiltonian",
    "kinetic_matrix",
    "load_tabulated_curve",
    "PulseSpec",
    "TimeAbsorber",
    "eval_field",
    "ZerothOrderBasis",
    "bound_state_count",
    "bound_state_indices",
    "couple_surfaces",
    "diagonalize_h0",
    "levels_basis",
    "HamiltonianModel",
    "assemble_hamiltonian",
    "hamiltonian_at",
    "build_basis",
    "build_model",
    "resolve_active",
]
