"""
Populations

Transition probabilities P_{i->j}(t) = |<j|psi_i(t)>|^2, dissociation
probabilities and the cyclicity defect of the wave operator.
"""

from typing import Dict, Optional, Sequence

import numpy as np

from src.models.basis import bound_state_indices
from src.utils.errors import InvalidInputError
from src.waveop.solver import propagate_columns


def transition_probabilities(report, include_endpoint: bool = False) -> np.ndarray:
    """
    |<j|psi_i(t_k)>|^2 for every active i and every basis state j.

    Returns:
        (N_t[+1], N_m, m) array; column i belongs to the i-th active state
    """
    return np.abs(propagate_columns(report, include_endpoint=include_endpoint)) ** 2


def physical_end_index(report, T0: Optional[float] = None) -> int:
    """Last grid sample with t_j <= T0 (the model's configured T0 unless given, else T)."""
    if T0 is None:
        T0 = report.model.T0 if report.model.T0 is not None else report.grid.T
    return report.grid.index_at_or_before(T0)


def dissociation_probability(report, i: int, bound: Optional[Sequence[int]] = None,
                             T0: Optional[float] = None, threshold: float = 1e-3) -> float:
    """
    1 - sum over bound states j of P_{i->j} at the physical end time.

    Args:
        report: Solved report
        i: Basis index of an active initial state
        bound: Bound-state indices (default: lower-surface bound states, or every
            state of a hermitian basis)
        T0: Physical end time (default: the configured T0, else T)
        threshold: |Im eps| bound for the default bound-state selection

    Returns:
        Dissociation probability
    """
    active = report.active
    if i not in active.indices:
        raise InvalidInputError(f"state {i} is not in the active space {list(active.indices)}")
    if bound is None:
        basis = report.model.basis
        bound = range(basis.size) if basis.hermitian else bound_state_indices(basis, 0, threshold)
    column = active.indices.index(i)
    index = physical_end_index(report, T0)
    omega = report.wave_operator.blocks[index] + active.embedding()
    state = omega @ report.propagator.samples[index][:, column]
    return float(1.0 - np.sum(np.abs(state[np.asarray(bound, dtype=int)]) ** 2))


def cyclicity_defect(report) -> Dict[str, object]:
    """
    Frobenius norms of X(0) and X(T) per active column and their overall maximum.

    Returns:
        {'per_state': [...], 'max': float, 'initial': float, 'final': float}
    """
    X = report.wave_operator
    initial = np.linalg.norm(X.blocks[0], axis=0)
    final = np.linalg.norm(X.final, axis=0)
    per_state = np.maximum(initial, final)
    return {
        "per_state": per_state.tolist(),
        "max": float(max(np.linalg.norm(X.blocks[0]), np.linalg.norm(X.final))),
        "initial": float(np.linalg.norm(X.blocks[0])),
        "final": float(np.linalg.norm(X.final)),
    }
