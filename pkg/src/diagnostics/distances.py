"""
Fubini-Study Distance

Distance between the model space S0 and its propagated image:
arccos |det(P0 U(t) P0)|, which equals arccos |det U_eff(t)| for the solver.
"""

import numpy as np

from src.utils.errors import InvalidInputError, NumericalConsistencyError

DETERMINANT_SLACK = 1e-8


def _distance_from_determinants(determinants: np.ndarray) -> np.ndarray:
    magnitudes = np.abs(np.asarray(determinants))
    excess = magnitudes - 1.0
    if np.any(excess > DETERMINANT_SLACK):
        worst = int(np.argmax(excess))
        raise NumericalConsistencyError(
            f"|det P0 U P0| = {magnitudes[worst]:.12f} exceeds 1 at sample {worst}")
    return np.arccos(np.clip(magnitudes, 0.0, 1.0))


def fubini_study_series(states: np.ndarray, active) -> np.ndarray:
    """
    Distance series from any set of m propagated columns.

    Args:
        states: (N, N_m, m) propagated active columns
        active: Active space (or index list) selecting the P0 rows

    Returns:
        (N,) distances in [0, pi/2]
    """
    idx = np.asarray(getattr(active, "indices", active), dtype=int)
    return _distance_from_determinants(np.linalg.det(np.asarray(states)[:, idx, :]))


def fubini_study_distance(report, grid, active, t: float) -> float:
    """
    Distance at time t from a solved report.

    Uses the last sample of grid with t_j <= t; t >= T uses the boundary
    propagator U(T). grid and active must be the ones the report was solved on.
    """
    if grid.n_time != report.grid.n_time or not np.isclose(grid.T, report.grid.T):
        raise InvalidInputError(f"grid (T={grid.T}, N_t={grid.n_time}) does not match the solved one "
                                f"(T={report.grid.T}, N_t={report.grid.n_time})")
    indices = tuple(int(i) for i in getattr(active, "indices", active))
    if indices != tuple(report.active.indices):
        raise InvalidInputError(f"active space {list(indices)} does not match the solved "
                                f"one {list(report.active.indices)}")
    if t >= grid.T:
        propagator = report.propagator.final
    else:
        propagator = report.propagator.samples[grid.index_at_or_before(t)]
    return float(_distance_from_determinants(np.linalg.det(propagator)[np.newaxis])[0])


def fubini_study_report_series(report) -> np.ndarray:
    """Distance at every grid sample of a solved report."""
    return _distance_from_determinants(np.linalg.det(report.propagator.samples))
