"""
Floquet Extraction

Quasi-energies and model-space components of the generalized Floquet states
from the final-time propagator Psi = U_eff(T) = Lambda E Lambda^-1, with
c-product normalization when the dynamics is not unitary.
"""

from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from src.diagnostics.populations import cyclicity_defect
from src.utils.errors import FloquetError, InvalidInputError
from src.utils.log_utils import get_module_logger
from src.waveop.solver import propagate_columns

logger = get_module_logger('diagnostics')

CONDITION_LIMIT = 1e12
DEGENERACY_GAP = 1e-10
DEFECT_WARNING = 0.1
RESIDUAL_CHUNK = 4096


@dataclass
class FloquetSet:
    """
    Floquet data of the model space.

    Attributes:
        quasi_energies: (m,) E_j folded into (-pi hbar/T, pi hbar/T]
        components: (m, m), column j holds <k|lambda_j(0)> over the active states k
        multipliers: (m,) eigenvalues exp(-i E_j T/hbar) of Psi
        degenerate: Two quasi-energies closer than 1e-10 * 2 pi hbar/T
        reconstruction_residual: Largest error of psi_i(t) rebuilt from the Floquet states
        periodicity_defect: max_j ||lambda_j(T) - lambda_j(0)||
        cyclicity_defect: max(||X(0)||_F, ||X(T)||_F)
        condition_number: Condition number of the component matrix
    """
    quasi_energies: np.ndarray = field(repr=False)
    components: np.ndarray = field(repr=False)
    multipliers: np.ndarray = field(repr=False)
    degenerate: bool = False
    reconstruction_residual: float = 0.0
    periodicity_defect: float = 0.0
    cyclicity_defect: float = 0.0
    condition_number: float = 1.0

    def to_dict(self) -> dict:
        return {
            "quasi_energies": [[float(e.real), float(e.imag)] for e in self.quasi_energies],
            "components": [[[float(c.real), float(c.imag)] for c in row] for row in self.components],
            "degenerate": self.degenerate,
            "reconstruction_residual": self.reconstruction_residual,
            "periodicity_defect": self.periodicity_defect,
            "cyclicity_defect": self.cyclicity_defect,
            "condition_number": self.condition_number,
        }


def fold_quasi_energy(energies: np.ndarray, T: float, hbar: float = 1.0) -> np.ndarray:
    """Fold real parts into the first Brillouin zone (-pi hbar/T, pi hbar/T]."""
    energies = np.asarray(energies, dtype=complex)
    width = 2.0 * np.pi * hbar / T
    real = energies.real - width * np.ceil((energies.real - 0.5 * width) / width)
    return real + 1j * energies.imag


def _leading(vectors: np.ndarray) -> np.ndarray:
    return vectors[np.argmax(np.abs(vectors), axis=0), np.arange(vectors.shape[1])]


def _fix_phase(vectors: np.ndarray) -> np.ndarray:
    # Largest component of every column made real positive
    lead = _leading(vectors)
    return vectors * (np.abs(lead) / lead)[np.newaxis, :]


def _fix_sign(vectors: np.ndarray) -> np.ndarray:
    # c-normalized columns are fixed up to a sign only
    lead = _leading(vectors)
    return vectors * np.where(lead.real < 0, -1.0, 1.0)[np.newaxis, :]


def _order_by_overlap(vectors: np.ndarray, energies: np.ndarray) -> np.ndarray:
    """Column order putting the state dominated by active state k at position k, else by energy."""
    dominant = np.argmax(np.abs(vectors), axis=0)
    if np.unique(dominant).size == dominant.size:
        return np.argsort(dominant)
    return np.argsort(energies.real, kind="stable")


def _check_arguments(report, active, T) -> float:
    if active is not None:
        indices = tuple(int(i) for i in getattr(active, "indices", active))
        if indices != tuple(report.active.indices):
            raise InvalidInputError(f"active space {list(indices)} does not match the solved "
                                    f"one {list(report.active.indices)}")
    if T is None:
        return report.grid.T
    if not np.isclose(float(T), report.grid.T):
        raise InvalidInputError(f"Floquet period {T} differs from the grid duration {report.grid.T}")
    return float(T)


def floquet_extract(report, active=None, T: Optional[float] = None,
                    unitary: Optional[bool] = None) -> FloquetSet:
    """
    Diagonalize Psi = U_eff(T) into quasi-energies and components.

    Args:
        report: Solved report
        active: Active space the report was solved for (checked when given)
        T: Period (checked against the grid when given)
        unitary: Normalize columns to unit length instead of unit c-norm;
            default is True for hermitian bases

    Returns:
        FloquetSet, state j dominated by active state j when that assignment is unique
    """
    model = report.model
    hbar = model.hbar
    T = _check_arguments(report, active, T)
    if unitary is None:
        unitary = model.basis.hermitian

    defect = cyclicity_defect(report)["max"]
    if defect > DEFECT_WARNING:
        logger.warning(f"Cyclicity defect {defect:.3e} is large; Floquet data are unreliable")

    psi = report.propagator.final
    multipliers, vectors = np.linalg.eig(psi)
    condition = float(np.linalg.cond(vectors))
    if not np.isfinite(condition) or condition > CONDITION_LIMIT:
        raise FloquetError(f"final-time propagator is not diagonalizable "
                           f"(eigenvector condition {condition:.3e})")

    if unitary:
        vectors = _fix_phase(vectors / np.linalg.norm(vectors, axis=0))
    else:
        c_norms = np.sum(vectors * vectors, axis=0)
        if np.any(np.abs(c_norms) < 1e-10):
            raise FloquetError("Floquet eigenvector is self-orthogonal under the c-product")
        vectors = _fix_sign(vectors / np.sqrt(c_norms))

    energies = fold_quasi_energy(1j * hbar * np.log(multipliers) / T, T, hbar)
    order = _order_by_overlap(vectors, energies)
    energies, vectors, multipliers = energies[order], vectors[:, order], multipliers[order]

    width = 2.0 * np.pi * hbar / T
    degenerate = False
    if energies.size > 1:
        ascending = np.sort(energies.real)
        wrap = ascending[0] + width - ascending[-1]
        degenerate = bool(min(np.diff(ascending).min(), wrap) < DEGENERACY_GAP * width)
        if degenerate:
            logger.warning("Degenerate quasi-energies detected; eigenvectors are not unique")

    floquet = FloquetSet(quasi_energies=energies, components=vectors, multipliers=multipliers,
                         degenerate=degenerate, cyclicity_defect=defect, condition_number=condition)
    residuals = floquet_residuals(report, floquet)
    floquet.reconstruction_residual = residuals["reconstruction"]
    floquet.periodicity_defect = residuals["periodicity"]

    logger.info(f"Floquet: quasi-energies {np.round(energies.real, 8).tolist()}, "
                f"residual {floquet.reconstruction_residual:.3e}, defect {defect:.3e}")
    return floquet


def floquet_eigenvector_samples(report, floquet: FloquetSet, include_endpoint: bool = False,
                                states: Optional[np.ndarray] = None) -> np.ndarray:
    """
    lambda_j(t_k) on the grid from psi(t) = Lambda(t) D(t) Lambda(0)^-1.

    Args:
        report: Solved report
        floquet: Floquet set of the report
        include_endpoint: Append lambda_j(T)
        states: Precomputed propagate_columns output with the same endpoint choice

    Returns:
        (N_t[+1], N_m, m), column j is lambda_j(t_k)
    """
    if states is None:
        states = propagate_columns(report, include_endpoint=include_endpoint)
    times = report.grid.times
    if include_endpoint:
        times = np.append(times, report.grid.T)
    phases = np.exp(1j * np.outer(times, floquet.quasi_energies) / report.model.hbar)
    return np.matmul(states, floquet.components) * phases[:, np.newaxis, :]


def floquet_residuals(report, floquet: FloquetSet) -> Dict[str, float]:
    """
    Check a Floquet set against the propagated states psi_i(t).

    'reconstruction' is the largest ||psi_i(t_k) - sum_j e^{-i E_j t_k} lambda_j(t_k) U_ji||
    over the grid and the boundary sample, with U = Lambda(0)^-1 and
    lambda_j(T) replaced by lambda_j(0). 'periodicity' is max_j ||lambda_j(T) - lambda_j(0)||.

    Returns:
        {'reconstruction': float, 'periodicity': float}
    """
    active, hbar = report.active, report.model.hbar
    components = np.asarray(floquet.components)
    try:
        coefficients = np.linalg.inv(components)
    except np.linalg.LinAlgError as e:
        raise FloquetError(f"Floquet components are singular: {e}") from None

    initial = np.zeros((active.size, active.m), dtype=complex)
    initial[active.index_array, :] = components
    times = np.append(report.grid.times, report.grid.T)
    states = propagate_columns(report, include_endpoint=True)
    lambdas = floquet_eigenvector_samples(report, floquet, include_endpoint=True, states=states)

    periodicity = float(np.max(np.linalg.norm(lambdas[-1] - initial, axis=0)))

    lambdas[-1] = initial
    reconstruction = 0.0
    for start in range(0, times.size, RESIDUAL_CHUNK):
        chunk = slice(start, start + RESIDUAL_CHUNK)
        decay = np.exp(-1j * np.outer(times[chunk], floquet.quasi_energies) / hbar)
        rebuilt = np.matmul(lambdas[chunk] * decay[:, np.newaxis, :], coefficients)
        errors = np.linalg.norm(states[chunk] - rebuilt, axis=1)
        reconstruction = max(reconstruction, float(np.max(errors)))
    return {"reconstruction": reconstruction, "periodicity": periodicity}
