"""
Solver Data Types

Reduced wave operator storage, solver options, the effective propagator and
the solve report.
"""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from src.models.hamiltonian import HamiltonianModel
from src.timegrid.grid import TimeGrid
from src.utils.errors import InvalidInputError
from src.waveop.active_space import ActiveSpace

STATUS_CONVERGED = "converged"
STATUS_DIVERGED = "diverged"
STATUS_STALLED = "stalled"


@dataclass
class ReducedWaveOperator:
    """
    X(t_j) as N_t blocks of (N_m, m) plus the boundary block X(T).

    Active rows of every block are zero.
    """
    blocks: np.ndarray = field(repr=False)
    final: np.ndarray = field(repr=False)
    active: ActiveSpace

    @classmethod
    def zeros(cls, grid: TimeGrid, active: ActiveSpace) -> "ReducedWaveOperator":
        return cls(np.zeros((grid.n_time, active.size, active.m), dtype=complex),
                   np.zeros((active.size, active.m), dtype=complex), active)

    def __post_init__(self):
        if self.blocks.ndim != 3 or self.blocks.shape[1:] != (self.active.size, self.active.m):
            raise InvalidInputError(
                f"wave operator blocks must be (N_t, {self.active.size}, {self.active.m}), "
                f"got {self.blocks.shape}")

    @property
    def n_time(self) -> int:
        return self.blocks.shape[0]

    def norm(self) -> float:
        """Frobenius norm over the whole time grid."""
        return float(np.linalg.norm(self.blocks.ravel()))

    def max_block_norm(self) -> float:
        return float(np.max(np.linalg.norm(self.blocks, axis=(1, 2))))

    def with_increment(self, delta: np.ndarray, delta_final: np.ndarray) -> "ReducedWaveOperator":
        blocks = self.blocks + delta
        final = self.final + delta_final
        blocks[:, self.active.index_array, :] = 0.0
        final[self.active.index_array, :] = 0.0
        return ReducedWaveOperator(blocks, final, self.active)

    def omega(self) -> np.ndarray:
        """P0 + X as (N_t, N_m, m) blocks."""
        return self.blocks + self.active.embedding()[np.newaxis]

    def omega_final(self) -> np.ndarray:
        return self.final + self.active.embedding()


@dataclass(frozen=True)
class SolveOptions:
    """
    Iteration control.

    Attributes:
        eps: Convergence threshold on F_n
        max_iterations: Budget of factor-producing iterations
        divergence_bound: Abort when max_t ||X(t)||_F exceeds this
        growth_patience: Abort when F_n grows this many times in a row
        energy_shift: Real shift sigma of the spectral denominator (None = automatic)
        denominator_tolerance: Smallest admissible |eps_q + sigma + 2 pi hbar nu|
        magnus_order: 2 or 4 for the effective propagation steps
        condition_threshold: Eigenvector condition number above which expm is used
        workers: Threads for the per-column spectral solves
    """
    eps: float = 1e-7
    max_iterations: int = 30
    divergence_bound: float = 1e6
    growth_patience: int = 3
    energy_shift: Optional[float] = None
    denominator_tolerance: float = 1e-10
    magnus_order: int = 4
    condition_threshold: float = 1e8
    workers: int = 1

    def __post_init__(self):
        if not self.eps > 0:
            raise InvalidInputError(f"eps must be positive, got {self.eps}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise InvalidInputError(f"max_iterations must be an integer >= 1, got {self.max_iterations}")
        if self.magnus_order not in (2, 4):
            raise InvalidInputError(f"magnus_order must be 2 or 4, got {self.magnus_order}")
        if self.growth_patience < 1 or self.workers < 1:
            raise InvalidInputError("growth_patience and workers must be >= 1")
        if not self.divergence_bound > 0 or not self.denominator_tolerance > 0:
            raise InvalidInputError("divergence_bound and denominator_tolerance must be positive")


@dataclass
class EffectivePropagator:
    """
    U(t_k, 0; H_eff) on the grid and at T.

    Attributes:
        samples: (N_t, m, m), samples[0] is the identity
        final: (m, m) propagator at T
        fallback_steps: Steps exponentiated by scaling-and-squaring
        max_condition: Largest eigenvector condition number met
    """
    samples: np.ndarray = field(repr=False)
    final: np.ndarray = field(repr=False)
    fallback_steps: int = 0
    max_condition: float = 1.0


@dataclass
class SolveReport:
    """Outcome of one solve: factors, final X, H_eff series and propagator."""
    status: str
    factors: List[float]
    wave_operator: ReducedWaveOperator
    effective_hamiltonian: np.ndarray = field(repr=False)
    propagator: EffectivePropagator = field(repr=False)
    model: HamiltonianModel = field(repr=False)
    grid: TimeGrid = field(repr=False)
    active: ActiveSpace = field(repr=False)
    energy_shift: float = 0.0
    norms: List[float] = field(default_factory=list)
    reason: str = ""

    @property
    def converged(self) -> bool:
        return self.status == STATUS_CONVERGED

    @property
    def iterations(self) -> int:
        return len(self.factors)

    def summary(self) -> dict:
        return {
            "status": self.status,
            "converged": self.converged,
            "iterations": self.iterations,
            "factors": list(self.factors),
            "energy_shift": self.energy_shift,
            "reason": self.reason,
        }
