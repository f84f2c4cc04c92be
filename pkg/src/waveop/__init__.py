from src.waveop.active_space import ActiveSpace
from src.waveop.operators import (
    EffectivePropagator,
    ReducedWaveOperator,
    SolveOptions,
    SolveReport,
    STATUS_CONVERGED,
    STATUS_DIVERGED,
    STATUS_STALLED,
)
from src.waveop.residual import dressed_diagonal, effective_hamiltonian, residual
from src.waveop.propagation import propagate_effective
from src.waveop.increment import IncrementResult, choose_energy_shift, increment
from src.waveop.solver import convergence_factor, propagate_columns, propagate_state, solve

__all__ = [
    "ActiveSpace",
    "EffectivePropagator",
    "ReducedWaveOperator",
    "SolveOptions",
    "SolveReport",
    "STATUS_CONVERGED",
    "STATUS_DIVERGED",
    "STATUS_STALLED",
    "dressed_diagonal",
    "effective_hamiltonian",
    "residual",
    "propagate_effective",
    "IncrementResult",
    "choose_energy_shift",
    "increment",
    "convergence_factor",
    "propagate_columns",
    "propagate_state",
    "solve",
]
