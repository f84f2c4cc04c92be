from src.oracle.reference import (
    OracleWaveOperator,
    oracle_propagate,
    oracle_wave_operator,
    stacked_hamiltonians,
)

__all__ = ["OracleWaveOperator", "oracle_propagate", "oracle_wave_operator", "stacked_hamiltonians"]
