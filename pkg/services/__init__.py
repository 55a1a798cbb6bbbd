"""
Services package: Fock-space algebra, the cavity model, master equation, quantum
trajectories, coincidence statistics, result storage and reporting.
"""
from .errors import (
    ConfigError,
    DegenerateSteadyStateError,
    DimensionMismatchError,
    InvalidDimensionError,
    NonHermitianError,
    OracleViolationError,
    SimulationError,
    StepSizeViolationError,
    TruncationNotConvergedError,
    UndefinedCorrelationError,
)

__all__ = [
    'SimulationError', 'InvalidDimensionError', 'DimensionMismatchError', 'NonHermitianError',
    'DegenerateSteadyStateError', 'UndefinedCorrelationError', 'StepSizeViolationError',
    'TruncationNotConvergedError', 'ConfigError', 'OracleViolationError',
]
