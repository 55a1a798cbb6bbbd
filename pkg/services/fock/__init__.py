"""
Truncated Fock-space linear algebra: states, density matrices, operators.
"""
from .fock_space import (
    DensityMatrix,
    OperatorMatrix,
    StateVector,
    annihilation_operator,
    coherent_state,
    creation_operator,
    expectation,
    fock_state,
    normalize,
    number_operator,
    photon_distribution,
    projector,
    validate_density_matrix,
)
from .truncation_scanner import Observable, TruncationScanResult, truncation_scan

__all__ = [
    'StateVector', 'DensityMatrix', 'OperatorMatrix',
    'annihilation_operator', 'creation_operator', 'number_operator',
    'fock_state', 'coherent_state', 'normalize', 'projector',
    'expectation', 'photon_distribution', 'validate_density_matrix',
    'Observable', 'TruncationScanResult', 'truncation_scan',
]
