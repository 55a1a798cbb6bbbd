"""
Master-equation layer: Liouvillian, steady state, propagation, quantum-regression g2.
"""
from .liouvillian import Superoperator, build_liouvillian, propagate, propagator, steady_state
from .correlation import (
    binned_g2,
    find_optimal_drive,
    g2_delay,
    g2_zero_cw,
    mean_photon_number,
    oscillation_period,
)

__all__ = [
    'Superoperator', 'build_liouvillian', 'steady_state', 'propagate', 'propagator',
    'g2_delay', 'g2_zero_cw', 'binned_g2', 'mean_photon_number',
    'oscillation_period', 'find_optimal_drive',
]
