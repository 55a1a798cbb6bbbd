"""
Physical model: parameter records, pump elimination, optimum conditions, drive envelopes.
"""
from .system_params import PulseTrain, PumpParams, SystemParams
from .cavity_model import (
    build_hamiltonian,
    cavity_linewidth,
    drive_envelope,
    effective_pump_params,
    ghz_to_rad_per_ns,
    hamiltonian_terms,
    optimal_drive_conditions,
    optimal_parametric_gain,
    parametric_envelope,
    rad_per_ns_to_ghz,
    repetition_rate,
    wrap_phase,
)

__all__ = [
    'SystemParams', 'PumpParams', 'PulseTrain',
    'effective_pump_params', 'optimal_drive_conditions', 'optimal_parametric_gain',
    'drive_envelope', 'parametric_envelope', 'build_hamiltonian', 'hamiltonian_terms',
    'cavity_linewidth', 'ghz_to_rad_per_ns', 'rad_per_ns_to_ghz', 'repetition_rate', 'wrap_phase',
]
