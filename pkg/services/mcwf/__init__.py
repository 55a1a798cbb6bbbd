"""
Monte Carlo wave-function trajectories: drives, integrator, batched runs, emission records.
"""
from .emission_record import EmissionRecord, TrajectoryConfig, read_records, write_records
from .drives import BaseDrive, ContinuousDrive, DriveFactory, DriveMode, PulsedDrive
from .trajectory_engine import (
    LaneIntegrator,
    effective_hamiltonian,
    ensemble_density,
    ensemble_photon_number,
    mcwf_step,
    run_batch,
    run_trajectory,
)
from .trajectory_pool import plan_pulse_blocks, run_pulse_train, run_trajectories

__all__ = [
    'EmissionRecord', 'TrajectoryConfig', 'read_records', 'write_records',
    'BaseDrive', 'ContinuousDrive', 'PulsedDrive', 'DriveFactory', 'DriveMode',
    'LaneIntegrator', 'effective_hamiltonian', 'mcwf_step', 'run_batch', 'run_trajectory',
    'ensemble_density', 'ensemble_photon_number',
    'run_trajectories', 'run_pulse_train', 'plan_pulse_blocks',
]
