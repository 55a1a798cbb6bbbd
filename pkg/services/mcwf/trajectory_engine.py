from dataclasses import replace
from typing import Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np

import config
from services.errors import NonHermitianError, SimulationError, StepSizeViolationError
from services.fock.fock_space import (
    DensityMatrix,
    OperatorMatrix,
    StateVector,
    annihilation_operator,
    number_operator,
)
from services.mcwf.drives.base_drive import BaseDrive
from services.mcwf.drives.drive_factory import DriveFactory, DriveMode
from services.mcwf.emission_record import EmissionRecord, TrajectoryConfig
from services.model.cavity_model import hamiltonian_terms
from services.model.system_params import PulseTrain, SystemParams

logger = logging.getLogger(__name__)


def effective_hamiltonian(H: OperatorMatrix, kappa: float) -> OperatorMatrix:
    """Non-Hermitian H_eff = H - i J^dag J / 2 with J = sqrt(kappa) a"""
    if not H.is_hermitian():
        raise NonHermitianError("Effective Hamiltonian requires a Hermitian H")
    return OperatorMatrix(H.elements - 0.5j * kappa * number_operator(H.dim).elements)


def mcwf_step(
    state: StateVector,
    H_eff_at_t: OperatorMatrix,
    step_dt: float,
    random_r: float,
    max_jump_prob: float = config.TOLERANCES.max_jump_prob,
    time: float = 0.0,
) -> Tuple[StateVector, bool]:
    """
    One first-order Monte Carlo wave-function step

    The jump probability dp = dt <psi|J^dag J|psi> is read off the anti-Hermitian
    part of H_eff. A jump happens when random_r < dp; the output is normalized
    in both branches.

    Args:
        state: Normalized state at the start of the step
        H_eff_at_t: Effective Hamiltonian sampled for this step
        step_dt: Step length in ns
        random_r: Uniform random number in [0, 1)
        max_jump_prob: Cap on dp
        time: Step start time, reported on violation

    Returns:
        Tuple of (new state, whether a photon was emitted)

    Raises:
        StepSizeViolationError: If dp >= max_jump_prob
    """
    psi = state.amplitudes
    hamiltonian = H_eff_at_t.elements
    jump_rate = 1j * (hamiltonian - hamiltonian.conj().T)
    jump_prob = step_dt * float(np.real(np.vdot(psi, jump_rate @ psi)))
    if jump_prob >= max_jump_prob:
        raise StepSizeViolationError(
            f"Jump probability {jump_prob:.4g} per step at t={time} ns exceeds {max_jump_prob}; shrink step_dt",
            time=time,
        )
    evolved = psi - 1j * step_dt * (hamiltonian @ psi)
    jumped = random_r < jump_prob
    if jumped:
        evolved = annihilation_operator(state.dim).elements @ evolved
    norm = np.linalg.norm(evolved)
    if norm == 0.0:
        raise SimulationError(f"State collapsed to the zero vector at t={time} ns")
    return StateVector(evolved / norm), jumped


def _lane_generator(seed: int, trajectory_index: int) -> np.random.Generator:
    # Stream depends only on (master seed, trajectory index), never on batching
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence([int(seed), int(trajectory_index)])))


class LaneIntegrator:
    """
    Advances a batch of independent trajectories (lanes) in lockstep

    Every lane applies exactly the mcwf_step rule with its own random stream; the
    time-dependent Hamiltonian is sampled at step midpoints and clicks are stamped
    at the end of the step in which they occur.
    """

    CHUNK_STEPS = 1024

    def __init__(self, drive: BaseDrive, trajectory_config: TrajectoryConfig):
        params = drive.params
        trajectory_config.check_step(params.kappa)
        self.drive = drive
        self.config = trajectory_config

        dim = trajectory_config.dim
        dt = trajectory_config.step_dt
        bare, drive_term, parametric = hamiltonian_terms(dim, params.delta, params.theta)
        damping = -0.5j * params.kappa * number_operator(dim).elements
        self.base_step = np.eye(dim) - 1j * dt * (bare + damping)
        self.drive_step = -1j * dt * drive_term
        self.parametric_step = -1j * dt * parametric
        self.jump_weights = params.kappa * dt * np.arange(dim)
        self.lowering = annihilation_operator(dim).elements.T

    def run(
        self,
        trajectory_indices: Sequence[int],
        sample_steps: Sequence[int] = (),
    ) -> Tuple[List[List[float]], Dict[int, np.ndarray]]:
        """
        Integrate all lanes from vacuum

        Returns:
            Tuple of (click times per lane with warmup removed, {step: lane states})
        """
        cfg = self.config
        lanes = len(trajectory_indices)
        dt = cfg.step_dt
        total_steps = cfg.step_count
        generators = [_lane_generator(cfg.seed, index) for index in trajectory_indices]
        wanted = set(int(step) for step in sample_steps)

        psi = np.zeros((lanes, cfg.dim), dtype=np.complex128)
        psi[:, 0] = 1.0
        clicks: List[List[float]] = [[] for _ in range(lanes)]
        samples: Dict[int, np.ndarray] = {}
        if 0 in wanted:
            samples[0] = psi.copy()

        for start in range(0, total_steps, self.CHUNK_STEPS):
            stop = min(start + self.CHUNK_STEPS, total_steps)
            randoms = np.stack([generator.random(stop - start) for generator in generators])
            midpoints = (np.arange(start, stop) + 0.5) * dt
            drive_values, gain_values = self.drive.envelopes(midpoints)
            steps = (
                self.base_step[None, :, :]
                + drive_values[:, None, None] * self.drive_step[None, :, :]
                + gain_values[:, None, None] * self.parametric_step[None, :, :]
            )
            for offset in range(stop - start):
                step_index = start + offset
                jump_prob = (psi.real ** 2 + psi.imag ** 2) @ self.jump_weights
                worst = int(np.argmax(jump_prob))
                if jump_prob[worst] >= cfg.max_jump_prob:
                    time = step_index * dt
                    raise StepSizeViolationError(
                        f"Jump probability {jump_prob[worst]:.4g} at t={time:.6g} ns in trajectory "
                        f"{trajectory_indices[worst]} exceeds {cfg.max_jump_prob}; shrink step_dt",
                        time=time,
                        trajectory_index=int(trajectory_indices[worst]),
                    )
                psi = psi @ steps[offset].T
                jumped = randoms[:, offset] < jump_prob
                if jumped.any():
                    rows = np.nonzero(jumped)[0]
                    psi[rows] = psi[rows] @ self.lowering
                    click_time = (step_index + 1) * dt
                    if click_time > cfg.warmup:
                        for row in rows:
                            clicks[row].append(click_time - cfg.warmup)
                psi /= np.linalg.norm(psi, axis=1)[:, None]
                if step_index + 1 in wanted:
                    samples[step_index + 1] = psi.copy()

        return clicks, samples


def run_batch(
    drive: BaseDrive,
    trajectory_config: TrajectoryConfig,
    trajectory_indices: Sequence[int],
    first_pulses: Optional[Sequence[int]] = None,
) -> List[EmissionRecord]:
    """Run a batch of trajectories as vectorized lanes and wrap their clicks as records"""
    integrator = LaneIntegrator(drive, trajectory_config)
    clicks, _ = integrator.run(trajectory_indices)
    recorded = trajectory_config.step_count * trajectory_config.step_dt - trajectory_config.warmup
    if first_pulses is None:
        first_pulses = [0] * len(trajectory_indices)
    return [
        EmissionRecord(
            seed=trajectory_config.seed,
            click_times=np.asarray(lane_clicks, dtype=float),
            duration=recorded,
            pulse_count=drive.pulse_count,
            first_pulse=int(first_pulse),
            trajectory_index=int(index),
        )
        for lane_clicks, index, first_pulse in zip(clicks, trajectory_indices, first_pulses)
    ]


def _drive_for(params: SystemParams, pulses: Optional[PulseTrain]) -> BaseDrive:
    mode = DriveMode.PULSED if pulses is not None else DriveMode.CW
    return DriveFactory.get_drive(mode, params, pulses)


def run_trajectory(
    params: SystemParams,
    trajectory_config: TrajectoryConfig,
    pulses: Optional[PulseTrain] = None,
) -> EmissionRecord:
    """
    Single trajectory from vacuum, deterministic in (parameters, seed)

    Raises:
        ValueError: If a pulsed run's duration does not cover the whole train
        StepSizeViolationError: With the offending time
    """
    if pulses is not None and trajectory_config.duration < pulses.duration() - 1e-9:
        raise ValueError(
            f"duration {trajectory_config.duration} ns does not cover {pulses.pulse_count} pulses "
            f"({pulses.duration()} ns)"
        )
    return run_batch(_drive_for(params, pulses), trajectory_config, [0])[0]


def _sample_lanes(
    params: SystemParams,
    trajectory_config: TrajectoryConfig,
    n_traj: int,
    sample_times: Sequence[float],
    pulses: Optional[PulseTrain],
) -> List[np.ndarray]:
    if n_traj < 1:
        raise ValueError(f"n_traj must be positive, got {n_traj}")
    dt = trajectory_config.step_dt
    sample_steps = [int(round(t / dt)) for t in sample_times]
    if min(sample_steps) < 0:
        raise ValueError("Sample times must be non-negative")
    sampling_config = replace(trajectory_config, duration=max(max(sample_steps), 1) * dt, warmup=0.0)
    integrator = LaneIntegrator(_drive_for(params, pulses), sampling_config)

    collected: Dict[int, List[np.ndarray]] = {step: [] for step in sample_steps}
    for start in range(0, n_traj, trajectory_config.batch_size):
        indices = list(range(start, min(start + trajectory_config.batch_size, n_traj)))
        _, samples = integrator.run(indices, sample_steps)
        for step in collected:
            collected[step].append(samples[step])
    return [np.concatenate(collected[step]) for step in sample_steps]


def ensemble_density(
    params: SystemParams,
    trajectory_config: TrajectoryConfig,
    n_traj: int,
    sample_times: Sequence[float],
    pulses: Optional[PulseTrain] = None,
) -> List[DensityMatrix]:
    """Trajectory average of |psi><psi| at each sample time"""
    states = _sample_lanes(params, trajectory_config, n_traj, sample_times, pulses)
    return [DensityMatrix(np.einsum("li,lj->ij", lanes, lanes.conj()) / lanes.shape[0]) for lanes in states]


def ensemble_photon_number(
    params: SystemParams,
    trajectory_config: TrajectoryConfig,
    n_traj: int,
    sample_times: Sequence[float],
    pulses: Optional[PulseTrain] = None,
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Ensemble <n> and its standard error at each sample time

    Returns:
        Tuple of arrays (mean, standard error)
    """
    states = _sample_lanes(params, trajectory_config, n_traj, sample_times, pulses)
    levels = np.arange(trajectory_config.dim)
    means, errors = [], []
    for lanes in states:
        per_lane = (np.abs(lanes) ** 2) @ levels
        means.append(per_lane.mean())
        errors.append(per_lane.std(ddof=1) / np.sqrt(per_lane.size) if per_lane.size > 1 else 0.0)
    return np.asarray(means), np.asarray(errors)
