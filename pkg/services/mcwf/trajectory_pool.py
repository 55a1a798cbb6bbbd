from dataclasses import dataclass, replace
from itertools import groupby
from typing import List, Optional, Sequence
import logging
import math

from joblib import Parallel, delayed

import config
from services.errors import StepSizeViolationError
from services.mcwf.drives.base_drive import BaseDrive
from services.mcwf.drives.providers.pulsed_drive import PulsedDrive
from services.mcwf.emission_record import EmissionRecord, TrajectoryConfig
from services.mcwf.trajectory_engine import run_batch
from services.model.system_params import PulseTrain, SystemParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class _BlockTask:
    pulse_count: int
    block_indices: List[int]
    first_pulses: List[int]


def _chunks(items: Sequence[int], size: int) -> List[List[int]]:
    return [list(items[start:start + size]) for start in range(0, len(items), size)]


def run_trajectories(
    drive: BaseDrive,
    trajectory_config: TrajectoryConfig,
    n_traj: int,
    workers: int = config.DEFAULT_WORKERS,
) -> List[EmissionRecord]:
    """
    Run n_traj independent trajectories, sharded over joblib workers

    Batches are cut by trajectory_config.batch_size and each lane seeds from
    (seed, trajectory index), so the result is identical for any worker count.

    Args:
        drive: Continuous or pulsed drive
        trajectory_config: Integration settings
        n_traj: Number of trajectories
        workers: joblib worker processes

    Returns:
        Records ordered by trajectory index
    """
    if n_traj < 1:
        raise ValueError(f"n_traj must be positive, got {n_traj}")
    batches = _chunks(range(n_traj), trajectory_config.batch_size)
    logger.info(f"Running {n_traj} trajectories in {len(batches)} batches on {workers} workers")

    results = Parallel(n_jobs=workers, backend="loky")(
        delayed(run_batch)(drive, trajectory_config, indices) for indices in batches
    )
    return [record for batch in results for record in batch]


def _run_pulse_blocks(
    drive: PulsedDrive,
    trajectory_config: TrajectoryConfig,
    task: _BlockTask,
) -> List[EmissionRecord]:
    block_drive = drive.block(task.pulse_count)
    block_config = replace(trajectory_config, duration=block_drive.train.duration(), warmup=0.0)
    try:
        return run_batch(block_drive, block_config, task.block_indices, task.first_pulses)
    except StepSizeViolationError as e:
        lane = e.trajectory_index if e.trajectory_index is not None else task.block_indices[0]
        first_pulse = task.first_pulses[task.block_indices.index(lane)]
        pulse_index = first_pulse + int(math.floor(e.time / drive.train.period))
        raise StepSizeViolationError(
            f"{e} (pulse {pulse_index})",
            time=e.time,
            trajectory_index=lane,
            pulse_index=pulse_index,
        ) from e


def plan_pulse_blocks(pulse_count: int, trajectory_config: TrajectoryConfig) -> List[_BlockTask]:
    """
    Cut a pulse train into contiguous blocks and group blocks into batch tasks

    Every block starts from vacuum and spans pulses_per_block pulses (the last one
    may be shorter); a task only holds blocks of equal length.
    """
    per_block = trajectory_config.pulses_per_block
    blocks = [
        (block_index, first, min(per_block, pulse_count - first))
        for block_index, first in enumerate(range(0, pulse_count, per_block))
    ]
    tasks: List[_BlockTask] = []
    for count, group in groupby(blocks, key=lambda block: block[2]):
        group = list(group)
        for chunk in _chunks(range(len(group)), trajectory_config.batch_size):
            members = [group[i] for i in chunk]
            tasks.append(
                _BlockTask(
                    pulse_count=count,
                    block_indices=[block[0] for block in members],
                    first_pulses=[block[1] for block in members],
                )
            )
    return tasks


def run_pulse_train(
    params: SystemParams,
    pulses: PulseTrain,
    trajectory_config: TrajectoryConfig,
    workers: int = config.DEFAULT_WORKERS,
    pulse_count: Optional[int] = None,
) -> List[EmissionRecord]:
    """
    Simulate a long pulse train as independent blocks of pulses

    Args:
        params: Model parameters (delta, kappa, theta are used)
        pulses: Pulse shape and spacing; pulses.pulse_count is the total unless overridden
        trajectory_config: Step size, seed and sharding; duration is replaced per block
        workers: joblib worker processes
        pulse_count: Optional override of the total pulse count

    Returns:
        One record per block, ordered by first pulse, with block-local times

    Raises:
        StepSizeViolationError: Carrying the offending pulse index
    """
    total = pulses.pulse_count if pulse_count is None else int(pulse_count)
    if total < 1:
        raise ValueError(f"pulse_count must be positive, got {total}")
    drive = PulsedDrive(params, pulses)
    tasks = plan_pulse_blocks(total, trajectory_config)
    logger.info(
        f"Simulating {total} pulses in blocks of {trajectory_config.pulses_per_block} "
        f"({len(tasks)} tasks, {workers} workers)"
    )

    try:
        results = Parallel(n_jobs=workers, backend="loky")(
            delayed(_run_pulse_blocks)(drive, trajectory_config, task) for task in tasks
        )
    except StepSizeViolationError as e:
        logger.error(f"Pulse train aborted: {e}")
        raise

    records = [record for batch in results for record in batch]
    records.sort(key=lambda record: record.first_pulse)
    clicks = sum(record.click_count for record in records)
    logger.info(f"Pulse train finished: {clicks} clicks over {total} pulses")
    return records
