from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, List, Optional, Union
import logging

import numpy as np

import config

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class TrajectoryConfig:
    """
    Integration settings for Monte Carlo wave-function trajectories

    step_dt and duration are in ns. warmup discards clicks before that time and
    shortens the recorded duration accordingly (CW runs start from vacuum).
    """
    step_dt: float
    duration: float
    seed: int = 0
    dim: int = config.DEFAULT_FOCK_DIM
    max_jump_prob: float = config.TOLERANCES.max_jump_prob
    warmup: float = 0.0
    batch_size: int = config.DEFAULT_BATCH_SIZE
    pulses_per_block: int = config.DEFAULT_PULSES_PER_BLOCK

    def __post_init__(self):
        if not self.step_dt > 0:
            raise ValueError(f"step_dt must be positive, got {self.step_dt}")
        if not self.duration > 0:
            raise ValueError(f"duration must be positive, got {self.duration}")
        if not 0 < self.max_jump_prob <= config.TOLERANCES.max_jump_prob:
            raise ValueError(f"max_jump_prob must lie in (0, {config.TOLERANCES.max_jump_prob}], got {self.max_jump_prob}")
        if not 0 <= self.warmup < self.duration:
            raise ValueError(f"warmup must lie in [0, duration), got {self.warmup}")
        if self.dim < 3:
            raise ValueError(f"dim must be at least 3, got {self.dim}")
        if self.seed < 0:
            raise ValueError(f"seed must be non-negative, got {self.seed}")
        if self.batch_size < 1 or self.pulses_per_block < 1:
            raise ValueError("batch_size and pulses_per_block must be positive")

    @staticmethod
    def default_step(kappa: float) -> float:
        return 0.005 / kappa

    @property
    def step_count(self) -> int:
        return int(round(self.duration / self.step_dt))

    def check_step(self, kappa: float) -> None:
        """
        Raises:
            ValueError: If kappa * step_dt exceeds the first-order integration limit
        """
        if kappa * self.step_dt > config.TOLERANCES.max_kappa_dt * (1 + 1e-12):
            raise ValueError(
                f"kappa * step_dt = {kappa * self.step_dt:.4g} exceeds {config.TOLERANCES.max_kappa_dt}; "
                f"use step_dt <= {config.TOLERANCES.max_kappa_dt / kappa:.4g} ns"
            )


@dataclass(frozen=True)
class EmissionRecord:
    """Photon emission timestamps (ns) of one trajectory"""
    seed: int
    click_times: np.ndarray
    duration: float
    pulse_count: int = 0  # 0 for CW
    first_pulse: int = 0
    trajectory_index: int = 0

    def __post_init__(self):
        clicks = np.array(self.click_times, dtype=float, copy=True).reshape(-1)
        if clicks.size:
            if np.any(np.diff(clicks) <= 0):
                raise ValueError("click_times must be strictly increasing")
            if clicks[0] < 0 or clicks[-1] > self.duration * (1 + 1e-12):
                raise ValueError(f"click_times must lie within [0, {self.duration}]")
        clicks.setflags(write=False)
        object.__setattr__(self, "click_times", clicks)

    @property
    def click_count(self) -> int:
        return int(self.click_times.size)

    def shifted(self, offset: float) -> "EmissionRecord":
        """Same record with every click moved by offset (duration grows by offset)"""
        return EmissionRecord(
            seed=self.seed,
            click_times=self.click_times + offset,
            duration=self.duration + offset,
            pulse_count=self.pulse_count,
            first_pulse=self.first_pulse,
            trajectory_index=self.trajectory_index,
        )


def write_records(path: Union[str, Path], records: Iterable[EmissionRecord]) -> Path:
    """
    Write records as text: a '#' header line per record, then one timestamp per line

    Returns:
        Path of the written file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as handle:
        for record in records:
            handle.write(
                f"# record trajectory_index={record.trajectory_index} seed={record.seed} "
                f"duration={float(record.duration)!r} pulse_count={record.pulse_count} "
                f"first_pulse={record.first_pulse} clicks={record.click_count}\n"
            )
            for click in record.click_times:
                handle.write(f"{float(click)!r}\n")
    logger.info(f"Wrote emission records to {path}")
    return path


def read_records(path: Union[str, Path]) -> List[EmissionRecord]:
    records: List[EmissionRecord] = []
    header: Optional[dict] = None
    clicks: List[float] = []

    def flush():
        if header is not None:
            records.append(
                EmissionRecord(
                    seed=int(header["seed"]),
                    click_times=np.array(clicks, dtype=float),
                    duration=float(header["duration"]),
                    pulse_count=int(header["pulse_count"]),
                    first_pulse=int(header["first_pulse"]),
                    trajectory_index=int(header["trajectory_index"]),
                )
            )

    with Path(path).open("r", encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            if line.startswith("# record"):
                flush()
                header = dict(item.split("=", 1) for item in line[len("# record"):].split())
                clicks = []
            else:
                clicks.append(float(line))
    flush()
    return records
