from dataclasses import asdict, dataclass
from typing import Dict, Sequence
import logging

from services.mcwf.emission_record import EmissionRecord
from services.model.cavity_model import repetition_rate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SourceMetrics:
    """Figures of merit of a pulsed source"""
    mean_photons_per_pulse: float
    count_rate: float  # photons per second
    efficiency: float  # emitted photons per excitation pulse

    @property
    def efficiency_percent(self) -> float:
        return 100.0 * self.efficiency

    def to_dict(self) -> Dict[str, float]:
        data = asdict(self)
        data["efficiency_percent"] = self.efficiency_percent
        return data


def brightness_and_efficiency(
    records: Sequence[EmissionRecord],
    pulse_count: int,
    pulse_period: float,
) -> SourceMetrics:
    """
    Brightness <n> = N_total / pulse_count, count rate <n> times the repetition rate

    Args:
        records: Emission records of the run
        pulse_count: Number of excitation pulses
        pulse_period: Pulse spacing in ns

    Returns:
        SourceMetrics
    """
    if pulse_count < 1:
        raise ValueError(f"pulse_count must be at least 1, got {pulse_count}")
    total = sum(record.click_count for record in records)
    if total == 0:
        logger.warning(f"No clicks recorded over {pulse_count} pulses")
    mean_photons = total / pulse_count
    return SourceMetrics(
        mean_photons_per_pulse=mean_photons,
        count_rate=mean_photons * repetition_rate(pulse_period),
        efficiency=mean_photons,
    )
