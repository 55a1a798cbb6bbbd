from dataclasses import dataclass, replace
from typing import List, Optional
import logging

import config

logger = logging.getLogger(__name__)

# All frequencies are angular, in rad/ns ("1 GHz" in the literature -> 1 rad/ns).
# All times are in ns.


@dataclass(frozen=True)
class SystemParams:
    """Effective single-mode cavity model driven coherently and parametrically"""
    delta: float  # cavity-drive detuning
    kappa: float  # fundamental-mode decay rate
    drive_E: float = 0.0  # coherent drive strength
    parametric_U: float = 0.0  # effective parametric gain
    theta: float = 0.0  # relative phase of the two-photon drive

    def __post_init__(self):
        if not self.kappa > 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.drive_E < 0 or self.parametric_U < 0:
            raise ValueError("drive_E and parametric_U must be non-negative")
        limit = config.TOLERANCES.weak_drive_ratio * self.kappa
        if self.drive_E >= limit or self.parametric_U >= limit:
            logger.warning(
                f"Outside the weak-driving regime (E={self.drive_E}, U={self.parametric_U}, "
                f"kappa={self.kappa}); optimum-condition formulas may not apply"
            )

    def with_overrides(self, **fields) -> "SystemParams":
        return replace(self, **fields)


@dataclass(frozen=True)
class PumpParams:
    """Second-harmonic pump seen by the fundamental mode before adiabatic elimination"""
    pump_F: float
    chi: float
    gamma: float
    theta0: float = 0.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.pump_F < 0 or self.chi < 0:
            raise ValueError("pump_F and chi must be non-negative")


@dataclass(frozen=True)
class PulseTrain:
    """
    Train of Gaussian drive pulses E0 * exp(-(t - c_n)^2 / dt^2)

    period defaults to 12 pulse widths; center_t0 (first pulse center) defaults
    to half a period so the first pulse is not clipped at t = 0.
    """
    amplitude_E0: float
    width_dt: float
    pulse_count: int = 1
    period: Optional[float] = None
    center_t0: Optional[float] = None

    PERIOD_WIDTHS = 12.0

    def __post_init__(self):
        if not self.width_dt > 0:
            raise ValueError(f"width_dt must be positive, got {self.width_dt}")
        if self.amplitude_E0 < 0:
            raise ValueError(f"amplitude_E0 must be non-negative, got {self.amplitude_E0}")
        if int(self.pulse_count) != self.pulse_count or self.pulse_count < 1:
            raise ValueError(f"pulse_count must be a positive integer, got {self.pulse_count}")
        if self.period is None:
            object.__setattr__(self, "period", self.PERIOD_WIDTHS * self.width_dt)
        if self.period < config.TOLERANCES.min_period_widths * self.width_dt:
            raise ValueError(
                f"period {self.period} ns is shorter than {config.TOLERANCES.min_period_widths:g} "
                f"pulse widths ({self.width_dt} ns); adjacent pulses would overlap"
            )
        if self.center_t0 is None:
            object.__setattr__(self, "center_t0", self.period / 2)

    def duration(self) -> float:
        return self.pulse_count * self.period

    def pulse_centers(self) -> List[float]:
        return [self.center_t0 + n * self.period for n in range(self.pulse_count)]

    def with_overrides(self, **fields) -> "PulseTrain":
        # Derived defaults follow the new width unless given explicitly
        if "width_dt" in fields and "period" not in fields:
            fields["period"] = None
            fields.setdefault("center_t0", None)
        return replace(self, **fields)
