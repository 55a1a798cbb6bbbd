from dataclasses import replace
from typing import Tuple
import logging

import numpy as np

from services.model.cavity_model import drive_envelope, parametric_envelope
from services.model.system_params import PulseTrain, SystemParams
from ..base_drive import BaseDrive

logger = logging.getLogger(__name__)


class PulsedDrive(BaseDrive):
    """Gaussian pulse train with the parametric gain shaped as E(t)^2 to stay at the optimum"""

    def __init__(self, params: SystemParams, train: PulseTrain):
        super().__init__(params)
        self.train = train

    @property
    def pulse_count(self) -> int:
        return self.train.pulse_count

    def envelopes(self, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        t = np.asarray(t, dtype=float)
        drive = drive_envelope(self.train, t)
        gain = parametric_envelope(self.train, self.params.delta, self.params.kappa, t)
        return np.asarray(drive), np.asarray(gain)

    def block(self, pulse_count: int) -> "PulsedDrive":
        """Drive for a contiguous block of pulse_count pulses, timed from the block start"""
        return PulsedDrive(self.params, replace(self.train, pulse_count=pulse_count))
