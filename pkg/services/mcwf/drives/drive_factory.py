from enum import Enum
from typing import Dict, Optional, Type
import logging

from services.model.system_params import PulseTrain, SystemParams
from .base_drive import BaseDrive
from .providers.continuous_drive import ContinuousDrive
from .providers.pulsed_drive import PulsedDrive

logger = logging.getLogger(__name__)


class DriveMode(Enum):
    CW = "cw"
    PULSED = "pulsed"


class DriveFactory:
    _drives: Dict[DriveMode, Type[BaseDrive]] = {
        DriveMode.CW: ContinuousDrive,
        DriveMode.PULSED: PulsedDrive,
    }

    @classmethod
    def get_drive(cls, mode: DriveMode, params: SystemParams, pulses: Optional[PulseTrain] = None) -> BaseDrive:
        """
        Get an instance of the drive for the given mode

        Args:
            mode: Continuous or pulsed excitation
            params: Model parameters (E and U are ignored for pulsed driving)
            pulses: Pulse train, required for pulsed mode

        Returns:
            An instance of the matching drive

        Raises:
            ValueError: If the mode is unsupported or a pulsed drive has no train
        """
        mode = DriveMode(mode)
        if mode not in cls._drives:
            raise ValueError(f"Unsupported drive mode: {mode}")
        if mode is DriveMode.PULSED:
            if pulses is None:
                raise ValueError("Pulsed drive requires a pulse train")
            return PulsedDrive(params, pulses)
        return cls._drives[mode](params)
