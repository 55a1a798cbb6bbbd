from abc import ABC, abstractmethod
from typing import Tuple
import logging

import numpy as np

from services.model.system_params import SystemParams

logger = logging.getLogger(__name__)


class BaseDrive(ABC):
    """Abstract base class for the coherent + parametric driving of the cavity"""

    def __init__(self, params: SystemParams):
        self.params = params

    @property
    def pulse_count(self) -> int:
        """Number of excitation pulses (0 for continuous driving)"""
        return 0

    @abstractmethod
    def envelopes(self, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """
        Drive strength and parametric gain at the given times

        Args:
            t: Times in ns

        Returns:
            Tuple of arrays (E(t), U(t)) in rad/ns
        """
        pass
