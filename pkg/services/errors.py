"""
Exception hierarchy shared by the simulation services.

Exceptions carrying extra context define __reduce__ so they survive the trip
back from joblib worker processes.
"""
from typing import Dict, List, Optional, Sequence, Tuple


class SimulationError(Exception):
    """Base class for every failure raised by the simulator"""


class InvalidDimensionError(SimulationError, ValueError):
    """Fock truncation too small for the requested operator"""


class DimensionMismatchError(SimulationError, ValueError):
    """Operator and state live in spaces of different dimension"""


class NonHermitianError(SimulationError, ValueError):
    """A Hamiltonian failed the Hermiticity check"""


class DegenerateSteadyStateError(SimulationError):
    """The Liouvillian has more than one stationary state"""


class UndefinedCorrelationError(SimulationError):
    """g2 requested where the mean photon number (or click count) vanishes"""


class StepSizeViolationError(SimulationError):
    """Jump probability per step exceeded the configured cap"""

    def __init__(
        self,
        message: str,
        time: float,
        trajectory_index: Optional[int] = None,
        pulse_index: Optional[int] = None,
    ):
        super().__init__(message)
        self.message = message
        self.time = time
        self.trajectory_index = trajectory_index
        self.pulse_index = pulse_index

    def __reduce__(self):
        return (type(self), (self.message, self.time, self.trajectory_index, self.pulse_index))


class TruncationNotConvergedError(SimulationError):
    """Observable did not converge over the scanned Fock dimensions"""

    def __init__(self, message: str, table: Sequence[Tuple[int, float]]):
        super().__init__(message)
        self.message = message
        self.table = list(table)

    def __reduce__(self):
        return (type(self), (self.message, self.table))


class ConfigError(SimulationError, ValueError):
    """Experiment configuration failed to parse or validate"""

    def __init__(self, message: str, key: Optional[str] = None):
        super().__init__(message)
        self.message = message
        self.key = key

    def __reduce__(self):
        return (type(self), (self.message, self.key))


class OracleViolationError(SimulationError):
    """One or more cross-module oracle checks failed"""

    def __init__(self, message: str, failures: List[Dict]):
        super().__init__(message)
        self.message = message
        self.failures = failures

    def __reduce__(self):
        return (type(self), (self.message, self.failures))
