from typing import Tuple

import numpy as np

from ..base_drive import BaseDrive


class ContinuousDrive(BaseDrive):
    """Time-independent drive: E and U taken straight from the model parameters"""

    def envelopes(self, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        t = np.asarray(t, dtype=float)
        return (
            np.full(t.shape, self.params.drive_E),
            np.full(t.shape, self.params.parametric_U),
        )
