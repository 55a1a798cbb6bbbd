"""
Drive provider implementations package.
"""
from .continuous_drive import ContinuousDrive
from .pulsed_drive import PulsedDrive

__all__ = ['ContinuousDrive', 'PulsedDrive']
