"""
Drive strategies for trajectory integration.
"""
from .base_drive import BaseDrive
from .providers.continuous_drive import ContinuousDrive
from .providers.pulsed_drive import PulsedDrive
from .drive_factory import DriveFactory, DriveMode

__all__ = ['BaseDrive', 'ContinuousDrive', 'PulsedDrive', 'DriveFactory', 'DriveMode']
