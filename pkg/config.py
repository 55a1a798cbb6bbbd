import os
from dataclasses import dataclass
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Application settings
APP_TITLE = "Pulsed Single-Photon Source Simulator"
APP_VERSION = "1.0.0"

# CORS settings
CORS_ORIGINS = [origin.strip() for origin in os.getenv("CORS_ORIGINS", "*").split(",")]
CORS_CREDENTIALS = True
CORS_METHODS = ["*"]
CORS_HEADERS = ["*"]

# Simulation defaults
DEFAULT_WORKERS = int(os.getenv("SPS_WORKERS", "1"))
DEFAULT_FOCK_DIM = int(os.getenv("SPS_FOCK_DIM", "10"))
DEFAULT_OUTPUT_DIR = os.getenv("SPS_OUTPUT_DIR", "results")

# Trajectory lanes advanced together in one vectorized batch. Fixed here, never
# derived from the worker count, so results do not depend on scheduling.
DEFAULT_BATCH_SIZE = int(os.getenv("SPS_BATCH_SIZE", "256"))
DEFAULT_PULSES_PER_BLOCK = int(os.getenv("SPS_PULSES_PER_BLOCK", "100"))

# Desk-scale pulse count vs the full-scale run (--full)
DESK_PULSE_COUNT = 1_000_000
FULL_PULSE_COUNT = 10_000_000

# Logging settings
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


@dataclass(frozen=True)
class Tolerances:
    """Numerical tolerances shared by every module"""
    hermitian: float = 1e-10
    hamiltonian_hermitian: float = 1e-12
    trace: float = 1e-10
    positivity: float = 1e-8
    normalization: float = 1e-12
    steady_state_residual: float = 1e-10
    propagation_trace: float = 1e-9
    stationary_eigenvalue: float = 1e-8
    long_delay_g2: float = 1e-3
    mean_photon_floor: float = 1e-14
    max_jump_prob: float = 0.01
    max_kappa_dt: float = 0.01
    weak_drive_ratio: float = 0.1
    min_period_widths: float = 4.0


TOLERANCES = Tolerances()
