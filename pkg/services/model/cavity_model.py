from typing import Tuple, Union
import logging
import math

import numpy as np

import config
from services.errors import InvalidDimensionError, NonHermitianError
from services.fock.fock_space import OperatorMatrix, annihilation_operator, number_operator
from services.model.system_params import PulseTrain, PumpParams, SystemParams

logger = logging.getLogger(__name__)

SPEED_OF_LIGHT_M_PER_NS = 0.299792458

ArrayOrFloat = Union[float, np.ndarray]


def wrap_phase(angle: float) -> float:
    """Reduce an angle to (-pi, pi]"""
    return math.pi - (math.pi - angle) % (2 * math.pi)


def effective_pump_params(pump: PumpParams, delta: float) -> Tuple[float, float]:
    """
    Adiabatically eliminate the strongly pumped second-harmonic mode

    Args:
        pump: Pump strength, nonlinear coupling, harmonic decay and pump phase
        delta: Fundamental-mode detuning (rad/ns)

    Returns:
        Tuple of (U, theta) for the effective single-mode Hamiltonian
    """
    denominator = math.sqrt(4 * delta ** 2 + pump.gamma ** 2 / 4)
    gain = pump.pump_F * pump.chi / denominator
    theta = wrap_phase(math.atan2(pump.gamma, 4 * delta) - pump.theta0)
    return gain, theta


def optimal_drive_conditions(U: float, delta: float, kappa: float) -> Tuple[float, float]:
    """
    Drive strength and phase that cancel the two-photon amplitude at fixed gain U

    Returns:
        Tuple of (E, theta) with E^2 = U * sqrt(delta^2 + kappa^2/4), theta = atan2(kappa, 2 delta)
    """
    if U < 0:
        raise ValueError(f"U must be non-negative, got {U}")
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    drive = math.sqrt(U * math.hypot(delta, kappa / 2))
    return drive, math.atan2(kappa, 2 * delta)


def optimal_parametric_gain(E: float, delta: float, kappa: float) -> Tuple[float, float]:
    """Inverse of optimal_drive_conditions: (U, theta) placing a fixed drive E at the optimum"""
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    return E ** 2 / math.hypot(delta, kappa / 2), math.atan2(kappa, 2 * delta)


def drive_envelope(train: PulseTrain, t: ArrayOrFloat) -> ArrayOrFloat:
    """
    Gaussian pulse-train drive E(t)

    Only the two pulse centers bracketing t contribute; the period >= 4 widths
    invariant keeps every other pulse below machine precision.
    """
    times = np.asarray(t, dtype=float)
    if np.any(times < 0):
        raise ValueError("drive_envelope is defined for t >= 0 only")
    lower = np.floor((times - train.center_t0) / train.period)
    envelope = np.zeros_like(times)
    for index in (lower, lower + 1):
        inside = (index >= 0) & (index < train.pulse_count)
        centers = train.center_t0 + index * train.period
        envelope += np.where(inside, np.exp(-((times - centers) / train.width_dt) ** 2), 0.0)
    envelope *= train.amplitude_E0
    return float(envelope) if np.ndim(t) == 0 else envelope


def parametric_envelope(train: PulseTrain, delta: float, kappa: float, t: ArrayOrFloat) -> ArrayOrFloat:
    """Time-dependent gain U(t) = E(t)^2 / sqrt(delta^2 + kappa^2/4), keeping the pulse at the optimum"""
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    return drive_envelope(train, t) ** 2 / math.hypot(delta, kappa / 2)


def hamiltonian_terms(dim: int, delta: float, theta: float) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Constant pieces of H(t) = H0 + E(t) * drive + U(t) * parametric

    Returns:
        Tuple of dense arrays (delta * n, a + a^dag, e^{i theta} a^dag^2 + e^{-i theta} a^2)
    """
    if dim < 3:
        raise InvalidDimensionError(f"The two-photon drive needs at least 3 Fock levels, got {dim}")
    a = annihilation_operator(dim).elements
    a_dag = a.conj().T
    bare = delta * number_operator(dim).elements
    drive = a + a_dag
    parametric = np.exp(1j * theta) * (a_dag @ a_dag) + np.exp(-1j * theta) * (a @ a)
    return bare.astype(np.complex128), drive.astype(np.complex128), parametric


def build_hamiltonian(params: SystemParams, dim: int) -> OperatorMatrix:
    """
    Effective Hamiltonian delta a^dag a + E (a^dag + a) + U (e^{i theta} a^dag^2 + h.c.)

    Raises:
        InvalidDimensionError: If dim < 3
    """
    bare, drive, parametric = hamiltonian_terms(dim, params.delta, params.theta)
    hamiltonian = OperatorMatrix(bare + params.drive_E * drive + params.parametric_U * parametric)
    if not hamiltonian.is_hermitian(config.TOLERANCES.hamiltonian_hermitian):
        raise NonHermitianError("Constructed Hamiltonian is not Hermitian")
    return hamiltonian


def cavity_linewidth(wavelength: float, quality_factor: float) -> float:
    """
    Cavity decay rate from resonance wavelength and quality factor

    Args:
        wavelength: Resonance wavelength in meters
        quality_factor: Loaded quality factor Q

    Returns:
        kappa in rad/ns
    """
    if not wavelength > 0 or not quality_factor > 0:
        raise ValueError("wavelength and quality_factor must be positive")
    return 2 * math.pi * SPEED_OF_LIGHT_M_PER_NS / wavelength / quality_factor


def ghz_to_rad_per_ns(frequency_ghz: float) -> float:
    """Ordinary frequency in GHz to angular frequency in rad/ns"""
    return 2 * math.pi * frequency_ghz


def rad_per_ns_to_ghz(angular: float) -> float:
    return angular / (2 * math.pi)


def repetition_rate(period: float) -> float:
    """Pulse repetition rate in Hz for a period in ns"""
    return 1e9 / period
