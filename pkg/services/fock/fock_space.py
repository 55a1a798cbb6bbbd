from dataclasses import dataclass
from typing import List, Union
import logging

import numpy as np
from scipy.special import factorial

import config
from services.errors import DimensionMismatchError, InvalidDimensionError, SimulationError

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=np.complex128, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class StateVector:
    """Pure state in a truncated Fock basis; amplitude n multiplies |n>"""
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = _frozen(self.amplitudes)
        if amplitudes.ndim != 1 or amplitudes.size < 1:
            raise InvalidDimensionError(f"State vector must be one-dimensional, got shape {amplitudes.shape}")
        object.__setattr__(self, "amplitudes", amplitudes)

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class DensityMatrix:
    """Mixed state over a truncated Fock basis"""
    elements: np.ndarray

    def __post_init__(self):
        elements = _frozen(self.elements)
        if elements.ndim != 2 or elements.shape[0] != elements.shape[1]:
            raise InvalidDimensionError(f"Density matrix must be square, got shape {elements.shape}")
        object.__setattr__(self, "elements", elements)

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    def trace(self) -> complex:
        return complex(np.trace(self.elements))


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense operator on a truncated Fock basis"""
    elements: np.ndarray

    def __post_init__(self):
        elements = _frozen(self.elements)
        if elements.ndim != 2 or elements.shape[0] != elements.shape[1]:
            raise InvalidDimensionError(f"Operator must be square, got shape {elements.shape}")
        object.__setattr__(self, "elements", elements)

    @property
    def dim(self) -> int:
        return self.elements.shape[0]

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.elements.conj().T)

    def is_hermitian(self, tol: float = config.TOLERANCES.hermitian) -> bool:
        return bool(np.max(np.abs(self.elements - self.elements.conj().T)) < tol)

    def __matmul__(self, other: "OperatorMatrix") -> "OperatorMatrix":
        return OperatorMatrix(self.elements @ other.elements)


def _check_dim(dim: int, minimum: int = 2) -> None:
    if int(dim) != dim or dim < minimum:
        raise InvalidDimensionError(f"Fock dimension must be an integer >= {minimum}, got {dim}")


def annihilation_operator(dim: int) -> OperatorMatrix:
    """
    Truncated annihilation operator a with a[n-1, n] = sqrt(n)

    Raises:
        InvalidDimensionError: If dim < 2
    """
    _check_dim(dim)
    return OperatorMatrix(np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1))


def creation_operator(dim: int) -> OperatorMatrix:
    return annihilation_operator(dim).dag()


def number_operator(dim: int) -> OperatorMatrix:
    _check_dim(dim)
    return OperatorMatrix(np.diag(np.arange(dim, dtype=float)))


def fock_state(dim: int, n: int) -> StateVector:
    _check_dim(dim, minimum=1)
    if not 0 <= n < dim:
        raise InvalidDimensionError(f"Fock state |{n}> is outside a truncation of dimension {dim}")
    amplitudes = np.zeros(dim, dtype=np.complex128)
    amplitudes[n] = 1.0
    return StateVector(amplitudes)


def coherent_state(dim: int, alpha: complex) -> StateVector:
    """Coherent state |alpha> truncated to dim levels and renormalized"""
    if alpha == 0:
        return fock_state(dim, 0)
    n = np.arange(dim)
    amplitudes = np.exp(-abs(alpha) ** 2 / 2) * np.power(complex(alpha), n) / np.sqrt(factorial(n))
    return normalize(StateVector(amplitudes))


def normalize(state: StateVector) -> StateVector:
    norm = state.norm()
    if norm == 0.0:
        raise SimulationError("Cannot normalize the zero vector")
    return StateVector(state.amplitudes / norm)


def projector(state: StateVector) -> DensityMatrix:
    return DensityMatrix(np.outer(state.amplitudes, state.amplitudes.conj()))


def expectation(op: OperatorMatrix, state: Union[StateVector, DensityMatrix]) -> complex:
    """
    Expectation value <psi|op|psi> for a pure state or Tr(op rho) for a mixed one

    Raises:
        DimensionMismatchError: If the operator and state dimensions differ
    """
    if op.dim != state.dim:
        raise DimensionMismatchError(f"Operator dimension {op.dim} does not match state dimension {state.dim}")
    if isinstance(state, StateVector):
        psi = state.amplitudes
        return complex(np.vdot(psi, op.elements @ psi))
    return complex(np.trace(op.elements @ state.elements))


def photon_distribution(rho: DensityMatrix) -> List[float]:
    return [float(p) for p in np.real(np.diag(rho.elements))]


def validate_density_matrix(rho: DensityMatrix, tolerances: config.Tolerances = config.TOLERANCES) -> None:
    """
    Check Hermiticity, unit trace and positivity

    Raises:
        SimulationError: Naming the first violated property
    """
    elements = rho.elements
    asymmetry = float(np.max(np.abs(elements - elements.conj().T)))
    if asymmetry >= tolerances.hermitian:
        raise SimulationError(f"Density matrix is not Hermitian (max deviation {asymmetry:.3e})")
    trace = np.trace(elements)
    if abs(trace - 1.0) >= tolerances.trace:
        raise SimulationError(f"Density matrix trace is {trace.real:.12f}, expected 1")
    smallest = float(np.min(np.linalg.eigvalsh((elements + elements.conj().T) / 2)))
    if smallest < -tolerances.positivity:
        raise SimulationError(f"Density matrix has negative eigenvalue {smallest:.3e}")
