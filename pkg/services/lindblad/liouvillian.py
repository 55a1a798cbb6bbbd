from dataclasses import dataclass
import logging

import numpy as np
from scipy.linalg import expm

import config
from services.errors import DegenerateSteadyStateError, NonHermitianError, SimulationError
from services.fock.fock_space import DensityMatrix, OperatorMatrix, annihilation_operator

logger = logging.getLogger(__name__)

# Density matrices are vectorized by stacking columns: vec(A rho B) = (B^T kron A) vec(rho).


def vectorize(rho: np.ndarray) -> np.ndarray:
    return np.asarray(rho).reshape(-1, order="F")


def unvectorize(vector: np.ndarray, dim: int) -> np.ndarray:
    return np.asarray(vector).reshape((dim, dim), order="F")


@dataclass(frozen=True)
class Superoperator:
    """Liouvillian acting on column-stacked density matrices"""
    dim: int
    elements: np.ndarray

    def __post_init__(self):
        elements = np.array(self.elements, dtype=np.complex128, copy=True)
        if elements.shape != (self.dim ** 2, self.dim ** 2):
            raise ValueError(f"Superoperator shape {elements.shape} does not match dim {self.dim}")
        elements.setflags(write=False)
        object.__setattr__(self, "elements", elements)

    def apply(self, rho: np.ndarray) -> np.ndarray:
        """Return L(rho) as a dim x dim matrix"""
        return unvectorize(self.elements @ vectorize(rho), self.dim)


def build_liouvillian(H: OperatorMatrix, kappa: float) -> Superoperator:
    """
    Liouvillian L rho = -i[H, rho] + kappa (a rho a^dag - {a^dag a, rho}/2)

    The (kappa/2) D[a] form with D[A] rho = 2 A rho A^dag - A^dag A rho - rho A^dag A
    expands to a total jump rate kappa, matching the jump operator sqrt(kappa) a.

    Raises:
        NonHermitianError: If H is not Hermitian
    """
    if not H.is_hermitian():
        raise NonHermitianError("Liouvillian requires a Hermitian Hamiltonian")
    if not kappa > 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    dim = H.dim
    identity = np.eye(dim)
    a = annihilation_operator(dim).elements
    number = a.conj().T @ a
    hamiltonian = H.elements
    coherent = -1j * (np.kron(identity, hamiltonian) - np.kron(hamiltonian.T, identity))
    dissipator = (
        np.kron(a.conj(), a)
        - 0.5 * np.kron(identity, number)
        - 0.5 * np.kron(number.T, identity)
    )
    return Superoperator(dim, coherent + kappa * dissipator)


def steady_state(liouvillian: Superoperator) -> DensityMatrix:
    """
    Stationary density matrix from L rho = 0 with Tr rho = 1

    The equation for rho_00 is redundant under trace preservation, so its row is
    replaced by the trace condition and the system solved directly.

    Raises:
        DegenerateSteadyStateError: If the reduced system is singular
    """
    dim = liouvillian.dim
    system = np.array(liouvillian.elements, copy=True)
    system[0, :] = 0.0
    system[0, np.arange(dim) * (dim + 1)] = 1.0
    rhs = np.zeros(dim ** 2, dtype=np.complex128)
    rhs[0] = 1.0

    if np.linalg.cond(system) > 1e13:
        raise DegenerateSteadyStateError("Liouvillian has more than one stationary state")
    try:
        solution = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as e:
        logger.error(f"Steady-state solve failed: {str(e)}")
        raise DegenerateSteadyStateError(f"Steady-state solve failed: {str(e)}")

    rho = unvectorize(solution, dim)
    rho = (rho + rho.conj().T) / 2
    rho /= np.trace(rho).real
    residual = float(np.linalg.norm(liouvillian.elements @ vectorize(rho)))
    if residual >= config.TOLERANCES.steady_state_residual:
        raise SimulationError(f"Steady-state residual {residual:.3e} exceeds tolerance")
    return DensityMatrix(rho)


def propagator(liouvillian: Superoperator, tau: float) -> np.ndarray:
    """exp(L tau) by scaling-and-squaring Pade approximation"""
    if tau < 0:
        raise ValueError(f"Propagation time must be non-negative, got {tau}")
    return expm(liouvillian.elements * tau)


def propagate(liouvillian: Superoperator, rho0: DensityMatrix, tau: float) -> DensityMatrix:
    """Evolve rho0 for a time tau under the time-independent Liouvillian"""
    evolved = unvectorize(propagator(liouvillian, tau) @ vectorize(rho0.elements), liouvillian.dim)
    drift = abs(np.trace(evolved) - rho0.trace())
    if drift > config.TOLERANCES.propagation_trace:
        logger.warning(f"Trace drifted by {drift:.3e} during propagation over {tau} ns")
    return DensityMatrix(evolved)
