from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple
import logging
import math

import numpy as np
from scipy.optimize import minimize
from scipy.signal import find_peaks

import config
from services.errors import UndefinedCorrelationError
from services.fock.fock_space import DensityMatrix, annihilation_operator
from services.lindblad.liouvillian import (
    Superoperator,
    build_liouvillian,
    propagator,
    steady_state,
    vectorize,
)
from services.model.cavity_model import build_hamiltonian, wrap_phase
from services.model.system_params import SystemParams

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class _RegressionSetup:
    liouvillian: Superoperator
    rho_ss: DensityMatrix
    seeded: np.ndarray  # vec(a rho_ss a^dag), deliberately not trace-normalized
    mean_photons: float

    def number_trace(self, vector: np.ndarray) -> float:
        dim = self.liouvillian.dim
        diagonal = vector[np.arange(dim) * (dim + 1)]
        return float(np.real(np.dot(np.arange(dim), diagonal)))


def _regression_setup(params: SystemParams, dim: int) -> _RegressionSetup:
    liouvillian = build_liouvillian(build_hamiltonian(params, dim), params.kappa)
    rho_ss = steady_state(liouvillian)
    a = annihilation_operator(dim).elements
    mean_photons = float(np.real(np.trace(a.conj().T @ a @ rho_ss.elements)))
    if mean_photons <= config.TOLERANCES.mean_photon_floor:
        raise UndefinedCorrelationError(
            f"Mean photon number {mean_photons:.3e} vanishes; g2 is undefined "
            f"(E={params.drive_E}, U={params.parametric_U})"
        )
    seeded = vectorize(a @ rho_ss.elements @ a.conj().T)
    return _RegressionSetup(liouvillian, rho_ss, seeded, mean_photons)


def mean_photon_number(params: SystemParams, dim: int = config.DEFAULT_FOCK_DIM) -> float:
    """Steady-state <a^dag a>; zero drive gives exactly the vacuum value"""
    liouvillian = build_liouvillian(build_hamiltonian(params, dim), params.kappa)
    rho_ss = steady_state(liouvillian)
    return float(np.real(np.dot(np.arange(dim), np.diag(rho_ss.elements))))


def _uniform_step(taus: np.ndarray) -> Optional[float]:
    if taus.size < 3:
        return None
    steps = np.diff(taus)
    if steps[0] > 0 and np.allclose(steps, steps[0], rtol=1e-9, atol=1e-12):
        return float(steps[0])
    return None


def g2_delay(
    params: SystemParams,
    tau_grid: Sequence[float],
    dim: int = config.DEFAULT_FOCK_DIM,
) -> List[Tuple[float, float]]:
    """
    Delayed second-order correlation by the quantum regression theorem

    g2(tau) = Tr{n exp(L tau)[a rho_ss a^dag]} / Tr(n rho_ss)^2

    Args:
        params: Model parameters
        tau_grid: Non-negative delays in ns; uniform grids reuse one propagator
        dim: Fock truncation

    Returns:
        List of (tau, g2) pairs in grid order

    Raises:
        UndefinedCorrelationError: If the steady state is (numerically) empty
    """
    taus = np.asarray(tau_grid, dtype=float)
    if np.any(taus < 0):
        raise ValueError("Delays must be non-negative")
    setup = _regression_setup(params, dim)
    normalization = setup.mean_photons ** 2

    values = np.empty(taus.size)
    step = _uniform_step(taus)
    if step is not None:
        one_step = propagator(setup.liouvillian, step)
        vector = propagator(setup.liouvillian, float(taus[0])) @ setup.seeded
        for index in range(taus.size):
            if index:
                vector = one_step @ vector
            values[index] = setup.number_trace(vector)
    else:
        for index, tau in enumerate(taus):
            values[index] = setup.number_trace(propagator(setup.liouvillian, float(tau)) @ setup.seeded)

    return [(float(tau), float(value / normalization)) for tau, value in zip(taus, values)]


def g2_zero_cw(params: SystemParams, dim: int = config.DEFAULT_FOCK_DIM) -> float:
    """Equal-time g2(0) = Tr(a^dag a^dag a a rho_ss) / <n>^2"""
    setup = _regression_setup(params, dim)
    a = annihilation_operator(dim).elements
    a_dag = a.conj().T
    pairs = np.real(np.trace(a_dag @ a_dag @ a @ a @ setup.rho_ss.elements))
    return float(pairs / setup.mean_photons ** 2)


def binned_g2(
    params: SystemParams,
    bin_edges: Sequence[float],
    dim: int = config.DEFAULT_FOCK_DIM,
    oversample: int = 8,
) -> List[float]:
    """Quantum-regression g2 averaged over each histogram bin"""
    edges = np.asarray(bin_edges, dtype=float)
    width = float(edges[1] - edges[0])
    sub_step = width / oversample
    points = edges[0] + (np.arange((edges.size - 1) * oversample) + 0.5) * sub_step
    curve = np.array([value for _, value in g2_delay(params, points, dim)])
    return [float(chunk.mean()) for chunk in curve.reshape(edges.size - 1, oversample)]


def oscillation_period(
    taus: Sequence[float],
    g2: Sequence[float],
    min_separation: float = 0.0,
    min_prominence: float = 1e-10,
) -> Optional[float]:
    """
    Mean spacing of successive local maxima of a g2(tau) curve

    Args:
        taus: Uniform delay grid in ns
        g2: Correlation values on that grid
        min_separation: Maxima closer than this (ns) are merged
        min_prominence: Maxima standing out less than this are ignored

    Returns:
        Spacing in ns, or None when fewer than two maxima exist
    """
    taus = np.asarray(taus, dtype=float)
    step = taus[1] - taus[0]
    distance = max(1, int(min_separation / step))
    peaks, _ = find_peaks(np.asarray(g2, dtype=float), distance=distance, prominence=min_prominence)
    if peaks.size < 2:
        return None
    return float(np.mean(np.diff(taus[peaks])))


def find_optimal_drive(
    U: float,
    delta: float,
    kappa: float,
    dim: int = config.DEFAULT_FOCK_DIM,
    initial_guess: Optional[Tuple[float, float]] = None,
) -> Tuple[float, float, float]:
    """
    Minimize g2(0) over drive strength and phase at fixed parametric gain

    The default starting point is the zero-detuning optimum (sqrt(U kappa / 2), pi/2),
    so a detuned search starts away from the answer.

    Returns:
        Tuple of (E, theta, g2_min)
    """
    if initial_guess is None:
        initial_guess = (math.sqrt(U * kappa / 2), math.pi / 2)

    def objective(x: np.ndarray) -> float:
        params = SystemParams(delta=delta, kappa=kappa, drive_E=abs(float(x[0])), parametric_U=U, theta=float(x[1]))
        return g2_zero_cw(params, dim)

    result = minimize(
        objective,
        np.asarray(initial_guess, dtype=float),
        method="Nelder-Mead",
        options={"xatol": 1e-7, "fatol": 1e-14, "maxiter": 4000},
    )
    if not result.success:
        logger.warning(f"Optimum search did not converge: {result.message}")
    drive, theta = abs(float(result.x[0])), float(result.x[1])
    theta = wrap_phase(theta)
    logger.info(f"Optimum search at U={U}, delta={delta}: E={drive:.6f}, theta={theta:.6f}, g2={result.fun:.3e}")
    return drive, theta, float(result.fun)
