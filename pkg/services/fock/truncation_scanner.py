from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Sequence, Tuple
import logging

from services.errors import TruncationNotConvergedError
from services.model.system_params import SystemParams

logger = logging.getLogger(__name__)


class Observable(Enum):
    MEAN_PHOTON_NUMBER = "mean_photon_number"
    G2_ZERO = "g2_zero"


@dataclass(frozen=True)
class TruncationScanResult:
    """Outcome of a Fock-truncation convergence scan"""
    observable: Observable
    converged_dim: int
    value: float
    table: List[Tuple[int, float]] = field(default_factory=list)


def _observable_function(observable: Observable) -> Callable[[SystemParams, int], float]:
    # Local import: lindblad builds on fock
    from services.lindblad.correlation import g2_zero_cw, mean_photon_number

    functions: Dict[Observable, Callable[[SystemParams, int], float]] = {
        Observable.MEAN_PHOTON_NUMBER: mean_photon_number,
        Observable.G2_ZERO: g2_zero_cw,
    }
    return functions[observable]


def truncation_scan(
    model: SystemParams,
    observable: Observable,
    dims: Sequence[int],
    tol: float,
) -> TruncationScanResult:
    """
    Smallest Fock dimension whose observable agrees with the next scanned dimension

    Args:
        model: Model parameters (CW)
        observable: Which steady-state quantity to track
        dims: Strictly increasing dimensions, at least three
        tol: Absolute agreement required between neighbouring dimensions

    Returns:
        TruncationScanResult with the converged dimension and the full scan table

    Raises:
        TruncationNotConvergedError: If no neighbouring pair agrees within tol
    """
    observable = Observable(observable)
    dims = [int(d) for d in dims]
    if len(dims) < 3 or any(b <= a for a, b in zip(dims, dims[1:])):
        raise ValueError(f"dims must be strictly increasing with at least 3 entries, got {dims}")

    function = _observable_function(observable)
    table = [(dim, function(model, dim)) for dim in dims]
    for (dim, value), (_, next_value) in zip(table, table[1:]):
        if abs(value - next_value) < tol:
            logger.info(f"{observable.value} converged at D={dim} (value {value:.12g})")
            return TruncationScanResult(observable, dim, value, table)

    logger.error(f"{observable.value} did not converge over dims {dims}: {table}")
    raise TruncationNotConvergedError(
        f"{observable.value} did not converge within tol={tol} over dims {dims}", table
    )
