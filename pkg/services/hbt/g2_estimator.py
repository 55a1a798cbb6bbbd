from typing import List, NamedTuple, Optional
import logging
import math

import numpy as np

from services.errors import UndefinedCorrelationError
from services.hbt.coincidence_histogram import CoincidenceHistogram
from services.mcwf.emission_record import EmissionRecord

logger = logging.getLogger(__name__)


class G2Point(NamedTuple):
    tau: float
    g2: float
    error: float


class PulsedG2(NamedTuple):
    value: float
    error: float
    zero_peak_counts: int
    adjacent_peak_counts: int


def g2_estimate(hist: CoincidenceHistogram) -> List[G2Point]:
    """
    Intensity correlation from a coincidence histogram

    Per bin the mean delayed count counts[j] / N_total is divided by the mean
    photon number in one bin, N_total * bin_width / duration. Errors follow
    Poisson counting statistics, with empty bins treated as one count.

    Raises:
        UndefinedCorrelationError: If fewer than two clicks were recorded
    """
    if hist.total_clicks < 2:
        raise UndefinedCorrelationError(f"g2 needs at least two clicks, histogram has {hist.total_clicks}")
    if not hist.duration > 0:
        raise ValueError(f"Histogram duration must be positive, got {hist.duration}")

    per_bin = hist.total_clicks * hist.bin_width / hist.duration
    scale = 1.0 / (hist.total_clicks * per_bin)
    counts = hist.counts.astype(float)
    values = counts * scale
    errors = np.sqrt(np.maximum(counts, 1.0)) * scale
    return [
        G2Point(float(tau), float(value), float(error))
        for tau, value, error in zip(hist.bin_centers(), values, errors)
    ]


def _peak_sums(hist: CoincidenceHistogram, pulse_period: float):
    if not pulse_period > 0:
        raise ValueError(f"pulse_period must be positive, got {pulse_period}")
    if hist.max_delay < 1.5 * pulse_period - 1e-9:
        raise ValueError(
            f"max_delay {hist.max_delay} ns must cover 1.5 pulse periods ({1.5 * pulse_period} ns)"
        )
    centers = hist.bin_centers()
    zero = int(hist.counts[centers < pulse_period / 2].sum())
    adjacent = int(hist.counts[(centers >= pulse_period / 2) & (centers < 1.5 * pulse_period)].sum())
    return zero, adjacent


def pulsed_g2_zero(hist: CoincidenceHistogram, pulse_period: float) -> PulsedG2:
    """
    Zero-delay peak over adjacent peak for a pulsed histogram

    Ordered pairs only fill positive delays, so the zero-delay integral is
    doubled to account for its mirror image at negative delay. Each peak is
    divided by its number of pulse opportunities: every pulse for the zero
    peak, every consecutive pulse pair inside a record for the adjacent one.

    Args:
        hist: Histogram built from pulsed emission records
        pulse_period: Pulse spacing in ns

    Returns:
        PulsedG2 with value and counting-statistics error

    Raises:
        ValueError: If the histogram is too short or carries no pulse count
        UndefinedCorrelationError: If the adjacent peak is empty
    """
    if hist.pulse_count < 1:
        raise ValueError("pulsed_g2_zero needs a histogram built from pulsed records")
    zero, adjacent = _peak_sums(hist, pulse_period)
    pairs = hist.pulse_count - hist.record_count
    if adjacent == 0 or pairs < 1:
        raise UndefinedCorrelationError(
            f"Adjacent peak is empty ({adjacent} counts over {pairs} pulse pairs); g2(0) is undefined"
        )

    zero_rate = 2.0 * zero / hist.pulse_count
    adjacent_rate = adjacent / pairs
    value = zero_rate / adjacent_rate
    zero_error = 2.0 * math.sqrt(max(zero, 1)) / hist.pulse_count
    adjacent_error = math.sqrt(adjacent) / pairs
    error = math.hypot(zero_error / adjacent_rate, zero_rate * adjacent_error / adjacent_rate ** 2)
    return PulsedG2(value=value, error=error, zero_peak_counts=zero, adjacent_peak_counts=adjacent)


def normalized_counts(hist: CoincidenceHistogram, pulse_period: float) -> np.ndarray:
    """Counts scaled so the adjacent peak integrates to one"""
    _, adjacent = _peak_sums(hist, pulse_period)
    if adjacent == 0:
        raise UndefinedCorrelationError("Adjacent peak is empty; cannot normalize")
    return hist.counts / adjacent


def poisson_click_stream(rate: float, duration: float, seed: int = 0) -> EmissionRecord:
    """Homogeneous Poisson clicks: the coherent-light reference with flat g2 = 1"""
    if rate < 0 or not duration > 0:
        raise ValueError("rate must be non-negative and duration positive")
    rng = np.random.default_rng(seed)
    clicks = np.unique(rng.uniform(0.0, duration, rng.poisson(rate * duration)))
    return EmissionRecord(seed=seed, click_times=clicks, duration=duration)


def _pulse_clicks(
    photons: np.ndarray,
    period: float,
    width: float,
    center_t0: Optional[float],
    rng: np.random.Generator,
) -> np.ndarray:
    center_t0 = period / 2 if center_t0 is None else center_t0
    pulse_index = np.repeat(np.arange(photons.size), photons)
    starts = pulse_index * period
    # exp(-(t - c)^2 / width^2) amplitude means intensity with standard deviation width / 2
    times = starts + center_t0 + rng.normal(0.0, width / 2, pulse_index.size)
    times = np.clip(times, starts, starts + period * (1 - 1e-12))
    return np.unique(times)


def poisson_pulse_train(
    mean_per_pulse: float,
    pulse_count: int,
    period: float,
    width: float,
    seed: int = 0,
    center_t0: Optional[float] = None,
) -> EmissionRecord:
    """Independent pulses with Poisson photon numbers; pulsed g2(0) of exactly 1 in expectation"""
    rng = np.random.default_rng(seed)
    photons = rng.poisson(mean_per_pulse, pulse_count)
    clicks = _pulse_clicks(photons, period, width, center_t0, rng)
    return EmissionRecord(seed=seed, click_times=clicks, duration=pulse_count * period, pulse_count=pulse_count)


def single_photon_pulse_train(
    probability: float,
    pulse_count: int,
    period: float,
    width: float,
    seed: int = 0,
    center_t0: Optional[float] = None,
) -> EmissionRecord:
    """At most one photon per pulse, emitted with the given probability; pulsed g2(0) = 0"""
    if not 0 <= probability <= 1:
        raise ValueError(f"probability must lie in [0, 1], got {probability}")
    rng = np.random.default_rng(seed)
    photons = (rng.random(pulse_count) < probability).astype(np.int64)
    clicks = _pulse_clicks(photons, period, width, center_t0, rng)
    return EmissionRecord(seed=seed, click_times=clicks, duration=pulse_count * period, pulse_count=pulse_count)
