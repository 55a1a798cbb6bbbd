from dataclasses import dataclass
from typing import Iterable, List, Sequence
import logging
import math

import numpy as np

from services.mcwf.emission_record import EmissionRecord

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CoincidenceHistogram:
    """
    Delayed-coincidence counts: counts[j] holds ordered click pairs with delay in
    [j * bin_width, (j + 1) * bin_width)

    empty flags a histogram built from no records or no clicks.
    """
    bin_width: float
    max_delay: float
    counts: np.ndarray
    total_clicks: int
    duration: float
    pulse_count: int = 0
    record_count: int = 0
    empty: bool = False

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.int64, copy=True).reshape(-1)
        if np.any(counts < 0):
            raise ValueError("Coincidence counts must be non-negative")
        if not self.bin_width > 0:
            raise ValueError(f"bin_width must be positive, got {self.bin_width}")
        if not math.isclose(self.max_delay, counts.size * self.bin_width, rel_tol=1e-9):
            raise ValueError(
                f"max_delay {self.max_delay} does not equal {counts.size} bins x {self.bin_width}"
            )
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @property
    def bins(self) -> int:
        return int(self.counts.size)

    def bin_edges(self) -> np.ndarray:
        return np.arange(self.bins + 1) * self.bin_width

    def bin_centers(self) -> np.ndarray:
        return (np.arange(self.bins) + 0.5) * self.bin_width


def _bin_count(bin_width: float, max_delay: float) -> int:
    if not bin_width > 0:
        raise ValueError(f"bin_width must be positive, got {bin_width}")
    if not max_delay > 0:
        raise ValueError(f"max_delay must be positive, got {max_delay}")
    return max(1, int(math.ceil(max_delay / bin_width - 1e-9)))


def _record_counts(clicks: np.ndarray, bin_width: float, bins: int) -> np.ndarray:
    counts = np.zeros(bins, dtype=np.int64)
    limit = bins * bin_width
    for lag in range(1, clicks.size):
        delays = clicks[lag:] - clicks[:-lag]
        within = delays[delays <= limit]
        if within.size == 0:
            # Clicks are sorted, so larger lags only produce longer delays
            break
        index = np.minimum((within / bin_width).astype(np.int64), bins - 1)
        counts += np.bincount(index, minlength=bins)
    return counts


def build_histogram(
    records: Sequence[EmissionRecord],
    bin_width: float,
    max_delay: float,
) -> CoincidenceHistogram:
    """
    Accumulate delayed coincidences over every ordered click pair within each record

    Pairs from different records are never combined. max_delay is rounded up to a
    whole number of bins.

    Args:
        records: Emission records (one per trajectory or pulse block)
        bin_width: Delay bin width in ns
        max_delay: Largest delay to histogram, ns

    Returns:
        CoincidenceHistogram; empty records give zero counts with empty=True
    """
    bins = _bin_count(bin_width, max_delay)
    records = list(records)
    counts = np.zeros(bins, dtype=np.int64)
    for record in records:
        counts += _record_counts(record.click_times, bin_width, bins)

    total_clicks = sum(record.click_count for record in records)
    empty = not records or total_clicks == 0
    if empty:
        logger.warning(f"Building a coincidence histogram from {len(records)} records with no clicks")
    return CoincidenceHistogram(
        bin_width=bin_width,
        max_delay=bins * bin_width,
        counts=counts,
        total_clicks=total_clicks,
        duration=float(sum(record.duration for record in records)),
        pulse_count=sum(record.pulse_count for record in records),
        record_count=len(records),
        empty=empty,
    )


def merge_histograms(histograms: Iterable[CoincidenceHistogram]) -> CoincidenceHistogram:
    """Add histograms built from disjoint record sets; binning must match"""
    histograms: List[CoincidenceHistogram] = list(histograms)
    if not histograms:
        raise ValueError("merge_histograms needs at least one histogram")
    first = histograms[0]
    for other in histograms[1:]:
        if other.bins != first.bins or not math.isclose(other.bin_width, first.bin_width, rel_tol=1e-12):
            raise ValueError("Cannot merge histograms with different binning")
    total_clicks = sum(h.total_clicks for h in histograms)
    return CoincidenceHistogram(
        bin_width=first.bin_width,
        max_delay=first.max_delay,
        counts=np.sum([h.counts for h in histograms], axis=0),
        total_clicks=total_clicks,
        duration=float(sum(h.duration for h in histograms)),
        pulse_count=sum(h.pulse_count for h in histograms),
        record_count=sum(h.record_count for h in histograms),
        empty=total_clicks == 0,
    )
