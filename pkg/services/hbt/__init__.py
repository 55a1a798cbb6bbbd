"""
Hanbury Brown-Twiss statistics on emission records.
"""
from .coincidence_histogram import CoincidenceHistogram, build_histogram, merge_histograms
from .g2_estimator import (
    G2Point,
    PulsedG2,
    g2_estimate,
    normalized_counts,
    poisson_click_stream,
    poisson_pulse_train,
    pulsed_g2_zero,
    single_photon_pulse_train,
)
from .source_metrics import SourceMetrics, brightness_and_efficiency

__all__ = [
    'CoincidenceHistogram', 'build_histogram', 'merge_histograms',
    'G2Point', 'PulsedG2', 'g2_estimate', 'pulsed_g2_zero', 'normalized_counts',
    'poisson_click_stream', 'poisson_pulse_train', 'single_photon_pulse_train',
    'SourceMetrics', 'brightness_and_efficiency',
]
