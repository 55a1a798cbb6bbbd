import numpy as np
import pytest

from services.errors import UndefinedCorrelationError
from services.hbt import (
    CoincidenceHistogram,
    brightness_and_efficiency,
    build_histogram,
    g2_estimate,
    merge_histograms,
    normalized_counts,
    poisson_click_stream,
    poisson_pulse_train,
    pulsed_g2_zero,
    single_photon_pulse_train,
)
from services.mcwf import EmissionRecord

PERIOD = 24.0


def _record(clicks, duration=20.0, **fields):
    return EmissionRecord(seed=0, click_times=np.asarray(clicks, dtype=float), duration=duration, **fields)


def test_two_clicks_fill_one_bin():
    hist = build_histogram([_record([1.0, 6.0])], bin_width=1.0, max_delay=10.0)
    assert hist.bins == 10
    assert hist.counts[5] == 1
    assert hist.counts.sum() == 1
    assert hist.total_clicks == 2


def test_all_ordered_pairs_counted():
    hist = build_histogram([_record([0.0, 3.0, 6.0])], bin_width=1.0, max_delay=10.0)
    assert hist.counts[3] == 2
    assert hist.counts[6] == 1
    assert hist.counts.sum() == 3


def test_pairs_never_cross_records():
    hist = build_histogram([_record([1.0]), _record([2.0])], bin_width=1.0, max_delay=10.0)
    assert hist.counts.sum() == 0
    assert hist.record_count == 2


def test_max_delay_rounds_up_to_whole_bins():
    hist = build_histogram([_record([1.0, 2.0])], bin_width=0.4, max_delay=1.0)
    assert hist.bins == 3
    assert hist.max_delay == pytest.approx(1.2)


def test_histogram_is_additive_over_records():
    rng = np.random.default_rng(0)
    records = [_record(np.sort(rng.uniform(0, 20, 15))) for _ in range(4)]
    whole = build_histogram(records, 0.5, 5.0)
    merged = merge_histograms([build_histogram(records[:1], 0.5, 5.0), build_histogram(records[1:], 0.5, 5.0)])
    reordered = build_histogram(records[::-1], 0.5, 5.0)
    np.testing.assert_array_equal(whole.counts, merged.counts)
    np.testing.assert_array_equal(whole.counts, reordered.counts)
    assert merged.total_clicks == whole.total_clicks


def test_merge_requires_matching_bins():
    with pytest.raises(ValueError):
        merge_histograms([build_histogram([_record([1.0])], 1.0, 10.0), build_histogram([_record([1.0])], 0.5, 10.0)])


def test_empty_input_is_flagged(caplog):
    hist = build_histogram([], 0.5, 5.0)
    assert hist.empty
    assert hist.counts.sum() == 0
    assert "no clicks" in caplog.text
    with pytest.raises(UndefinedCorrelationError):
        g2_estimate(hist)


def test_histogram_rejects_inconsistent_counts():
    with pytest.raises(ValueError):
        CoincidenceHistogram(bin_width=1.0, max_delay=5.0, counts=np.zeros(4), total_clicks=0, duration=1.0)


def test_poisson_stream_has_flat_g2():
    hist = build_histogram([poisson_click_stream(0.02, 2.0e7, seed=7)], 0.5, 20.0)
    points = g2_estimate(hist)
    values = np.array([p.g2 for p in points])
    deviations = np.array([(p.g2 - 1.0) / p.error for p in points])
    assert len(points) == 40
    assert abs(values.mean() - 1.0) < 0.02
    assert np.max(np.abs(deviations)) < 5


def test_periodic_single_clicks_are_antibunched():
    clicks = 5.0 + 10.0 * np.arange(100)
    points = g2_estimate(build_histogram([_record(clicks, duration=1000.0)], 1.0, 9.0))
    assert all(p.g2 == 0.0 for p in points)
    assert all(p.error > 0 for p in points)


def test_g2_estimate_needs_two_clicks():
    with pytest.raises(UndefinedCorrelationError):
        g2_estimate(build_histogram([_record([3.0])], 1.0, 5.0))


def test_poisson_pulses_give_unit_pulsed_g2():
    record = poisson_pulse_train(0.1, 1_000_000, PERIOD, 2.0, seed=3)
    result = pulsed_g2_zero(build_histogram([record], 0.5, 2 * PERIOD), PERIOD)
    assert abs(result.value - 1.0) < 4 * result.error
    assert result.zero_peak_counts > 0


def test_single_photon_pulses_give_zero():
    record = single_photon_pulse_train(0.3, 20_000, PERIOD, 2.0, seed=4)
    hist = build_histogram([record], 0.5, 2 * PERIOD)
    result = pulsed_g2_zero(hist, PERIOD)
    assert result.value == 0.0
    assert result.zero_peak_counts == 0
    assert result.error > 0
    assert normalized_counts(hist, PERIOD)[(hist.bin_centers() >= PERIOD / 2) & (hist.bin_centers() < 1.5 * PERIOD)].sum() == pytest.approx(1.0)


def test_pulsed_g2_ignores_time_offset():
    record = poisson_pulse_train(0.5, 5_000, PERIOD, 2.0, seed=8)
    original = pulsed_g2_zero(build_histogram([record], 0.5, 2 * PERIOD), PERIOD)
    moved = pulsed_g2_zero(build_histogram([record.shifted(5.0)], 0.5, 2 * PERIOD), PERIOD)
    assert moved.value == pytest.approx(original.value)


def test_pulsed_g2_input_checks():
    record = poisson_pulse_train(0.5, 100, PERIOD, 2.0, seed=1)
    with pytest.raises(ValueError, match="1.5 pulse periods"):
        pulsed_g2_zero(build_histogram([record], 0.5, PERIOD), PERIOD)
    with pytest.raises(ValueError):
        pulsed_g2_zero(build_histogram([poisson_click_stream(1.0, 100.0)], 0.5, 2 * PERIOD), PERIOD)
    with pytest.raises(UndefinedCorrelationError):
        pulsed_g2_zero(build_histogram([single_photon_pulse_train(0.0, 100, PERIOD, 2.0)], 0.5, 2 * PERIOD), PERIOD)


def test_brightness_and_efficiency():
    record = _record(np.arange(19_000) + 0.5, duration=24e6, pulse_count=1_000_000)
    metrics = brightness_and_efficiency([record], 1_000_000, PERIOD)
    assert metrics.mean_photons_per_pulse == pytest.approx(0.019)
    assert metrics.efficiency_percent == pytest.approx(1.9)
    assert metrics.count_rate == pytest.approx(0.019 * 1e9 / PERIOD)
    assert metrics.to_dict()["efficiency_percent"] == pytest.approx(1.9)


def test_one_click_per_pulse_and_no_clicks():
    record = _record(12.0 + PERIOD * np.arange(10), duration=10 * PERIOD, pulse_count=10)
    assert brightness_and_efficiency([record], 10, PERIOD).count_rate == pytest.approx(1e9 / PERIOD)
    silent = brightness_and_efficiency([], 10, PERIOD)
    assert silent.mean_photons_per_pulse == 0.0
    assert silent.count_rate == 0.0
    with pytest.raises(ValueError):
        brightness_and_efficiency([], 0, PERIOD)
