"""
Full-scale reproduction runs. Deselected by default; run with `pytest -m slow`.
"""
import math
import os
from pathlib import Path

import numpy as np
import pytest

from core import ExperimentRunner, load_config, validate

CONFIGS = Path(__file__).resolve().parent.parent / "configs"
WORKERS = os.cpu_count() or 1

pytestmark = pytest.mark.slow


def _load(name, tmp_path, **overrides):
    return load_config(CONFIGS / name, {"output.directory": str(tmp_path), "workers": WORKERS, **overrides})


def test_pulsed_purity_and_brightness(tmp_path):
    metrics = ExperimentRunner(_load("reference_pulsed.yaml", tmp_path)).run_pulsed_experiment().metrics
    assert metrics["pulse_count"] >= 1_000_000
    assert abs(metrics["g2_zero"] - 0.14) <= 0.05 + 3 * metrics["g2_zero_error"]
    assert metrics["mean_photons_per_pulse"] == pytest.approx(0.019, rel=0.2)
    assert metrics["efficiency_percent"] == pytest.approx(1.9, rel=0.2)
    assert metrics["count_rate"] == pytest.approx(8e5, rel=0.2)


def test_trajectories_reproduce_master_equation(tmp_path):
    experiment = _load("cw_optimum.yaml", tmp_path)
    assert experiment.trajectory.n_trajectories >= 2000
    result = validate(experiment, str(tmp_path))
    assert result.metrics["click_rate"]
    assert result.metrics["ensemble_mean_photons"]
    assert result.metrics["trajectory_g2_vs_regression"]
    assert result.metrics["step_halving"]


def _sweep(name, tmp_path):
    points = ExperimentRunner(_load(name, tmp_path)).run_sweep().metrics["points"]
    assert len(points) >= 6
    assert all(point["status"] == "ok" for point in points)
    return points


def _never_significantly_decreasing(values, errors, sigmas=2.0):
    for (left, left_error), (right, right_error) in zip(zip(values, errors), zip(values[1:], errors[1:])):
        assert right - left > -sigmas * math.hypot(left_error, right_error)


def _defined_g2(points):
    defined = [p for p in points if p["g2_zero"] is not None]
    return [p["g2_zero"] for p in defined], [p["g2_zero_error"] for p in defined]


def test_width_sweep_trends(tmp_path):
    points = _sweep("sweep_width.yaml", tmp_path)
    photons = [p["mean_photons_per_pulse"] for p in points]
    photon_errors = [p["mean_photons_error"] for p in points]
    _never_significantly_decreasing(photons, photon_errors)
    assert photons[-1] - photons[0] > 3 * math.hypot(photon_errors[0], photon_errors[-1])

    g2, _ = _defined_g2(points)
    assert len(g2) >= 3
    assert 0 < int(np.argmin(g2)) < len(g2) - 1


def test_amplitude_sweep_trends(tmp_path):
    points = _sweep("sweep_amplitude.yaml", tmp_path)
    photons = [p["mean_photons_per_pulse"] for p in points]
    photon_errors = [p["mean_photons_error"] for p in points]
    _never_significantly_decreasing(photons, photon_errors)
    assert photons[-1] - photons[0] > 3 * math.hypot(photon_errors[0], photon_errors[-1])

    g2, g2_errors = _defined_g2(points)
    assert len(g2) >= 3
    _never_significantly_decreasing(g2, g2_errors)
