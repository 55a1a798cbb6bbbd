import logging
import math

import numpy as np
import pytest

from services.errors import InvalidDimensionError
from services.model import (
    PulseTrain,
    PumpParams,
    SystemParams,
    build_hamiltonian,
    cavity_linewidth,
    drive_envelope,
    effective_pump_params,
    ghz_to_rad_per_ns,
    optimal_drive_conditions,
    optimal_parametric_gain,
    parametric_envelope,
    rad_per_ns_to_ghz,
    repetition_rate,
    wrap_phase,
)


def test_effective_pump_at_zero_detuning():
    gain, theta = effective_pump_params(PumpParams(pump_F=0.25, chi=0.01, gamma=1.0, theta0=0.0), delta=0.0)
    assert gain == pytest.approx(0.005)
    assert theta == pytest.approx(math.pi / 2)


def test_effective_pump_phase_is_wrapped():
    _, theta = effective_pump_params(PumpParams(pump_F=1.0, chi=1.0, gamma=1.0, theta0=-3 * math.pi), delta=0.0)
    assert -math.pi < theta <= math.pi
    assert theta == pytest.approx(-math.pi / 2)


def test_pump_validation():
    with pytest.raises(ValueError):
        PumpParams(pump_F=1.0, chi=1.0, gamma=0.0)


def test_optimal_drive_conditions():
    drive, theta = optimal_drive_conditions(U=0.005, delta=0.0, kappa=1.0)
    assert drive == pytest.approx(0.05)
    assert theta == pytest.approx(math.pi / 2)

    drive, theta = optimal_drive_conditions(U=0.005, delta=0.5, kappa=1.0)
    assert drive ** 2 == pytest.approx(0.005 * math.sqrt(0.5))
    assert theta == pytest.approx(math.pi / 4)


def test_optimal_parametric_gain_inverts_drive_conditions():
    gain, theta = optimal_parametric_gain(E=0.05, delta=0.25, kappa=1.0)
    drive, phase = optimal_drive_conditions(gain, 0.25, 1.0)
    assert drive == pytest.approx(0.05)
    assert phase == pytest.approx(theta)


def test_drive_envelope_at_pulse_center_and_between_pulses():
    train = PulseTrain(amplitude_E0=0.05, width_dt=1.0, pulse_count=2, period=12.0)
    assert train.center_t0 == pytest.approx(6.0)
    assert drive_envelope(train, 6.0) == pytest.approx(0.05)
    assert drive_envelope(train, 12.0) == pytest.approx(2 * 0.05 * math.exp(-36.0))
    assert drive_envelope(train, 7.0) == pytest.approx(0.05 * math.exp(-1.0))


def test_drive_envelope_is_vectorized_and_vanishes_after_train():
    train = PulseTrain(amplitude_E0=0.1, width_dt=2.0, pulse_count=3, period=24.0)
    times = np.array(train.pulse_centers())
    np.testing.assert_allclose(drive_envelope(train, times), 0.1)
    assert drive_envelope(train, 3 * 24.0 + 12.0) == pytest.approx(0.0, abs=1e-30)


def test_drive_envelope_rejects_negative_times():
    train = PulseTrain(amplitude_E0=0.05, width_dt=2.0)
    with pytest.raises(ValueError):
        drive_envelope(train, -1.0)


def test_parametric_envelope_tracks_optimum():
    train = PulseTrain(amplitude_E0=0.05, width_dt=2.0)
    assert parametric_envelope(train, 0.0, 1.0, train.center_t0) == pytest.approx(0.005)


def test_pulse_train_defaults_and_overlap():
    train = PulseTrain(amplitude_E0=0.05, width_dt=2.0, pulse_count=4)
    assert train.period == pytest.approx(24.0)
    assert train.duration() == pytest.approx(96.0)
    with pytest.raises(ValueError, match="overlap"):
        PulseTrain(amplitude_E0=0.05, width_dt=2.0, period=7.9)
    with pytest.raises(ValueError):
        PulseTrain(amplitude_E0=0.05, width_dt=0.0)


def test_pulse_train_width_override_rescales_period():
    train = PulseTrain(amplitude_E0=0.05, width_dt=2.0).with_overrides(width_dt=3.0)
    assert train.period == pytest.approx(36.0)
    assert train.center_t0 == pytest.approx(18.0)
    fixed = PulseTrain(amplitude_E0=0.05, width_dt=2.0, period=24.0).with_overrides(width_dt=3.0, period=24.0)
    assert fixed.period == pytest.approx(24.0)


def test_system_params_validation_and_weak_drive_warning(caplog):
    with pytest.raises(ValueError):
        SystemParams(delta=0.0, kappa=0.0)
    with pytest.raises(ValueError):
        SystemParams(delta=0.0, kappa=1.0, drive_E=-0.1)
    with caplog.at_level(logging.WARNING):
        SystemParams(delta=0.0, kappa=1.0, drive_E=0.5)
    assert "weak-driving" in caplog.text


def test_build_hamiltonian_matrix_elements(cw_params):
    H = build_hamiltonian(cw_params, 4).elements
    assert H.shape == (4, 4)
    assert H[1, 0] == pytest.approx(0.05)
    assert H[2, 0] == pytest.approx(0.005 * math.sqrt(2) * 1j)
    assert H[0, 2] == pytest.approx(np.conj(H[2, 0]))
    assert np.allclose(H, H.conj().T)


def test_build_hamiltonian_detuning_on_diagonal():
    H = build_hamiltonian(SystemParams(delta=0.3, kappa=1.0), 5).elements
    np.testing.assert_allclose(np.diag(H).real, 0.3 * np.arange(5))


def test_build_hamiltonian_needs_two_photon_space(cw_params):
    with pytest.raises(InvalidDimensionError):
        build_hamiltonian(cw_params, 2)


def test_unit_helpers():
    assert wrap_phase(3 * math.pi) == pytest.approx(math.pi)
    assert wrap_phase(-math.pi) == pytest.approx(math.pi)
    assert repetition_rate(24.0) == pytest.approx(1e9 / 24.0)
    assert cavity_linewidth(1.5e-6, 1e6) == pytest.approx(1.2558, rel=1e-3)
    assert rad_per_ns_to_ghz(ghz_to_rad_per_ns(0.05)) == pytest.approx(0.05)
