import math

import numpy as np
import pytest

from services.errors import NonHermitianError, StepSizeViolationError
from services.fock import OperatorMatrix, fock_state
from services.lindblad import mean_photon_number
from services.mcwf import (
    ContinuousDrive,
    DriveFactory,
    DriveMode,
    EmissionRecord,
    PulsedDrive,
    TrajectoryConfig,
    effective_hamiltonian,
    ensemble_density,
    ensemble_photon_number,
    mcwf_step,
    plan_pulse_blocks,
    read_records,
    run_pulse_train,
    run_trajectories,
    run_trajectory,
    write_records,
)
from services.mcwf.trajectory_engine import LaneIntegrator
from services.mcwf.trajectory_pool import _BlockTask, _run_pulse_blocks
from services.model import PulseTrain, SystemParams, hamiltonian_terms

DT = 0.005


@pytest.fixture
def pulse_params():
    return SystemParams(delta=0.0, kappa=1.0, theta=math.pi / 2)


def _free_cavity(dim=3):
    return effective_hamiltonian(OperatorMatrix(np.zeros((dim, dim))), 1.0)


def test_effective_hamiltonian_adds_damping():
    H_eff = _free_cavity(4)
    np.testing.assert_allclose(np.diag(H_eff.elements), -0.5j * np.arange(4))
    with pytest.raises(NonHermitianError):
        effective_hamiltonian(OperatorMatrix(np.array([[0.0, 1.0], [0.0, 0.0]])), 1.0)


def test_vacuum_never_jumps():
    state, jumped = mcwf_step(fock_state(3, 0), _free_cavity(), DT, random_r=0.0)
    assert not jumped
    np.testing.assert_allclose(state.amplitudes, fock_state(3, 0).amplitudes)


def test_jump_lowers_the_state():
    state, jumped = mcwf_step(fock_state(3, 1), _free_cavity(), DT, random_r=0.001)
    assert jumped
    np.testing.assert_allclose(np.abs(state.amplitudes), fock_state(3, 0).amplitudes, atol=1e-12)


def test_no_jump_branch_stays_normalized():
    state, jumped = mcwf_step(fock_state(3, 2), _free_cavity(), DT, random_r=0.5)
    assert not jumped
    assert state.norm() == pytest.approx(1.0, abs=1e-12)


def test_step_size_violation():
    with pytest.raises(StepSizeViolationError) as excinfo:
        mcwf_step(fock_state(3, 1), _free_cavity(), 0.02, random_r=0.5, time=4.0)
    assert excinfo.value.time == 4.0


def test_jump_frequency_matches_probability():
    rng = np.random.default_rng(11)
    draws = 20_000
    jump_prob = DT * 1.0
    jumps = sum(mcwf_step(fock_state(3, 1), _free_cavity(), DT, random_r=r)[1] for r in rng.random(draws))
    spread = math.sqrt(draws * jump_prob * (1 - jump_prob))
    assert abs(jumps - draws * jump_prob) < 4 * spread


def test_trajectory_config_validation():
    with pytest.raises(ValueError):
        TrajectoryConfig(step_dt=DT, duration=10.0, max_jump_prob=0.02)
    with pytest.raises(ValueError):
        TrajectoryConfig(step_dt=DT, duration=10.0, warmup=10.0)
    config = TrajectoryConfig(step_dt=0.02, duration=10.0)
    assert config.step_count == 500
    with pytest.raises(ValueError, match="kappa"):
        config.check_step(1.0)


def test_emission_record_validation_and_shift():
    with pytest.raises(ValueError):
        EmissionRecord(seed=0, click_times=np.array([2.0, 1.0]), duration=5.0)
    with pytest.raises(ValueError):
        EmissionRecord(seed=0, click_times=np.array([6.0]), duration=5.0)
    shifted = EmissionRecord(seed=0, click_times=np.array([1.0, 2.0]), duration=5.0).shifted(3.0)
    np.testing.assert_allclose(shifted.click_times, [4.0, 5.0])
    assert shifted.duration == pytest.approx(8.0)


def test_records_file_preserves_clicks(tmp_path):
    records = [
        EmissionRecord(seed=4, click_times=np.array([0.1, 2.0 / 3.0]), duration=3.0, pulse_count=2, first_pulse=6,
                       trajectory_index=1),
        EmissionRecord(seed=4, click_times=np.array([]), duration=3.0, pulse_count=2, first_pulse=8,
                       trajectory_index=2),
    ]
    restored = read_records(write_records(tmp_path / "records.txt", records))
    assert [r.first_pulse for r in restored] == [6, 8]
    np.testing.assert_array_equal(restored[0].click_times, records[0].click_times)
    assert restored[1].click_count == 0


def test_drive_factory(cw_params, reference_pulses):
    assert isinstance(DriveFactory.get_drive(DriveMode.CW, cw_params), ContinuousDrive)
    assert isinstance(DriveFactory.get_drive("pulsed", cw_params, reference_pulses), PulsedDrive)
    with pytest.raises(ValueError):
        DriveFactory.get_drive(DriveMode.PULSED, cw_params)


def test_undriven_trajectory_never_clicks():
    record = run_trajectory(SystemParams(delta=0.0, kappa=1.0), TrajectoryConfig(step_dt=DT, duration=10.0))
    assert record.click_count == 0
    assert record.duration == pytest.approx(10.0)


def test_trajectory_is_deterministic_in_seed(coherent_params):
    config = TrajectoryConfig(step_dt=DT, duration=200.0, seed=3)
    first = run_trajectory(coherent_params, config)
    again = run_trajectory(coherent_params, config)
    other = run_trajectory(coherent_params, TrajectoryConfig(step_dt=DT, duration=200.0, seed=4))
    assert first.click_count > 0
    np.testing.assert_array_equal(first.click_times, again.click_times)
    assert not np.array_equal(first.click_times, other.click_times)


def test_pulsed_trajectory_must_cover_the_train(pulse_params, reference_pulses):
    train = reference_pulses.with_overrides(pulse_count=3)
    with pytest.raises(ValueError, match="cover"):
        run_trajectory(pulse_params, TrajectoryConfig(step_dt=DT, duration=48.0), train)


def _click_rate(records):
    clicks = sum(record.click_count for record in records)
    duration = sum(record.duration for record in records)
    return clicks / duration, math.sqrt(max(clicks, 1)) / duration


def test_click_rate_matches_master_equation(coherent_params):
    config = TrajectoryConfig(step_dt=DT, duration=210.0, warmup=10.0, seed=1, batch_size=64)
    drive = DriveFactory.get_drive(DriveMode.CW, coherent_params)
    rate, error = _click_rate(run_trajectories(drive, config, 64, workers=1))
    expected = coherent_params.kappa * mean_photon_number(coherent_params, config.dim)
    assert abs(rate - expected) < 4 * error


def test_halving_the_step_keeps_the_click_rate(coherent_params):
    drive = DriveFactory.get_drive(DriveMode.CW, coherent_params)
    coarse = TrajectoryConfig(step_dt=DT, duration=110.0, warmup=10.0, seed=2, batch_size=64)
    fine = TrajectoryConfig(step_dt=DT / 2, duration=110.0, warmup=10.0, seed=2, batch_size=64)
    rate, error = _click_rate(run_trajectories(drive, coarse, 64, workers=1))
    half_rate, half_error = _click_rate(run_trajectories(drive, fine, 64, workers=1))
    assert abs(rate - half_rate) < 4 * math.hypot(error, half_error)


def test_results_do_not_depend_on_worker_count(coherent_params):
    drive = DriveFactory.get_drive(DriveMode.CW, coherent_params)
    config = TrajectoryConfig(step_dt=DT, duration=50.0, seed=9, batch_size=4)
    serial = run_trajectories(drive, config, 8, workers=1)
    parallel = run_trajectories(drive, config, 8, workers=2)
    assert [r.trajectory_index for r in parallel] == list(range(8))
    for left, right in zip(serial, parallel):
        np.testing.assert_array_equal(left.click_times, right.click_times)


def test_ensemble_density_of_a_single_trajectory_is_pure():
    config = TrajectoryConfig(step_dt=DT, duration=10.0)
    (rho,) = ensemble_density(SystemParams(delta=0.0, kappa=1.0), config, 1, [5.0])
    np.testing.assert_allclose(rho.elements, np.outer(fock_state(config.dim, 0).amplitudes, fock_state(config.dim, 0).amplitudes))


def test_ensemble_photon_number_of_coherent_drive(coherent_params):
    config = TrajectoryConfig(step_dt=DT, duration=30.0, seed=6)
    means, errors = ensemble_photon_number(coherent_params, config, 16, [0.0, 20.0])
    assert means[0] == pytest.approx(0.0, abs=1e-15)
    assert means[1] == pytest.approx(mean_photon_number(coherent_params, config.dim), rel=2e-2)
    assert errors.shape == (2,)


def test_plan_pulse_blocks_groups_equal_lengths():
    config = TrajectoryConfig(step_dt=DT, duration=1.0, pulses_per_block=4, batch_size=2)
    tasks = plan_pulse_blocks(10, config)
    assert [(t.pulse_count, t.block_indices, t.first_pulses) for t in tasks] == [(4, [0, 1], [0, 4]), (2, [2], [8])]


def test_pulse_train_blocks(pulse_params):
    train = PulseTrain(amplitude_E0=0.2, width_dt=2.0, period=24.0, pulse_count=10)
    config = TrajectoryConfig(step_dt=DT, duration=1.0, seed=5, pulses_per_block=4, batch_size=1)
    records = run_pulse_train(pulse_params, train, config, workers=1)
    assert [r.first_pulse for r in records] == [0, 4, 8]
    assert [r.pulse_count for r in records] == [4, 4, 2]
    assert [r.duration for r in records] == pytest.approx([96.0, 96.0, 48.0])

    parallel = run_pulse_train(pulse_params, train, config, workers=2)
    for left, right in zip(records, parallel):
        np.testing.assert_array_equal(left.click_times, right.click_times)


def test_pulse_train_rejects_empty_train(pulse_params, reference_pulses):
    with pytest.raises(ValueError):
        run_pulse_train(pulse_params, reference_pulses, TrajectoryConfig(step_dt=DT, duration=1.0), pulse_count=0)


def test_step_violation_reports_the_pulse(pulse_params, reference_pulses):
    drive = PulsedDrive(pulse_params, reference_pulses)
    config = TrajectoryConfig(step_dt=DT, duration=1.0, max_jump_prob=1e-6)
    with pytest.raises(StepSizeViolationError) as excinfo:
        _run_pulse_blocks(drive, config, _BlockTask(pulse_count=1, block_indices=[3], first_pulses=[7]))
    assert excinfo.value.pulse_index == 7
    assert excinfo.value.trajectory_index == 3
    assert 0 < excinfo.value.time < reference_pulses.period


@pytest.mark.parametrize("pulsed", [False, True])
def test_lane_integrator_matches_single_steps(coherent_params, pulse_params, pulsed):
    if pulsed:
        params = pulse_params
        drive = PulsedDrive(params, PulseTrain(amplitude_E0=0.2, width_dt=2.0, pulse_count=3, period=24.0))
        duration = 72.0
    else:
        params = coherent_params
        drive = ContinuousDrive(params)
        duration = 60.0
    trajectory = TrajectoryConfig(step_dt=DT, duration=duration, seed=17, dim=8)
    total = trajectory.step_count
    lane_clicks, samples = LaneIntegrator(drive, trajectory).run([0], sample_steps=[total])

    generator = np.random.Generator(np.random.PCG64(np.random.SeedSequence([17, 0])))
    chunk = LaneIntegrator.CHUNK_STEPS
    randoms = np.concatenate([generator.random(min(chunk, total - start)) for start in range(0, total, chunk)])
    bare, drive_term, parametric = hamiltonian_terms(8, params.delta, params.theta)
    state = fock_state(8, 0)
    clicks = []
    for step in range(total):
        (e_value,), (u_value,) = drive.envelopes(np.array([(step + 0.5) * DT]))
        H = OperatorMatrix(bare + e_value * drive_term + u_value * parametric)
        state, jumped = mcwf_step(state, effective_hamiltonian(H, params.kappa), DT, randoms[step], time=step * DT)
        if jumped:
            clicks.append((step + 1) * DT)

    assert lane_clicks[0] == pytest.approx(clicks, abs=1e-12)
    np.testing.assert_allclose(samples[total][0], state.amplitudes, atol=1e-10)
    if not pulsed:
        assert len(clicks) > 0
