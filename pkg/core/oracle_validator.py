from dataclasses import asdict, dataclass, field, replace
from typing import Any, Dict, List, Optional, Sequence
import logging
import math
import time

import numpy as np

import config
from core.experiment_config import ExperimentConfig
from core.experiment_runner import RunResult, three_sigma_failures
from services.errors import ConfigError, OracleViolationError, SimulationError, TruncationNotConvergedError
from services.fock import Observable, truncation_scan, validate_density_matrix
from services.hbt import build_histogram, g2_estimate, poisson_click_stream
from services.lindblad import (
    binned_g2,
    build_liouvillian,
    g2_delay,
    mean_photon_number,
    steady_state,
)
from services.mcwf import DriveFactory, DriveMode, ensemble_photon_number, run_trajectories
from services.model import build_hamiltonian
from services.reporting import RunReportFormatter
from services.storage import ResultWriter

logger = logging.getLogger(__name__)

# rate * bin_width << 1 keeps bin counts close to Poisson
POISSON_RATE = 0.02
POISSON_DURATION = 2.0e7
POISSON_BIN_WIDTH = 0.5
POISSON_MAX_DELAY = 20.0
TRUNCATION_TOLERANCE = 1e-6
LONG_DELAY_LIFETIMES = 40.0


@dataclass
class OracleCheck:
    name: str
    passed: bool
    value: Optional[float] = None
    reference: Optional[float] = None
    tolerance: Optional[float] = None
    detail: str = ""


@dataclass
class OracleReport:
    checks: List[OracleCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def failures(self) -> List[Dict[str, Any]]:
        return [asdict(check) for check in self.checks if not check.passed]

    def add(self, check: OracleCheck) -> None:
        level = logging.INFO if check.passed else logging.ERROR
        logger.log(level, f"Oracle {check.name}: {'pass' if check.passed else 'FAIL'} {check.detail}")
        self.checks.append(check)


def truncation_dims(dim: int) -> List[int]:
    """Dimensions scanned around the configured truncation"""
    return sorted({max(3, dim - 4), max(3, dim - 2), dim, dim + 2, dim + 4})


class OracleValidator:
    """
    Cross-module consistency checks: trajectories against the master equation,
    the coincidence estimator against a Poisson stream, and numerical convergence
    """

    def __init__(self, experiment: ExperimentConfig, workers: Optional[int] = None):
        self.experiment = experiment
        self.workers = workers or experiment.workers
        self.params = experiment.system_params()
        if self.params.drive_E == 0 and self.params.parametric_U == 0:
            raise ConfigError("Oracle validation needs a driven model (drive_E or parametric_U)", key="model")
        if experiment.mode != "cw":
            logger.info("Validating the model section as a continuous-wave system")
        self.dim = experiment.trajectory.dim

    def _trajectory_config(self):
        return self.experiment.trajectory_config(kappa=self.params.kappa, continuous=True)

    def check_steady_state(self, report: OracleReport) -> None:
        rho = steady_state(build_liouvillian(build_hamiltonian(self.params, self.dim), self.params.kappa))
        try:
            validate_density_matrix(rho)
            report.add(OracleCheck("steady_state_physical", True, detail="Hermitian, unit trace, positive"))
        except SimulationError as e:
            report.add(OracleCheck("steady_state_physical", False, detail=str(e)))

        tau = LONG_DELAY_LIFETIMES / self.params.kappa
        (_, late), = g2_delay(self.params, [tau], self.dim)
        report.add(OracleCheck(
            "long_delay_g2",
            abs(late - 1.0) < config.TOLERANCES.long_delay_g2,
            value=late,
            reference=1.0,
            tolerance=config.TOLERANCES.long_delay_g2,
            detail=f"g2({tau:g} ns) = {late:.6f}",
        ))

    def check_truncation(self, report: OracleReport) -> None:
        dims = truncation_dims(self.dim)
        try:
            result = truncation_scan(self.params, Observable.MEAN_PHOTON_NUMBER, dims, TRUNCATION_TOLERANCE)
            report.add(OracleCheck(
                "truncation_convergence",
                result.converged_dim <= self.dim,
                value=float(result.converged_dim),
                reference=float(self.dim),
                tolerance=TRUNCATION_TOLERANCE,
                detail=f"<n> converged at D={result.converged_dim}",
            ))
        except TruncationNotConvergedError as e:
            report.add(OracleCheck("truncation_convergence", False, detail=str(e)))

    def check_poisson_flatness(self, report: OracleReport) -> None:
        record = poisson_click_stream(POISSON_RATE, POISSON_DURATION, seed=self.experiment.trajectory.seed)
        histogram = build_histogram([record], POISSON_BIN_WIDTH, POISSON_MAX_DELAY)
        points = g2_estimate(histogram)
        deviations = np.array([(p.g2 - 1.0) / p.error for p in points])
        beyond, allowed = three_sigma_failures(deviations)
        report.add(OracleCheck(
            "poisson_flatness",
            beyond <= allowed,
            value=float(np.mean([p.g2 for p in points])),
            reference=1.0,
            detail=f"{beyond} of {deviations.size} bins beyond 3 sigma",
        ))

    def check_ensemble_mean(self, report: OracleReport) -> None:
        trajectory = self._trajectory_config()
        sample_time = 20.0 / self.params.kappa
        means, errors = ensemble_photon_number(
            self.params, trajectory, self.experiment.trajectory.n_trajectories, [sample_time]
        )
        reference = mean_photon_number(self.params, self.dim)
        error = max(float(errors[0]), 1e-15)
        report.add(OracleCheck(
            "ensemble_mean_photons",
            abs(means[0] - reference) <= 3 * error,
            value=float(means[0]),
            reference=reference,
            tolerance=3 * error,
            detail=f"<n>(t={sample_time:g}) = {means[0]:.5g} +- {error:.2g}, master equation {reference:.5g}",
        ))

    def _click_rate(self, step_dt: Optional[float] = None):
        trajectory = self._trajectory_config()
        if step_dt is not None:
            trajectory = replace(trajectory, step_dt=step_dt)
        drive = DriveFactory.get_drive(DriveMode.CW, self.params)
        records = run_trajectories(drive, trajectory, self.experiment.trajectory.n_trajectories, self.workers)
        clicks = sum(record.click_count for record in records)
        duration = sum(record.duration for record in records)
        return records, clicks / duration, math.sqrt(max(clicks, 1)) / duration

    def check_trajectory_statistics(self, report: OracleReport) -> None:
        records, rate, rate_error = self._click_rate()
        expected = self.params.kappa * mean_photon_number(self.params, self.dim)
        report.add(OracleCheck(
            "click_rate",
            abs(rate - expected) <= 3 * rate_error,
            value=rate,
            reference=expected,
            tolerance=3 * rate_error,
            detail=f"click rate {rate:.5g}/ns, kappa <n> = {expected:.5g}/ns",
        ))

        histogram = build_histogram(records, self.experiment.bin_width(), self.experiment.tau_max())
        points = g2_estimate(histogram)
        reference = np.array(binned_g2(self.params, histogram.bin_edges(), self.dim))
        deviations = np.array([(p.g2 - ref) / p.error for p, ref in zip(points, reference)])
        beyond, allowed = three_sigma_failures(deviations)
        report.add(OracleCheck(
            "trajectory_g2_vs_regression",
            beyond <= allowed,
            value=float(beyond),
            reference=float(allowed),
            detail=f"{beyond} of {deviations.size} bins beyond 3 sigma",
        ))

        _, half_rate, half_error = self._click_rate(step_dt=self._trajectory_config().step_dt / 2)
        combined = math.hypot(rate_error, half_error)
        report.add(OracleCheck(
            "step_halving",
            abs(rate - half_rate) <= 3 * combined,
            value=half_rate,
            reference=rate,
            tolerance=3 * combined,
            detail=f"click rate {rate:.5g} vs {half_rate:.5g} at half step",
        ))

    def validate(self) -> OracleReport:
        report = OracleReport()
        self.check_steady_state(report)
        self.check_truncation(report)
        self.check_poisson_flatness(report)
        self.check_ensemble_mean(report)
        self.check_trajectory_statistics(report)
        return report


def _report_rows(report: OracleReport) -> List[List[Any]]:
    return [
        [check.name, "pass" if check.passed else "fail", check.value, check.reference, check.tolerance, check.detail]
        for check in report.checks
    ]


def validate(experiment: ExperimentConfig, output_dir: Optional[str] = None, workers: Optional[int] = None) -> RunResult:
    """
    Run the oracle suite and write validate.csv

    Raises:
        OracleViolationError: Listing every failed check, after the report is written
    """
    started = time.perf_counter()
    report = OracleValidator(experiment, workers).validate()
    writer = ResultWriter(output_dir or experiment.output.directory, experiment.resolved(), label=experiment.label,
                          timestamped=experiment.output.timestamped)
    writer.write_table("validate.csv", ["check", "status", "value", "reference", "tolerance", "detail"],
                       _report_rows(report))
    metrics = {check.name: check.passed for check in report.checks}
    writer.write_metrics({"passed": report.passed, "checks": [asdict(check) for check in report.checks]})
    wall_time = time.perf_counter() - started
    writer.write_text("summary.txt", RunReportFormatter.format_run_report(
        "validate", experiment.label, metrics, files=list(writer.files), wall_time=wall_time) + "\n")
    writer.write_manifest({"experiment": "validate", "seed": experiment.trajectory.seed,
                           "dim": experiment.trajectory.dim, "wall_time": round(wall_time, 3)})
    if not report.passed:
        raise OracleViolationError(f"{len(report.failures)} oracle check(s) failed", report.failures)
    return RunResult("validate", writer.run_dir, list(writer.files), metrics, wall_time)


def scan_truncation(
    experiment: ExperimentConfig,
    dims: Optional[Sequence[int]] = None,
    tol: float = TRUNCATION_TOLERANCE,
    output_dir: Optional[str] = None,
) -> RunResult:
    """
    Truncation scan of <n> and g2(0) around the configured dimension

    Raises:
        TruncationNotConvergedError: If either observable fails to converge
    """
    started = time.perf_counter()
    params = experiment.system_params()
    dims = list(dims) if dims is not None else truncation_dims(experiment.trajectory.dim)
    writer = ResultWriter(output_dir or experiment.output.directory, experiment.resolved(), label=experiment.label,
                          timestamped=experiment.output.timestamped)
    rows, metrics = [], {}
    for observable in Observable:
        try:
            result = truncation_scan(params, observable, dims, tol)
        except TruncationNotConvergedError as e:
            writer.write_table(f"truncation_{observable.value}.csv", ["dim", "value"], e.table)
            raise
        writer.write_table(f"truncation_{observable.value}.csv", ["dim", "value"], result.table)
        rows.append([observable.value, result.converged_dim, result.value])
        metrics[observable.value] = {"converged_dim": result.converged_dim, "value": result.value}
    writer.write_table("truncation_scan.csv", ["observable", "converged_dim", "value"], rows)
    writer.write_metrics(metrics)
    wall_time = time.perf_counter() - started
    writer.write_manifest({"experiment": "scan-truncation", "dims": dims, "tolerance": tol,
                           "wall_time": round(wall_time, 3)})
    return RunResult("scan-truncation", writer.run_dir, list(writer.files), metrics, wall_time)
