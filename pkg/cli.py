"""
Command-line entry point.

    python cli.py pulsed --config configs/reference_pulsed.yaml --workers 8 --out results/pulsed

Exit codes: 0 success, 2 configuration error, 3 numerical failure, 4 oracle violation.
"""
from typing import Any, Dict, List, Optional
import argparse
import json
import logging
import sys

import config
from core.experiment_config import ExperimentConfig, load_config
from core.experiment_runner import ExperimentRunner, RunResult
from core.oracle_validator import scan_truncation, validate
from services.errors import ConfigError, OracleViolationError, SimulationError

logging.basicConfig(level=config.LOG_LEVEL, format=config.LOG_FORMAT)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_ORACLE = 4

COMMANDS = ["g2tau", "pulsed", "sweep", "validate", "scan-truncation"]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Pulsed single-photon source simulator (frequencies in rad/ns, times in ns)"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    helps = {
        "g2tau": "CW g2(tau) by quantum regression, optionally against trajectories",
        "pulsed": "Pulsed trajectory run: histogram, g2(0), brightness",
        "sweep": "Pulsed experiment repeated over one parameter axis",
        "validate": "Cross-module oracle suite",
        "scan-truncation": "Fock truncation convergence scan",
    }
    for command in COMMANDS:
        sub = subparsers.add_parser(command, help=helps[command])
        sub.add_argument("--config", required=True, help="YAML experiment configuration")
        sub.add_argument("--seed", type=int, default=None, help="Master seed (overrides trajectory.seed)")
        sub.add_argument("--workers", type=int, default=None,
                         help=f"joblib workers (default from SPS_WORKERS, currently {config.DEFAULT_WORKERS})")
        sub.add_argument("--out", default=None, help="Output directory (overrides output.directory)")
        sub.add_argument("--pulses", type=int, default=None, help="Total pulse count (overrides pulses.pulse_count)")
        sub.add_argument("--full", action="store_true",
                         help=f"Use the full {config.FULL_PULSE_COUNT:,} pulses instead of the desk-scale default")
        if command == "scan-truncation":
            sub.add_argument("--dims", type=int, nargs="+", default=None, help="Fock dimensions to scan")
            sub.add_argument("--tol", type=float, default=1e-6, help="Agreement between neighbouring dimensions")
    return parser


def config_overrides(args: argparse.Namespace) -> Dict[str, Any]:
    pulses = args.pulses
    if args.full and pulses is None:
        pulses = config.FULL_PULSE_COUNT
    return {
        "trajectory.seed": args.seed,
        "workers": args.workers,
        "output.directory": args.out,
        "pulses.pulse_count": pulses,
    }


def run_command(args: argparse.Namespace, experiment: ExperimentConfig) -> RunResult:
    command = args.command
    if command == "g2tau":
        if experiment.mode != "cw":
            raise ConfigError("g2tau needs a cw configuration", key="mode")
        return ExperimentRunner(experiment).run_cw_experiment()
    if command == "pulsed":
        if experiment.mode != "pulsed":
            raise ConfigError("pulsed needs a pulsed configuration", key="mode")
        return ExperimentRunner(experiment).run_pulsed_experiment()
    if command == "sweep":
        if experiment.sweep is None:
            raise ConfigError("sweep needs a sweep section", key="sweep")
        return ExperimentRunner(experiment).run_sweep()
    if command == "validate":
        return validate(experiment)
    return scan_truncation(experiment, dims=args.dims, tol=args.tol)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        experiment = load_config(args.config, config_overrides(args))
        result = run_command(args, experiment)
        print(json.dumps(result.to_dict(), indent=2, default=str))
        return EXIT_OK
    except ConfigError as e:
        logger.error(f"Configuration error{f' at {e.key}' if e.key else ''}: {str(e)}")
        return EXIT_CONFIG
    except OracleViolationError as e:
        logger.error(f"Oracle violation: {str(e)}")
        for failure in e.failures:
            logger.error(f"  {failure}")
        return EXIT_ORACLE
    except (SimulationError, ValueError) as e:
        logger.error(f"Numerical failure in {args.command}: {str(e)}")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
