"""
Core package: experiment configuration, orchestration and oracle validation.
"""
from .experiment_config import ExperimentConfig, apply_overrides, load_config, parse_config, parse_config_text
from .experiment_runner import ExperimentRunner, PulsedOutcome, RunResult
from .oracle_validator import OracleCheck, OracleReport, OracleValidator, scan_truncation, validate

__all__ = [
    'ExperimentConfig', 'load_config', 'parse_config', 'parse_config_text', 'apply_overrides',
    'ExperimentRunner', 'RunResult', 'PulsedOutcome',
    'OracleValidator', 'OracleReport', 'OracleCheck', 'validate', 'scan_truncation',
]
