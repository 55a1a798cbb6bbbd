import math
from pathlib import Path
from typing import Any, Callable, Dict

import pytest
import yaml

from services.model import PulseTrain, SystemParams


@pytest.fixture
def cw_params() -> SystemParams:
    """Continuous-wave optimum at zero detuning: E = 50 MHz, U = 5 MHz, kappa = 1 rad/ns"""
    return SystemParams(delta=0.0, kappa=1.0, drive_E=0.05, parametric_U=0.005, theta=math.pi / 2)


@pytest.fixture
def coherent_params() -> SystemParams:
    """Plain coherent drive: steady state is a coherent state with <n> = (2E/kappa)^2"""
    return SystemParams(delta=0.0, kappa=1.0, drive_E=0.3, parametric_U=0.0, theta=0.0)


@pytest.fixture
def reference_pulses() -> PulseTrain:
    return PulseTrain(amplitude_E0=0.05, width_dt=2.0, pulse_count=1, period=24.0)


@pytest.fixture
def write_config(tmp_path: Path) -> Callable[[Dict[str, Any]], Path]:
    """Dump a configuration mapping to YAML, pointing its output into tmp_path"""

    def write(data: Dict[str, Any], name: str = "experiment.yaml") -> Path:
        data = dict(data)
        data.setdefault("output", {"directory": str(tmp_path / "out")})
        path = tmp_path / name
        path.write_text(yaml.safe_dump(data), encoding="utf-8")
        return path

    return write


@pytest.fixture
def cw_config_data(tmp_path: Path) -> Dict[str, Any]:
    return {
        "mode": "cw",
        "label": "cw_test",
        "model": {"delta": 0.0, "kappa": 1.0, "drive_E": 0.05, "parametric_U": 0.005},
        "cw": {"tau_max": 5.0, "tau_step": 0.1},
        "output": {"directory": str(tmp_path / "cw_out")},
    }


@pytest.fixture
def pulsed_config_data(tmp_path: Path) -> Dict[str, Any]:
    """Short, strongly driven train so a handful of pulses yields clicks"""
    return {
        "mode": "pulsed",
        "label": "pulsed_test",
        "model": {"delta": 0.0, "kappa": 1.0},
        "pulses": {"amplitude_E0": 0.2, "width_dt": 2.0, "period": 24.0, "pulse_count": 20},
        "trajectory": {"seed": 5, "pulses_per_block": 5, "batch_size": 1},
        "output": {"directory": str(tmp_path / "pulsed_out")},
    }
