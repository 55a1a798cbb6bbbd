from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Set, Union
import logging
import math

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

import config
from services.errors import ConfigError
from services.mcwf.emission_record import TrajectoryConfig
from services.model.cavity_model import effective_pump_params, optimal_parametric_gain
from services.model.system_params import PulseTrain, PumpParams, SystemParams

logger = logging.getLogger(__name__)

# Sweep axis name -> config section holding it
SWEEP_AXES: Dict[str, str] = {
    "width_dt": "pulses",
    "amplitude_E0": "pulses",
    "period": "pulses",
    "delta": "model",
    "kappa": "model",
}

CW_WARMUP_LIFETIMES = 10.0
CW_BIN_LIFETIMES = 0.2
PULSED_BIN_WIDTH = 0.5
PULSED_MAX_DELAY_PERIODS = 2.0


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PumpSection(_Section):
    pump_F: float
    chi: float
    gamma: float
    theta0: float = 0.0


class ModelSection(_Section):
    """Frequencies in rad/ns"""
    delta: float = 0.0
    kappa: float = 1.0
    drive_E: float = 0.0
    parametric_U: Optional[float] = None
    theta: Optional[float] = None
    optimize_drive: bool = False
    pump: Optional[PumpSection] = None

    @model_validator(mode="after")
    def _check_gain_source(self):
        if self.pump is not None and (self.parametric_U is not None or self.theta is not None):
            raise ValueError("parametric_U and theta are derived from pump; do not set them as well")
        if self.pump is not None and self.optimize_drive:
            raise ValueError("optimize_drive and pump are mutually exclusive")
        return self


class PulsesSection(_Section):
    """Times in ns, amplitude in rad/ns"""
    amplitude_E0: float
    width_dt: float
    period: Optional[float] = None
    pulse_count: int = config.DESK_PULSE_COUNT
    center_t0: Optional[float] = None


class TrajectorySection(_Section):
    step_dt: Optional[float] = None
    duration: Optional[float] = None
    seed: int = Field(default=0, ge=0)
    dim: int = Field(default=config.DEFAULT_FOCK_DIM, ge=3)
    max_jump_prob: float = config.TOLERANCES.max_jump_prob
    warmup: Optional[float] = None
    batch_size: int = Field(default=config.DEFAULT_BATCH_SIZE, ge=1)
    pulses_per_block: int = Field(default=config.DEFAULT_PULSES_PER_BLOCK, ge=1)
    n_trajectories: int = Field(default=2000, ge=1)


class AnalysisSection(_Section):
    bin_width: Optional[float] = Field(default=None, gt=0)
    max_delay: Optional[float] = Field(default=None, gt=0)
    trajectory_estimator: bool = False


class CwSection(_Section):
    detunings: Optional[List[float]] = None
    tau_max: Optional[float] = Field(default=None, gt=0)
    tau_step: float = Field(default=0.05, gt=0)


class SweepSection(_Section):
    parameter: str
    values: List[float] = Field(min_length=1)


class OutputSection(_Section):
    directory: str = config.DEFAULT_OUTPUT_DIR
    format: Literal["csv"] = "csv"
    timestamped: bool = False


class ExperimentConfig(_Section):
    """
    Validated experiment description

    mode selects continuous-wave or pulsed excitation; a sweep re-runs the pulsed
    experiment for every value of one pulse or model parameter.
    """
    mode: Literal["cw", "pulsed"]
    label: str = "run"
    workers: int = Field(default=config.DEFAULT_WORKERS, ge=1)
    model: ModelSection = Field(default_factory=ModelSection)
    pulses: Optional[PulsesSection] = None
    trajectory: TrajectorySection = Field(default_factory=TrajectorySection)
    analysis: AnalysisSection = Field(default_factory=AnalysisSection)
    cw: Optional[CwSection] = None
    sweep: Optional[SweepSection] = None
    output: OutputSection = Field(default_factory=OutputSection)
    # Echo written by resolved(); read back but never used as input
    derived: Optional[Dict[str, float]] = None

    @model_validator(mode="after")
    def _check_mode(self):
        if self.mode == "pulsed" and self.pulses is None:
            raise ValueError("pulsed mode requires a pulses section")
        if self.mode == "cw" and self.pulses is not None:
            raise ValueError("cw mode does not take a pulses section")
        if self.mode == "pulsed" and self.cw is not None:
            raise ValueError("the cw section only applies to cw mode")
        if self.sweep is not None and self.mode != "pulsed":
            raise ValueError("sweeps run pulsed experiments; set mode: pulsed")
        return self

    # Domain objects

    @property
    def kappa(self) -> float:
        return self.model.kappa

    @property
    def detunings(self) -> List[float]:
        if self.cw is not None and self.cw.detunings:
            return list(self.cw.detunings)
        return [self.model.delta]

    def system_params(self, delta: Optional[float] = None, **overrides: float) -> SystemParams:
        """
        Model parameters at one detuning

        The gain and phase come from the pump section when present, from the optimum
        condition at the configured drive when optimize_drive is set, otherwise from
        the explicit values (theta defaults to the optimum phase).
        """
        section = self.model
        delta = section.delta if delta is None else delta
        kappa = overrides.get("kappa", section.kappa)
        delta = overrides.get("delta", delta)
        drive = section.drive_E
        if section.pump is not None:
            pump = PumpParams(**section.pump.model_dump())
            gain, theta = effective_pump_params(pump, delta)
        elif section.optimize_drive:
            gain, theta = optimal_parametric_gain(drive, delta, kappa)
        else:
            gain = section.parametric_U or 0.0
            theta = section.theta if section.theta is not None else math.atan2(kappa, 2 * delta)
        return SystemParams(delta=delta, kappa=kappa, drive_E=drive, parametric_U=gain, theta=theta)

    def pulse_train(self, pulse_count: Optional[int] = None, **overrides: float) -> PulseTrain:
        """Pulse train with optional sweep overrides; an unset period follows the width"""
        if self.pulses is None:
            raise ConfigError("No pulses section in a cw configuration", key="pulses")
        fields = self.pulses.model_dump()
        fields.update({key: value for key, value in overrides.items() if key in fields})
        if pulse_count is not None:
            fields["pulse_count"] = int(pulse_count)
        return PulseTrain(**fields)

    def step_dt(self, kappa: Optional[float] = None) -> float:
        kappa = self.kappa if kappa is None else kappa
        return self.trajectory.step_dt or TrajectoryConfig.default_step(kappa)

    def trajectory_config(
        self,
        duration: Optional[float] = None,
        kappa: Optional[float] = None,
        continuous: Optional[bool] = None,
    ) -> TrajectoryConfig:
        """Trajectory settings; continuous overrides the mode (CW runs get a warmup)"""
        section = self.trajectory
        kappa = self.kappa if kappa is None else kappa
        continuous = self.mode == "cw" if continuous is None else continuous
        if continuous:
            warmup = section.warmup if section.warmup is not None else CW_WARMUP_LIFETIMES / kappa
            duration = duration or section.duration or (500.0 / kappa + warmup)
        else:
            warmup = 0.0
            duration = duration or section.duration or self.pulse_train().duration()
        return TrajectoryConfig(
            step_dt=self.step_dt(kappa),
            duration=duration,
            seed=section.seed,
            dim=section.dim,
            max_jump_prob=section.max_jump_prob,
            warmup=warmup,
            batch_size=section.batch_size,
            pulses_per_block=section.pulses_per_block,
        )

    def bin_width(self) -> float:
        if self.analysis.bin_width is not None:
            return self.analysis.bin_width
        return PULSED_BIN_WIDTH if self.mode == "pulsed" else CW_BIN_LIFETIMES / self.kappa

    def tau_max(self) -> float:
        if self.cw is not None and self.cw.tau_max is not None:
            return self.cw.tau_max
        return 20.0 / self.kappa

    def tau_step(self) -> float:
        return self.cw.tau_step if self.cw is not None else CwSection().tau_step

    def max_delay(self, pulses: Optional[PulseTrain] = None) -> float:
        if self.analysis.max_delay is not None:
            return self.analysis.max_delay
        if self.mode == "pulsed":
            pulses = pulses or self.pulse_train()
            return PULSED_MAX_DELAY_PERIODS * pulses.period
        return self.tau_max()

    def sweep_points(self) -> List[Dict[str, float]]:
        """Override mappings, one per sweep value in axis order"""
        if self.sweep is None:
            return []
        return [{self.sweep.parameter: value} for value in self.sweep.values]

    def peak_parametric_gain(self, pulses: Optional[PulseTrain] = None) -> float:
        """Peak U(t) = E0^2 / sqrt(delta^2 + kappa^2/4) of the pulsed drive"""
        pulses = pulses or self.pulse_train()
        return pulses.amplitude_E0 ** 2 / math.hypot(self.model.delta, self.kappa / 2)

    def varying_axes(self) -> Set[str]:
        """Parameters that take more than one value within this run"""
        axes: Set[str] = set()
        if self.sweep is not None:
            axes.add(self.sweep.parameter)
        if len(self.detunings) > 1:
            axes.add("delta")
        return axes

    def resolved(self) -> Dict[str, Any]:
        """
        Complete configuration with every derived default filled in

        The result parses back with parse_config and re-runs to the same output.
        Defaults that follow a swept or listed parameter (theta with delta, the
        period with the width, the step with kappa) stay unset so every point
        recomputes its own. derived echoes quantities of the base point only.
        """
        data = self.model_dump(mode="json")
        varying = self.varying_axes()
        model = data["model"]
        if self.model.pump is None and not self.model.optimize_drive:
            model["parametric_U"] = self.model.parametric_U or 0.0
            if self.model.theta is None and not varying & {"delta", "kappa"}:
                model["theta"] = self.system_params().theta
        trajectory = data["trajectory"]
        if "kappa" not in varying:
            trajectory["step_dt"] = self.step_dt()
        data["analysis"]["bin_width"] = self.bin_width()

        if self.mode == "pulsed":
            pulses = self.pulse_train()
            derived = {"base_period": pulses.period}
            if not varying & {"width_dt", "period"}:
                data["pulses"].update(period=pulses.period, center_t0=pulses.center_t0)
                data["analysis"]["max_delay"] = self.max_delay(pulses)
            if not varying & {"amplitude_E0", "delta", "kappa"}:
                derived["peak_parametric_U"] = self.peak_parametric_gain(pulses)
            data["derived"] = derived
        else:
            settings = self.trajectory_config()
            trajectory.update(duration=settings.duration, warmup=settings.warmup)
            data["analysis"]["max_delay"] = self.max_delay()
            data["cw"] = {
                "detunings": self.detunings,
                "tau_max": self.tau_max(),
                "tau_step": self.tau_step(),
            }
        return data

    def check_invariants(self) -> None:
        """
        Build every domain object the run will need so violations surface before any work

        Raises:
            ConfigError: Naming the offending key
        """
        if self.sweep is not None and self.sweep.parameter not in SWEEP_AXES:
            raise ConfigError(
                f"sweep.parameter must be one of {sorted(SWEEP_AXES)}, got {self.sweep.parameter!r}",
                key="sweep.parameter",
            )
        points = self.sweep_points() or [{}]
        for overrides in points:
            model_overrides = {k: v for k, v in overrides.items() if SWEEP_AXES.get(k) == "model"}
            kappa = model_overrides.get("kappa", self.kappa)
            _checked("model", lambda: [self.system_params(delta, **model_overrides) for delta in self.detunings])
            pulses = None
            if self.mode == "pulsed":
                pulses = _checked("pulses", lambda: self.pulse_train(**overrides))
                if self.max_delay(pulses) < 1.5 * pulses.period:
                    raise ConfigError(
                        f"analysis.max_delay {self.max_delay(pulses)} ns must cover 1.5 pulse periods "
                        f"({1.5 * pulses.period} ns)",
                        key="analysis.max_delay",
                    )
            trajectory = _checked(
                "trajectory",
                lambda: self.trajectory_config(duration=pulses.duration() if pulses else None, kappa=kappa),
            )
            _checked("trajectory.step_dt", lambda: trajectory.check_step(kappa))


def _checked(key: str, build):
    try:
        return build()
    except ConfigError:
        raise
    except ValueError as e:
        raise ConfigError(f"{key}: {e}", key=key) from e


def parse_config(data: Any) -> ExperimentConfig:
    """
    Validate an already-parsed mapping

    Raises:
        ConfigError: On unknown keys, bad values or violated invariants
    """
    if not isinstance(data, dict):
        raise ConfigError("Configuration must be a mapping at the top level")
    try:
        experiment = ExperimentConfig.model_validate(data)
    except ValidationError as e:
        first = e.errors()[0]
        key = ".".join(str(part) for part in first["loc"]) or None
        raise ConfigError(f"{key or 'config'}: {first['msg']}", key=key) from e
    experiment.check_invariants()
    return experiment


def apply_overrides(data: Dict[str, Any], overrides: Optional[Dict[str, Any]]) -> Dict[str, Any]:
    """
    Set dotted keys (e.g. trajectory.seed) on a raw configuration mapping

    Overrides aimed at a section the configuration does not have are skipped, so
    a pulse-count override leaves a cw configuration untouched.
    """
    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        *sections, key = dotted.split(".")
        target = data
        for section in sections:
            if section != "trajectory" and section != "output" and section not in data:
                logger.warning(f"Ignoring override {dotted}: no {section} section in the configuration")
                target = None
                break
            target = target.setdefault(section, {})
            if not isinstance(target, dict):
                raise ConfigError(f"{section} must be a mapping", key=section)
        if target is not None:
            target[key] = value
    return data


def parse_config_text(text: Union[str, bytes], overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigError(f"Configuration is not valid YAML: {e}") from e
    if isinstance(data, dict):
        data = apply_overrides(data, overrides)
    return parse_config(data)


def load_config(path: Union[str, Path], overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Load and validate a YAML experiment configuration

    Args:
        path: YAML file
        overrides: Optional dotted-key values applied before validation

    Returns:
        ExperimentConfig with every invariant checked

    Raises:
        ConfigError: If the file is missing, does not parse or fails validation
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"Configuration file not found: {path}")
    experiment = parse_config_text(path.read_text(encoding="utf-8"), overrides)
    logger.info(f"Loaded {experiment.mode} configuration '{experiment.label}' from {path}")
    return experiment
