"""YAML run configuration with strict key checking.

Example::

    seed: 7
    out: results
    actuator: {k_tau: 0.147, k_n: 0.0011, bias: 0.0}
    exo: {layout: hip-knee, mass: 82, alpha: 0.2}
    squat: {reps: 20, payload: 12.5, squat_depth_deg: [80, 100, 100]}
    backdrive: {freqs: [1, 2], amp_p2p_deg: 70}
    grid: {noise_sigma: 0.15}
    step: {tau_target: 30}
    inputs: {trial: [grid.csv], inertia: [backdrive_1hz.csv]}

Relative input paths resolve against the config file's directory.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from .actuator import ActuatorParams
from .benchsim import GRID_SPEEDS_DEG, GRID_TORQUES
from .control import ExoConfig
from .errors import ConfigError, ExokitError
from .squat import SquatSpec


@dataclass(frozen=True)
class BackdriveSection:
    freqs: tuple[float, ...] = (1.0, 2.0)
    amp_p2p_deg: float = 70.0
    duration: float = 10.0
    sample_rate: float = 1000.0
    noise_sigma: float = 0.0


@dataclass(frozen=True)
class GridSection:
    speeds_deg: tuple[float, ...] = GRID_SPEEDS_DEG
    torques: tuple[float, ...] = GRID_TORQUES
    dwell: float = 2.0
    sample_rate: float = 200.0
    noise_sigma: float = 0.0


@dataclass(frozen=True)
class StepSection:
    tau_target: float = 30.0
    duration: float = 4.0
    sample_rate: float = 200.0


@dataclass(frozen=True)
class InputsSection:
    trial: tuple[Path, ...] = ()
    inertia: tuple[Path, ...] = ()


@dataclass
class RunConfig:
    seed: int = 0
    out: Path | None = None
    actuator: ActuatorParams = field(default_factory=ActuatorParams)
    exo: ExoConfig = field(default_factory=ExoConfig)
    squat: SquatSpec = field(default_factory=SquatSpec)
    backdrive: BackdriveSection = field(default_factory=BackdriveSection)
    grid: GridSection = field(default_factory=GridSection)
    step: StepSection = field(default_factory=StepSection)
    inputs: InputsSection = field(default_factory=InputsSection)


def _build(cls, data, section: str, rename: dict | None = None):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise ConfigError(f"section '{section}' must be a mapping")
    rename = rename or {}
    allowed = {f.name for f in dataclasses.fields(cls)} | set(rename)
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown key(s) in '{section}': {', '.join(unknown)}")
    kwargs = {}
    for key, value in data.items():
        key, value = rename[key](value) if key in rename else (key, value)
        if isinstance(value, list):
            value = tuple(value)
        kwargs[key] = value
    try:
        return cls(**kwargs)
    except ExokitError as exc:
        raise ConfigError(f"section '{section}': {exc}") from None
    except TypeError as exc:
        raise ConfigError(f"section '{section}': {exc}") from None


def _depth(value):
    return "squat_depth", tuple(np.deg2rad(np.asarray(value, dtype=float)))


def parse_config(data: dict, base_dir: Path = Path(".")) -> RunConfig:
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError("config document must be a mapping")
    allowed = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = sorted(set(data) - allowed)
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {', '.join(unknown)}")
    seed = data.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool) or not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    inputs = _build(InputsSection, data.get("inputs"), "inputs")
    resolved = {}
    for name in ("trial", "inertia"):
        paths = []
        for p in getattr(inputs, name):
            path = Path(p)
            path = path if path.is_absolute() else base_dir / path
            if not path.exists():
                raise ConfigError(f"inputs.{name}: path does not exist: {path}")
            paths.append(path)
        resolved[name] = tuple(paths)
    out = data.get("out")
    return RunConfig(
        seed=seed,
        out=None if out is None else Path(out),
        actuator=_build(ActuatorParams, data.get("actuator"), "actuator"),
        exo=_build(ExoConfig, data.get("exo"), "exo"),
        squat=_build(SquatSpec, data.get("squat"), "squat", {"squat_depth_deg": _depth}),
        backdrive=_build(BackdriveSection, data.get("backdrive"), "backdrive"),
        grid=_build(GridSection, data.get("grid"), "grid"),
        step=_build(StepSection, data.get("step"), "step"),
        inputs=InputsSection(**resolved),
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        data = yaml.safe_load(path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"config file is not valid YAML: {exc}") from None
    return parse_config(data, path.parent)
