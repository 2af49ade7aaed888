"""Deterministic benchtop trials: dynamic backdrive, torque/speed grid, step test."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .actuator import ActuatorParams, backdrive_torque, current_for_torque, predict_torque
from .errors import ConfigError, UnachievableTorqueError
from .trial import TrialLog

log = logging.getLogger(__name__)

GRID_SPEEDS_DEG = (0.0, 1.0, 3.0, 10.0, 30.0, 100.0, 300.0)
GRID_TORQUES = (0.0, 1.0, 3.0, 5.0, 9.0, 25.0)


def make_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def _noise(rng, sigma: float, n: int) -> np.ndarray:
    if sigma < 0:
        raise ConfigError("noise sigma must be >= 0")
    if sigma == 0:
        return np.zeros(n)
    return rng.normal(0.0, sigma, n)


@dataclass(frozen=True)
class SineBackdriveSpec:
    freq: float = 1.0  # Hz
    amplitude: float = np.deg2rad(35.0)  # rad, half of peak-to-peak
    duration: float = 10.0  # s
    sample_rate: float = 1000.0  # Hz

    def __post_init__(self):
        if not self.freq > 0:
            raise ConfigError("freq must be > 0")
        if not self.amplitude > 0:
            raise ConfigError("amplitude must be > 0")
        if not self.duration > 0:
            raise ConfigError("duration must be > 0")
        if not self.sample_rate > 20 * self.freq:
            raise ConfigError("sample_rate must exceed 20x the sine frequency")


def simulate_backdrive(
    spec: SineBackdriveSpec, params: ActuatorParams, noise_sigma: float = 0.0, seed=0
) -> TrialLog:
    """Unpowered output driven along a sine; the load cell reads the actuator's reaction.

    Sign follows the torque model: the sensor sees ``b - (J*accel + f_C*sgn(omega))``.
    """
    n = int(round(spec.duration * spec.sample_rate)) + 1
    t = np.arange(n) / spec.sample_rate
    w = 2 * np.pi * spec.freq
    theta = spec.amplitude * np.sin(w * t)
    omega = spec.amplitude * w * np.cos(w * t)
    accel = -spec.amplitude * w * w * np.sin(w * t)
    tau = params.bias - backdrive_torque(params, omega, accel)
    tau = tau + _noise(make_rng(seed), noise_sigma, n)
    return TrialLog(t=t, i_q=np.zeros(n), theta=theta, omega=omega, tau_meas=tau)


def _delivered(params: ActuatorParams) -> ActuatorParams:
    # commands target delivered torque; the load-cell bias only shows up in tau_meas
    return params.with_(bias=0.0)


class GridRun(NamedTuple):
    log: TrialLog
    skipped: list[tuple[float, float]]  # (speed deg/s, torque Nm) pairs
    segments: list[tuple[float, float, float]]  # (speed deg/s, torque Nm, current A)


def _signed(values: Sequence[float]) -> list[float]:
    out = []
    for v in values:
        for s in (1.0, -1.0):
            x = s * abs(float(v))
            if x not in out:
                out.append(x)
    return out


def simulate_grid(
    params: ActuatorParams,
    speeds: Sequence[float] = GRID_SPEEDS_DEG,
    torques: Sequence[float] = GRID_TORQUES,
    dwell: float = 2.0,
    sample_rate: float = 200.0,
    noise_sigma: float = 0.0,
    seed=0,
) -> GridRun:
    """Constant speed/torque segments over every signed (speed, torque) pair.

    Speeds are in deg/s. The current for each segment comes from inverting
    the model at that speed; pairs needing more than the rated current are
    skipped and listed.
    """
    if not len(speeds) or not len(torques):
        raise ConfigError("speed and torque lists must be non-empty")
    if not dwell > 0 or not sample_rate > 0:
        raise ConfigError("dwell and sample_rate must be > 0")
    per_seg = max(int(round(dwell * sample_rate)), 1)
    drive = _delivered(params)
    omegas, currents, segments, skipped = [], [], [], []
    for speed in _signed(speeds):
        w = np.deg2rad(speed)
        for torque in _signed(torques):
            try:
                i = current_for_torque(drive, torque, w)
            except UnachievableTorqueError as exc:
                log.info("grid point (%g deg/s, %g Nm) skipped: %s", speed, torque, exc)
                skipped.append((speed, torque))
                continue
            segments.append((speed, torque, i))
            omegas.append(np.full(per_seg, w))
            currents.append(np.full(per_seg, i))
    if not segments:
        raise ConfigError("every grid point was unachievable")
    omega = np.concatenate(omegas)
    i_q = np.concatenate(currents)
    n = len(omega)
    t = np.arange(n) / sample_rate
    theta = np.concatenate([[0.0], np.cumsum(omega[:-1]) / sample_rate])
    tau = predict_torque(params, i_q, omega) + _noise(make_rng(seed), noise_sigma, n)
    return GridRun(TrialLog(t=t, i_q=i_q, theta=theta, omega=omega, tau_meas=tau), skipped, segments)


def simulate_step(
    params: ActuatorParams, tau_target: float, duration: float = 4.0, sample_rate: float = 200.0
) -> TrialLog:
    """Locked-output torque step from zero to ``tau_target`` at ``duration/2``."""
    if not duration > 0 or not sample_rate > 0:
        raise ConfigError("duration and sample_rate must be > 0")
    i_on = current_for_torque(_delivered(params), tau_target, 0.0)
    n = int(round(duration * sample_rate)) + 1
    t = np.arange(n) / sample_rate
    i_q = np.where(t >= duration / 2, i_on, 0.0)
    omega = np.zeros(n)
    tau = predict_torque(params, i_q, omega)
    return TrialLog(t=t, i_q=i_q, theta=np.zeros(n), omega=omega, tau_meas=tau)
