"""Potential-energy-shaping gravity compensation for hip and/or knee modules.

Conventions: joint angles are flexion-positive, the thigh angle is positive
when the thigh tilts forward of the gravity vertical, and assist torques are
extension-positive. Torso angle enters the law as ``theta_t - theta_h``.

World frame for IMU work: x forward, y up, z along the sagittal-plane normal.
"""
from __future__ import annotations

import enum
import logging
import math
import threading
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, InputError, StateError

log = logging.getLogger(__name__)

ORTHONORMAL_TOL = 1e-6
DEGENERATE_DEG = 1.0
THIGH_AXIS_IMU = (0.0, -1.0, 0.0)  # hip-to-knee direction in the IMU frame
SAGITTAL_NORMAL = (0.0, 0.0, 1.0)


class Layout(str, enum.Enum):
    HIP_ONLY = "hip"
    KNEE_ONLY = "knee"
    HIP_KNEE = "hip-knee"

    @property
    def has_hip(self) -> bool:
        return self is not Layout.KNEE_ONLY

    @property
    def has_knee(self) -> bool:
        return self is not Layout.HIP_ONLY


@dataclass(frozen=True)
class ExoConfig:
    layout: Layout = Layout.HIP_KNEE
    mass: float = 82.0  # kg
    alpha: float = 0.2
    l_t: float = 0.4572  # m
    l_h: float = 0.1778  # m, forced to 0 for the knee-only layout
    g: float = 9.81
    tau_ext_max: float = 25.0  # Nm
    tau_flex_max: float = 0.0  # Nm

    def __post_init__(self):
        try:
            layout = Layout(self.layout)
        except ValueError:
            raise ConfigError(
                f"unknown layout {self.layout!r}; expected one of {[m.value for m in Layout]}"
            ) from None
        object.__setattr__(self, "layout", layout)
        if layout is Layout.KNEE_ONLY:
            object.__setattr__(self, "l_h", 0.0)
        if not self.mass > 0:
            raise ConfigError("mass must be > 0")
        if not 0 <= self.alpha <= 1:
            raise ConfigError("alpha must lie in [0, 1]")
        if not self.l_t > 0:
            raise ConfigError("l_t must be > 0")
        if not self.l_h >= 0:
            raise ConfigError("l_h must be >= 0")
        if not self.g > 0:
            raise ConfigError("g must be > 0")
        if not self.tau_ext_max >= 0:
            raise ConfigError("tau_ext_max must be >= 0")
        if not self.tau_flex_max >= 0:
            raise ConfigError("tau_flex_max must be >= 0")


@dataclass(frozen=True)
class PoseSample:
    theta_h: float
    theta_k: float
    R_thigh: np.ndarray = field(default_factory=lambda: np.eye(3))
    t: float = 0.0

    def __post_init__(self):
        R = np.array(self.R_thigh, dtype=float)
        check_rotation(R)
        R.setflags(write=False)
        object.__setattr__(self, "R_thigh", R)
        if not (math.isfinite(self.theta_h) and math.isfinite(self.theta_k)):
            raise InputError("encoder angles must be finite")


@dataclass(frozen=True)
class JointTorques:
    tau_h: float | np.ndarray | None
    tau_k: float | np.ndarray | None


@dataclass(frozen=True)
class CalibrationOffsets:
    theta_h: float = 0.0
    theta_k: float = 0.0
    theta_t: float = 0.0


def check_rotation(R: np.ndarray) -> None:
    if R.shape != (3, 3) or not np.all(np.isfinite(R)):
        raise InputError("rotation must be a finite 3x3 matrix")
    if np.max(np.abs(R.T @ R - np.eye(3))) > ORTHONORMAL_TOL:
        raise InputError("rotation matrix is not orthonormal")
    if abs(np.linalg.det(R) - 1.0) > ORTHONORMAL_TOL:
        raise InputError("rotation matrix is a reflection (det != +1)")


def thigh_angle_from_rotation(R_thigh, thigh_axis=THIGH_AXIS_IMU) -> float:
    """Sagittal-plane thigh angle from the gravity vertical, forward positive."""
    R = np.asarray(R_thigh, dtype=float)
    check_rotation(R)
    d = R @ np.asarray(thigh_axis, dtype=float)
    d = d / np.linalg.norm(d)
    if abs(d[2]) > math.cos(math.radians(DEGENERATE_DEG)):
        raise InputError(
            f"thigh axis within {DEGENERATE_DEG:g} deg of the sagittal normal; angle undefined"
        )
    return math.atan2(d[0], -d[1])


def wrap_angle(x):
    return (np.asarray(x) + np.pi) % (2 * np.pi) - np.pi


def calibrate(
    standing: PoseSample | Sequence[PoseSample],
    window: float = 1.0,
    still_tol: float = 0.05,
) -> CalibrationOffsets:
    """Zero offsets from a standing pose, or the mean over the last ``window`` s of a stream."""
    if isinstance(standing, PoseSample):
        poses = [standing]
    else:
        poses = list(standing)
        if not poses:
            raise InputError("no standing poses supplied")
        t_end = poses[-1].t
        poses = [p for p in poses if p.t >= t_end - window]
    th = np.array([p.theta_h for p in poses])
    tk = np.array([p.theta_k for p in poses])
    tt = np.array([thigh_angle_from_rotation(p.R_thigh) for p in poses])
    spread = max(np.ptp(th), np.ptp(tk), np.ptp(tt))
    if spread > still_tol:
        log.warning("calibration window is not still (spread %.3g rad)", spread)
    return CalibrationOffsets(theta_h=float(th.mean()), theta_k=float(tk.mean()), theta_t=float(tt.mean()))


def assist_torques(config: ExoConfig, theta_t, theta_h) -> JointTorques:
    """Gravity-compensation torques from calibrated thigh and hip angles.

    Works on scalars or arrays. Joints absent from the layout come back as
    None. Each torque is clamped to [-tau_flex_max, tau_ext_max].
    """
    gain = config.mass * config.g * config.alpha
    lo, hi = -config.tau_flex_max, config.tau_ext_max
    scalar = np.ndim(theta_t) == 0 and np.ndim(theta_h) == 0
    if config.layout is Layout.KNEE_ONLY:
        theta_h = np.zeros(np.shape(theta_h))
    theta_t = np.asarray(theta_t, dtype=float)
    theta_h = np.asarray(theta_h, dtype=float)

    torso = config.l_h * np.sin(theta_t - theta_h)
    tau_h = tau_k = None
    if config.layout.has_knee:
        tau_k = _clamp(gain * (config.l_t * np.sin(theta_t) - torso), lo, hi, scalar)
    if config.layout.has_hip:
        tau_h = _clamp(gain * -torso, lo, hi, scalar)
    return JointTorques(tau_h=tau_h, tau_k=tau_k)


def _clamp(x, lo, hi, scalar):
    y = np.clip(x, lo, hi) + 0.0
    return float(y) if scalar else y


class GravityCompController:
    """Stateful wrapper holding a config and calibration offsets.

    Calibration writes swap in a new immutable offsets object under a lock;
    torque evaluation only reads that reference and is otherwise pure.
    """

    def __init__(self, config: ExoConfig):
        self.config = config
        self._offsets: CalibrationOffsets | None = None
        self._lock = threading.Lock()

    @property
    def calibrated(self) -> bool:
        return self._offsets is not None

    @property
    def offsets(self) -> CalibrationOffsets | None:
        return self._offsets

    def calibrate(self, standing, window: float = 1.0) -> CalibrationOffsets:
        offsets = calibrate(standing, window=window)
        with self._lock:
            self._offsets = offsets
        return offsets

    def angles(self, pose: PoseSample) -> tuple[float, float, float]:
        """Calibrated (theta_t, theta_h, theta_k)."""
        off = self._offsets
        if off is None:
            raise StateError("controller is not calibrated; stand still and calibrate first")
        theta_t = float(wrap_angle(thigh_angle_from_rotation(pose.R_thigh) - off.theta_t))
        return theta_t, pose.theta_h - off.theta_h, pose.theta_k - off.theta_k

    def step(self, pose: PoseSample) -> JointTorques:
        theta_t, theta_h, _ = self.angles(pose)
        return assist_torques(self.config, theta_t, theta_h)
