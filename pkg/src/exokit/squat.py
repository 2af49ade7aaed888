"""Quasi-static lifting-and-lowering squat task with gravity-compensation assist.

The human plant is a sagittal shank/thigh/torso chain standing on a fixed
ankle, carrying half of the trunk and payload per leg. Only gravity is
modelled, so joint torques follow from horizontal lever arms. Joint profiles
are minimum-jerk, one beat down and one beat up, then ``rest_beats`` standing.

Reps alternate lift (payload picked up at the bottom and carried up) and
lower (payload carried down and released at the bottom), starting with a lift.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import trapezoid

from .control import ExoConfig, GravityCompController, Layout, PoseSample, assist_torques
from .errors import ConfigError

# Segment masses as fractions of body mass, lengths as fractions of height,
# centre-of-mass positions as fractions of segment length from the proximal joint.
THIGH_MASS, SHANK_MASS, TRUNK_MASS = 0.100, 0.0465, 0.678
THIGH_LEN, SHANK_LEN, TRUNK_LEN, ARM_LEN = 0.245, 0.246, 0.288, 0.35
THIGH_COM, SHANK_COM, TRUNK_COM = 0.433, 0.433, 0.626

DEFAULT_DEPTH = tuple(np.deg2rad([80.0, 100.0, 100.0]))  # (theta_t, theta_h, theta_k)


def min_jerk(tau):
    """Normalised minimum-jerk position and rate on tau in [0, 1]."""
    tau = np.clip(tau, 0.0, 1.0)
    pos = tau**3 * (10 - 15 * tau + 6 * tau**2)
    vel = 30 * tau**2 * (1 - tau) ** 2
    return pos, vel


@dataclass(frozen=True)
class SquatSpec:
    cadence: float = 60.0  # beats/min
    squat_depth: tuple[float, float, float] = DEFAULT_DEPTH  # rad
    reps: int = 20
    payload: float = 12.5  # kg
    subject_mass: float = 82.0  # kg
    subject_height: float = 1.78  # m
    rest_beats: float = 2.0
    sample_rate: float = 100.0  # Hz

    def __post_init__(self):
        object.__setattr__(self, "squat_depth", tuple(float(x) for x in self.squat_depth))
        if not self.cadence > 0:
            raise ConfigError("cadence must be > 0")
        if int(self.reps) != self.reps or self.reps < 1:
            raise ConfigError("reps must be an integer >= 1")
        if not self.payload >= 0:
            raise ConfigError("payload must be >= 0")
        if not self.subject_mass > 0 or not self.subject_height > 0:
            raise ConfigError("subject mass and height must be > 0")
        if len(self.squat_depth) != 3:
            raise ConfigError("squat_depth needs (theta_t, theta_h, theta_k)")
        for name, q in zip(("theta_t", "theta_h", "theta_k"), self.squat_depth):
            if not 0 < q < np.deg2rad(120.0):
                raise ConfigError(f"squat depth {name}={np.rad2deg(q):.1f} deg outside (0, 120) deg")
        if not self.rest_beats >= 0:
            raise ConfigError("rest_beats must be >= 0")
        if not self.sample_rate > 0:
            raise ConfigError("sample_rate must be > 0")


@dataclass
class Kinematics:
    t: np.ndarray
    q: np.ndarray  # (n, 3): theta_t, theta_h, theta_k
    qd: np.ndarray
    carrying: np.ndarray  # bool per sample
    rep_bounds: list[tuple[int, int]]  # inclusive sample indices
    phases: list[str]


def squat_kinematics(spec: SquatSpec) -> Kinematics:
    beat = 60.0 / spec.cadence
    rep_len = (2 + spec.rest_beats) * beat
    fs = spec.sample_rate
    n = int(round(spec.reps * rep_len * fs)) + 1
    t = np.arange(n) / fs
    depth = np.asarray(spec.squat_depth)

    rep_idx = np.minimum((t // rep_len).astype(int), spec.reps - 1)
    local = t - rep_idx * rep_len
    down_pos, down_vel = min_jerk(local / beat)
    up_pos, up_vel = min_jerk((local - beat) / beat)
    descending = local < beat
    frac = np.where(descending, down_pos, 1.0 - up_pos)
    rate = np.where(descending, down_vel, -up_vel) / beat
    q = frac[:, None] * depth
    qd = rate[:, None] * depth

    lift = rep_idx % 2 == 0
    carrying = np.where(lift, ~descending, descending)
    bounds = []
    for k in range(spec.reps):
        start = int(round(k * rep_len * fs))
        stop = min(int(round((k + 1) * rep_len * fs)), n - 1)
        bounds.append((start, stop))
    phases = ["lift" if k % 2 == 0 else "lower" for k in range(spec.reps)]
    return Kinematics(t=t, q=q, qd=qd, carrying=carrying, rep_bounds=bounds, phases=phases)


@dataclass
class PlantTorques:
    ankle: np.ndarray  # plantarflexion-positive
    knee: np.ndarray  # extension-positive
    hip: np.ndarray  # extension-positive
    potential: np.ndarray  # J, per-leg share of the gravitational potential


def plant_torques(spec: SquatSpec, q: np.ndarray, carrying: np.ndarray) -> PlantTorques:
    """Per-leg quasi-static gravitational joint torques."""
    M, H, g = spec.subject_mass, spec.subject_height, 9.81
    l_s, l_t, l_tr, l_arm = SHANK_LEN * H, THIGH_LEN * H, TRUNK_LEN * H, ARM_LEN * H
    th_t, th_h, th_k = q[:, 0], q[:, 1], q[:, 2]
    shank = th_k - th_t  # forward lean of the shank
    lean = th_h - th_t  # forward lean of the trunk

    knee = np.column_stack([l_s * np.sin(shank), l_s * np.cos(shank)])
    hip = knee + np.column_stack([-l_t * np.sin(th_t), l_t * np.cos(th_t)])
    trunk_dir = np.column_stack([np.sin(lean), np.cos(lean)])
    shoulder = hip + l_tr * trunk_dir

    upper = [  # (mass, position) above the hip, per leg
        (0.5 * TRUNK_MASS * M, hip + TRUNK_COM * l_tr * trunk_dir),
        (0.5 * spec.payload * carrying, shoulder - np.array([0.0, l_arm])),
    ]
    thigh = (THIGH_MASS * M, hip + THIGH_COM * (knee - hip))
    shank_seg = (SHANK_MASS * M, knee * (1 - SHANK_COM))

    def moment(masses, about):
        return g * sum(m * (p[:, 0] - about) for m, p in masses)

    tau_hip = moment(upper, hip[:, 0])
    tau_knee = -moment(upper + [thigh], knee[:, 0])
    tau_ankle = moment(upper + [thigh, shank_seg], 0.0)
    pe = g * sum(m * p[:, 1] for m, p in upper + [thigh, shank_seg])
    return PlantTorques(ankle=tau_ankle, knee=tau_knee, hip=tau_hip, potential=pe)


@dataclass
class RepSummary:
    rep: int
    phase: str
    peak_tau_k_exo: float
    peak_tau_h_exo: float
    human_knee_integral: float  # Nm s, assisted
    human_hip_integral: float
    knee_integral_reduction: float  # Nm s, unassisted minus assisted
    hip_integral_reduction: float


@dataclass
class SquatResult:
    t: np.ndarray
    q: np.ndarray
    qd: np.ndarray
    carrying: np.ndarray
    plant: PlantTorques
    exo_knee: np.ndarray
    exo_hip: np.ndarray
    human_knee: np.ndarray
    human_hip: np.ndarray
    reps: list[RepSummary]
    metadata: dict = field(default_factory=dict)


def simulate_squat(spec: SquatSpec, config: ExoConfig) -> SquatResult:
    kin = squat_kinematics(spec)
    plant = plant_torques(spec, kin.q, kin.carrying)

    ctrl = GravityCompController(config)
    ctrl.calibrate(PoseSample(theta_h=0.0, theta_k=0.0))  # each trial starts standing
    off = ctrl.offsets
    theta_t = kin.q[:, 0] - off.theta_t
    theta_h = kin.q[:, 1] - off.theta_h
    exo = assist_torques(config, theta_t, theta_h)
    zeros = np.zeros(len(kin.t))
    exo_knee = exo.tau_k if exo.tau_k is not None else zeros
    exo_hip = exo.tau_h if exo.tau_h is not None else zeros
    human_knee = plant.knee - exo_knee
    human_hip = plant.hip - exo_hip

    dt = 1.0 / spec.sample_rate
    reps = []
    for k, ((a, b), phase) in enumerate(zip(kin.rep_bounds, kin.phases)):
        sl = slice(a, b + 1)
        hk = trapezoid(human_knee[sl], dx=dt)
        hh = trapezoid(human_hip[sl], dx=dt)
        reps.append(RepSummary(
            rep=k, phase=phase,
            peak_tau_k_exo=float(np.max(exo_knee[sl])),
            peak_tau_h_exo=float(np.max(exo_hip[sl])),
            human_knee_integral=float(hk),
            human_hip_integral=float(hh),
            knee_integral_reduction=float(trapezoid(plant.knee[sl], dx=dt) - hk),
            hip_integral_reduction=float(trapezoid(plant.hip[sl], dx=dt) - hh),
        ))
    metadata = {
        "squat_depth_deg": [float(np.rad2deg(x)) for x in spec.squat_depth],
        "cadence_bpm": spec.cadence,
        "rest_beats": spec.rest_beats,
        "reps": spec.reps,
        "payload_kg": spec.payload,
        "subject_mass_kg": spec.subject_mass,
        "subject_height_m": spec.subject_height,
        "sample_rate_hz": spec.sample_rate,
        "layout": Layout(config.layout).value,
        "alpha": config.alpha,
        "torque_clamp_nm": [-config.tau_flex_max, config.tau_ext_max],
        "plant": "quasi-static per-leg, half trunk and payload",
    }
    return SquatResult(
        t=kin.t, q=kin.q, qd=kin.qd, carrying=kin.carrying, plant=plant,
        exo_knee=exo_knee, exo_hip=exo_hip, human_knee=human_knee, human_hip=human_hip,
        reps=reps, metadata=metadata,
    )


def joint_power(result: SquatResult) -> np.ndarray:
    """Mechanical power the plant's joint torques deliver (W, per leg)."""
    th_t, th_h, th_k = result.qd.T
    shank_rate = th_k - th_t
    p = result.plant
    return -(p.ankle * shank_rate + p.knee * th_k + p.hip * th_h)
