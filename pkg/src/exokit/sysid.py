"""Two-stage filtered least-squares identification of the actuator model.

Stage one fits bias, torque constants and friction to constant torque/speed
data. Stage two regresses the stage-one residual on a backdrive trial against
output acceleration to get the reflected inertia.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import linalg, signal

from .actuator import ActuatorParams, deadband_sign, predict_torque
from .errors import ConditioningError, ConfigError, FitError, InputError
from .trial import TrialLog

log = logging.getLogger(__name__)

FILTER_FC = 2.0  # Hz
FILTER_ZETA = 0.7
TRANSIENT_PERIODS = 3.0  # filtered data before 3/fc seconds is discarded
RANK_RTOL = 1e-10
MIN_ACCEL_RMS = 1.0  # rad/s^2

REGRESSOR_COLUMNS = ("bias", "torque_constant", "nonlinear_constant", "coulomb", "gear_friction")


def lowpass2_coefficients(sample_rate: float, fc: float = FILTER_FC, zeta: float = FILTER_ZETA):
    """Digital (b, a) for wn^2 / (s^2 + 2 zeta wn s + wn^2) via the bilinear map.

    The analog corner is pre-warped so the digital filter's natural frequency
    lands exactly on ``fc``.
    """
    if not (np.isfinite(sample_rate) and sample_rate > 0):
        raise ConfigError(f"sample rate must be positive, got {sample_rate!r}")
    if not fc > 0:
        raise ConfigError(f"cutoff must be positive, got {fc!r}")
    if fc >= sample_rate / 2:
        raise ConfigError(f"cutoff {fc:g} Hz is not below Nyquist ({sample_rate / 2:g} Hz)")
    if not zeta > 0:
        raise ConfigError(f"damping ratio must be positive, got {zeta!r}")
    w = np.tan(np.pi * fc / sample_rate)
    w2 = w * w
    a0 = 1.0 + 2.0 * zeta * w + w2
    b = np.array([w2, 2.0 * w2, w2]) / a0
    a = np.array([1.0, (2.0 * w2 - 2.0) / a0, (1.0 - 2.0 * zeta * w + w2) / a0])
    return b, a


def lowpass2(x, sample_rate: float, fc: float = FILTER_FC, zeta: float = FILTER_ZETA):
    """Causal single-pass second-order low-pass along axis 0.

    The filter starts in the steady state of the first sample, so a constant
    input passes through unchanged from the first sample on.
    """
    b, a = lowpass2_coefficients(sample_rate, fc, zeta)
    x = np.asarray(x, dtype=float)
    if x.shape[0] == 0:
        return x.copy()
    zi = signal.lfilter_zi(b, a)
    zi = zi.reshape((2,) + (1,) * (x.ndim - 1)) * x[0]
    y, _ = signal.lfilter(b, a, x, axis=0, zi=zi)
    return y


def transient_samples(sample_rate: float, fc: float = FILTER_FC) -> int:
    return int(np.ceil(TRANSIENT_PERIODS / fc * sample_rate))


@dataclass
class Regression:
    X: np.ndarray
    y: np.ndarray
    columns: tuple[str, ...] = REGRESSOR_COLUMNS
    warnings: list[str] = field(default_factory=list)


def raw_regressor(i_q, omega, gear_ratio: float) -> np.ndarray:
    i_q = np.asarray(i_q, dtype=float)
    s = deadband_sign(omega)
    abs_i = np.abs(i_q)
    return np.column_stack(
        [np.ones_like(i_q), gear_ratio * i_q, -gear_ratio * abs_i * i_q, -s, -abs_i * s]
    )


def build_regressor(
    trial: TrialLog, gear_ratio: float = 9.0, *, filtered: bool = True,
    fc: float = FILTER_FC, zeta: float = FILTER_ZETA,
) -> Regression:
    """Per-sample regressor rows and torque target for the torque model.

    Column order follows REGRESSOR_COLUMNS. The gear-friction column is
    ``|i|*sgn`` so its coefficient is ``f_g * g_r * k_tau``.
    """
    X = raw_regressor(trial.i_q, trial.omega, gear_ratio)
    y = np.array(trial.tau_meas, dtype=float)
    warnings = []
    if not np.any(trial.i_q):
        warnings.append("current is identically zero: torque-constant columns are empty")
    if not np.any(deadband_sign(trial.omega)):
        warnings.append("velocity never leaves the deadband: friction columns are empty")
    for msg in warnings:
        log.warning(msg)
    if filtered:
        X = lowpass2(X, trial.sample_rate, fc, zeta)
        y = lowpass2(y, trial.sample_rate, fc, zeta)
    return Regression(X=X, y=y, warnings=warnings)


def solve_least_squares(X: np.ndarray, y: np.ndarray, names: Sequence[str]) -> np.ndarray:
    """Column-equilibrated, column-pivoted QR solve.

    Raises FitError naming the columns that fall outside the numerical rank.
    """
    norms = np.linalg.norm(X, axis=0)
    scale = np.where(norms > 0, norms, 1.0)
    Q, R, perm = linalg.qr(X / scale, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    rank = int(np.sum(diag > RANK_RTOL * max(diag[0], np.finfo(float).tiny)))
    if rank < X.shape[1]:
        bad = [names[j] for j in perm[rank:]]
        raise FitError(
            f"regressor is rank deficient ({rank} of {X.shape[1]}); "
            f"cannot identify column(s): {', '.join(bad)}"
        )
    coef = np.empty(X.shape[1])
    coef[perm] = linalg.solve_triangular(R, Q.T @ y)
    return coef / scale


@dataclass(frozen=True)
class FitReport:
    params: ActuatorParams
    residual_rmse: float
    residual_p95: float
    n_samples: int
    sample_rate: float
    coefficients: tuple[float, ...] = ()
    zero_velocity_policy: str = "included, friction sign deadbanded to 0"
    warnings: tuple[str, ...] = ()


def fit_torque_model(
    trial: TrialLog, gear_ratio: float = 9.0, *,
    k_t_nominal: float = 0.14, reflected_inertia: float = 0.0,
) -> FitReport:
    reg = build_regressor(trial, gear_ratio)
    start = transient_samples(trial.sample_rate)
    if len(trial) - start < len(REGRESSOR_COLUMNS):
        raise FitError(
            f"log too short: {len(trial)} samples, first {start} are filter transient"
        )
    X, y = reg.X[start:], reg.y[start:]
    coef = solve_least_squares(X, y, REGRESSOR_COLUMNS)
    b, k_tau, k_n, f_c, gear_coef = (float(c) for c in coef)
    try:
        params = ActuatorParams(
            gear_ratio=gear_ratio, k_tau=k_tau, k_n=k_n, f_coulomb=f_c,
            f_gear=gear_coef / (gear_ratio * k_tau), bias=b,
            reflected_inertia=reflected_inertia, k_t_nominal=k_t_nominal,
        )
    except InputError as exc:
        raise FitError(f"identified parameters are not physical: {exc}") from None
    err = y - X @ coef
    return FitReport(
        params=params,
        residual_rmse=float(np.sqrt(np.mean(err**2))),
        residual_p95=float(np.percentile(np.abs(err), 95)),
        n_samples=int(len(y)),
        sample_rate=trial.sample_rate,
        coefficients=tuple(float(c) for c in coef),
        warnings=tuple(reg.warnings),
    )


class InertiaFit(NamedTuple):
    inertia: float  # kg m^2
    bias: float  # Nm
    rmse_before: float  # Nm
    rmse_after: float  # Nm


def fit_inertia(trials: TrialLog | Sequence[TrialLog], base: ActuatorParams) -> InertiaFit:
    """Regress the stage-one residual of backdrive trials on acceleration.

    Each trial is filtered on its own (separate files need not join smoothly)
    and the post-transient windows are stacked. Acceleration comes from a
    central difference of the logged velocity passed through the same
    low-pass. Reflected inertia loads the output against acceleration, so the
    regressor column is ``-accel``.
    """
    if isinstance(trials, TrialLog):
        trials = [trials]
    if not trials:
        raise InputError("no backdrive trials supplied")
    residuals, accels = [], []
    for trial in trials:
        if np.any(trial.i_q):
            log.warning("backdrive trial carries non-zero current; model prediction covers it")
        fs = trial.sample_rate
        pred = predict_torque(base, trial.i_q, trial.omega)
        resid = lowpass2(trial.tau_meas, fs) - lowpass2(pred, fs)
        accel = lowpass2(np.gradient(trial.omega, trial.dt, edge_order=2), fs)
        start = transient_samples(fs)
        if len(trial) <= start + 1:
            raise FitError(f"backdrive trial too short: {len(trial)} samples")
        residuals.append(resid[start:])
        accels.append(accel[start:])
    r = np.concatenate(residuals)
    a = np.concatenate(accels)
    accel_rms = float(np.sqrt(np.mean(a**2)))
    if accel_rms < MIN_ACCEL_RMS:
        raise ConditioningError(
            f"acceleration excitation too small (rms {accel_rms:.3g} rad/s^2 < {MIN_ACCEL_RMS:g})"
        )
    X = np.column_stack([-a, np.ones_like(a)])
    coef = solve_least_squares(X, r, ("inertia", "bias"))
    after = r - X @ coef
    return InertiaFit(
        inertia=float(coef[0]),
        bias=float(coef[1]),
        rmse_before=float(np.sqrt(np.mean(r**2))),
        rmse_after=float(np.sqrt(np.mean(after**2))),
    )
