"""Quasi-direct-drive actuator torque model.

Output torque as seen by the load cell::

    tau = b + g_r * (k_tau - k_n*|i|) * i - (f_C + f_g * g_r*k_tau*|i|) * sgn(omega)

``f_g`` is stored as a fraction of the nominal torque ``g_r*k_tau*|i|``.
``sgn`` has a symmetric deadband so a resting joint carries no friction term.
All quantities are SI (A, rad/s, Nm, kg m^2).
"""
from __future__ import annotations

from dataclasses import asdict, dataclass, replace

import numpy as np

from .errors import InputError, UnachievableTorqueError

VELOCITY_DEADBAND = 0.01  # rad/s
RATED_CURRENT = 30.0  # A
CURRENT_SANITY_BOUND = 40.0  # A


@dataclass(frozen=True)
class ActuatorParams:
    gear_ratio: float = 9.0
    k_tau: float = 0.147  # Nm/A
    k_n: float = 0.0011  # Nm/A^2
    f_coulomb: float = 0.37  # Nm
    f_gear: float = 0.088  # fraction of nominal torque
    bias: float = 0.0  # Nm
    reflected_inertia: float = 92.11e-4  # kg m^2
    k_t_nominal: float = 0.14  # Nm/A

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not np.isfinite(value):
                raise InputError(f"{name} must be finite, got {value!r}")
        if self.gear_ratio <= 0:
            raise InputError("gear_ratio must be > 0")
        if self.k_tau <= 0:
            raise InputError("k_tau must be > 0")
        if self.k_n < 0:
            raise InputError("k_n must be >= 0")
        if self.f_coulomb < 0:
            raise InputError("f_coulomb must be >= 0")
        if not 0 <= self.f_gear < 1:
            raise InputError("f_gear must lie in [0, 1)")
        if self.reflected_inertia < 0:
            raise InputError("reflected_inertia must be >= 0")
        if self.k_t_nominal <= 0:
            raise InputError("k_t_nominal must be > 0")
        if self.k_tau - self.k_n * RATED_CURRENT <= 0:
            raise InputError(
                "effective torque constant k_tau - k_n*|i| turns non-positive "
                f"within the rated {RATED_CURRENT:g} A range"
            )
        # slope of the friction-loaded torque curve must stay positive too,
        # otherwise the inverse is not unique over the rated range
        if self.k_tau * (1 - self.f_gear) - 2 * self.k_n * RATED_CURRENT <= 0:
            raise InputError(
                "torque is not monotonic in current over the rated range "
                "(k_tau*(1 - f_gear) <= 2*k_n*30)"
            )

    def with_(self, **changes) -> "ActuatorParams":
        return replace(self, **changes)


FITTED_PARAMS = ActuatorParams()


def deadband_sign(omega, deadband: float = VELOCITY_DEADBAND):
    omega = np.asarray(omega, dtype=float)
    return np.where(np.abs(omega) < deadband, 0.0, np.sign(omega))


def effective_torque_constant(params: ActuatorParams, i_q):
    return params.k_tau - params.k_n * np.abs(i_q)


def nominal_torque(params: ActuatorParams, i_q):
    """Friction-free torque ``g_r * k_tau * i`` used to scale gear friction."""
    return params.gear_ratio * params.k_tau * np.asarray(i_q, dtype=float)


def _check_finite(**arrays):
    for name, arr in arrays.items():
        if not np.all(np.isfinite(arr)):
            raise InputError(f"{name} contains non-finite values")


def predict_torque(params: ActuatorParams, i_q, omega):
    i_q = np.asarray(i_q, dtype=float)
    omega = np.asarray(omega, dtype=float)
    _check_finite(i_q=i_q, omega=omega)
    if np.any(np.abs(i_q) > CURRENT_SANITY_BOUND):
        raise InputError(f"|i_q| exceeds the {CURRENT_SANITY_BOUND:g} A sanity bound")
    abs_i = np.abs(i_q)
    drive = params.gear_ratio * (params.k_tau - params.k_n * abs_i) * i_q
    friction = params.f_coulomb + params.f_gear * params.gear_ratio * params.k_tau * abs_i
    tau = params.bias + drive - friction * deadband_sign(omega)
    return tau if tau.ndim else float(tau)


def current_for_torque(params: ActuatorParams, tau_desired, omega=0.0, *, nominal: bool = False):
    """Open-loop q-axis current that produces ``tau_desired`` at speed ``omega``.

    With ``nominal=True`` the simple ``tau = g_r * K_t * i`` model is inverted
    instead (bias and friction ignored). Otherwise the torque model is solved
    on the branch that contains the requested torque, taking the root nearest
    zero current; the far root sits where the torque constant is collapsing.

    Raises UnachievableTorqueError when no root exists within the rated
    current.
    """
    tau = np.asarray(tau_desired, dtype=float)
    omega = np.asarray(omega, dtype=float)
    _check_finite(tau_desired=tau, omega=omega)

    if nominal:
        i = tau / (params.gear_ratio * params.k_t_nominal)
    else:
        s = deadband_sign(omega)
        # torque offset from the zero-current operating point
        y = tau - params.bias + params.f_coulomb * s
        branch = np.sign(y)
        a1 = params.gear_ratio * params.k_tau * (1.0 - branch * params.f_gear * s)
        a2 = params.gear_ratio * params.k_n
        mag = np.abs(y)
        disc = a1 * a1 - 4.0 * a2 * mag
        if np.any(disc < 0):
            raise UnachievableTorqueError(
                f"torque {_fmt(tau)} Nm has no real current solution at omega={_fmt(omega)}"
            )
        # rationalised small root, stays well conditioned as k_n -> 0
        i = branch * 2.0 * mag / (a1 + np.sqrt(disc))

    if np.any(np.abs(i) > RATED_CURRENT + 1e-12):
        raise UnachievableTorqueError(
            f"torque {_fmt(tau)} Nm needs {_fmt(np.max(np.abs(i)))} A, above the "
            f"{RATED_CURRENT:g} A rating"
        )
    return i if i.ndim else float(i)


def backdrive_torque(params: ActuatorParams, omega, alpha_dd):
    """Torque needed to move the unpowered output (reflected inertia plus Coulomb)."""
    omega = np.asarray(omega, dtype=float)
    alpha_dd = np.asarray(alpha_dd, dtype=float)
    _check_finite(omega=omega, alpha_dd=alpha_dd)
    tau = params.reflected_inertia * alpha_dd + params.f_coulomb * deadband_sign(omega)
    return tau if tau.ndim else float(tau)


def _fmt(x) -> str:
    x = np.asarray(x)
    return f"{float(x):.4g}" if x.ndim == 0 else np.array2string(x, precision=4, threshold=6)
