import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import brentq

from exokit.actuator import (
    FITTED_PARAMS, ActuatorParams, backdrive_torque, current_for_torque,
    effective_torque_constant, predict_torque,
)
from exokit.errors import InputError, UnachievableTorqueError

P = FITTED_PARAMS
currents = st.floats(-30, 30, allow_nan=False)
speeds = st.floats(-10, 10, allow_nan=False)


def eq3(i, w, p=P):
    # straight transcription, scalar only
    sgn = 0.0 if abs(w) < 0.01 else (1.0 if w > 0 else -1.0)
    nominal = p.gear_ratio * p.k_tau * abs(i)
    return p.bias + p.gear_ratio * (p.k_tau - p.k_n * abs(i)) * i - (p.f_coulomb + p.f_gear * nominal) * sgn


def test_fitted_params_and_derived_k_n():
    assert P.k_n == pytest.approx((0.147 - 0.125) / 20)
    assert effective_torque_constant(P, 0) == pytest.approx(0.147)
    assert effective_torque_constant(P, 20) == pytest.approx(0.125)


@pytest.mark.parametrize("i, w, expected", [
    (0.0, 0.0, 0.0),
    (20.0, 1.0, 22.5 - (0.37 + 0.088 * 9 * 0.147 * 20)),
    (20.0, -1.0, 22.5 + (0.37 + 0.088 * 9 * 0.147 * 20)),
])
def test_predict_examples(i, w, expected):
    assert predict_torque(P, i, w) == pytest.approx(expected, abs=1e-12)


def test_predict_example_values_rounded():
    assert round(predict_torque(P, 20, 1), 2) == 19.80
    assert round(predict_torque(P, 20, -1), 2) == 25.20


def test_deadband_suppresses_friction():
    assert predict_torque(P, 10, 0.005) == predict_torque(P, 10, 0.0)
    assert predict_torque(P, 10, 0.01) != predict_torque(P, 10, 0.0)


@given(currents, speeds)
def test_predict_matches_transcription(i, w):
    assert predict_torque(P, i, w) == pytest.approx(eq3(i, w), abs=1e-12)


@given(currents, speeds, st.floats(-1, 1))
def test_odd_symmetry(i, w, b):
    p = P.with_(bias=b)
    lhs = predict_torque(p, i, w) - b
    rhs = -(predict_torque(p, -i, -w) - b)
    assert lhs == pytest.approx(rhs, abs=1e-12)


@given(speeds)
def test_monotone_in_current(w):
    i = np.linspace(0, 30, 3001)
    assert np.all(np.diff(predict_torque(P, i, np.full_like(i, w))) > 0)


def test_vectorised_matches_scalar():
    i = np.linspace(-30, 30, 41)
    w = np.linspace(-2, 2, 41)
    vec = predict_torque(P, i, w)
    assert vec.shape == (41,)
    assert np.allclose(vec, [eq3(a, b) for a, b in zip(i, w)], atol=1e-12)


def test_predict_rejects_bad_input():
    with pytest.raises(InputError):
        predict_torque(P, np.nan, 0)
    with pytest.raises(InputError):
        predict_torque(P, 0, np.inf)
    with pytest.raises(InputError):
        predict_torque(P, 41, 0)


def test_current_for_torque_examples():
    assert current_for_torque(P, 25.0, 0.0) == pytest.approx(22.78, abs=5e-3)
    assert current_for_torque(P, 0.0, 0.0) == 0.0
    assert current_for_torque(P, 30.0, 0.0, nominal=True) == pytest.approx(30 / (9 * 0.14))
    assert round(current_for_torque(P, 30.0, 0.0, nominal=True), 2) == 23.81


@pytest.mark.parametrize("tau", [-25.0, -3.0, 0.5, 9.0, 25.0])
@pytest.mark.parametrize("w", [-1.0, 0.0, 1.0])
def test_inverse_matches_bracketed_root(tau, w):
    expected = brentq(lambda i: eq3(i, w) - tau, -30, 30, xtol=1e-14)
    assert current_for_torque(P, tau, w) == pytest.approx(expected, abs=1e-9)


@settings(max_examples=300)
@given(st.floats(-28, 28), st.sampled_from([-1.0, 0.0, 1.0]), st.floats(-0.5, 0.5))
def test_round_trip(tau, w, b):
    p = P.with_(bias=b)
    try:
        i = current_for_torque(p, tau, w)
    except UnachievableTorqueError:
        return
    assert predict_torque(p, i, w) == pytest.approx(tau, abs=1e-6)


def test_round_trip_without_nonlinearity():
    p = P.with_(k_n=0.0)
    for tau in (-20.0, 1.0, 20.0):
        assert predict_torque(p, current_for_torque(p, tau, 1.0), 1.0) == pytest.approx(tau, abs=1e-12)


def test_unachievable_torque():
    with pytest.raises(UnachievableTorqueError):
        current_for_torque(P, 30.0, 1.0)  # friction pushes it past 30 A
    with pytest.raises(UnachievableTorqueError):
        current_for_torque(P, 60.0, 0.0)  # no real root at all
    with pytest.raises(UnachievableTorqueError):
        current_for_torque(P, 40.0, 0.0, nominal=True)


def test_backdrive_examples():
    amp = np.deg2rad(35)
    accel = amp * (2 * np.pi) ** 2
    assert accel == pytest.approx(24.12, abs=0.01)
    assert backdrive_torque(P, 0.0, accel) == pytest.approx(9.211e-3 * accel)
    assert round(backdrive_torque(P, 0.0, accel), 3) == 0.222
    assert backdrive_torque(P, 0.0, 0.0) == 0.0


@pytest.mark.parametrize("freq", [1.0, 2.0])
def test_backdrive_peak_below_2nm(freq):
    t = np.linspace(0, 1 / freq, 200001)
    w = 2 * np.pi * freq
    amp = np.deg2rad(35)
    tau = backdrive_torque(P, amp * w * np.cos(w * t), -amp * w * w * np.sin(w * t))
    assert np.max(np.abs(tau)) < 2.0


@pytest.mark.parametrize("field, value", [
    ("gear_ratio", 0.0), ("k_tau", -0.1), ("k_n", -1e-3), ("f_coulomb", -0.1),
    ("f_gear", 1.0), ("reflected_inertia", -1.0), ("k_n", 0.005), ("bias", np.nan),
])
def test_invalid_params(field, value):
    with pytest.raises(InputError):
        ActuatorParams(**{field: value})
