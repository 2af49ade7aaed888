import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from exokit.actuator import FITTED_PARAMS, current_for_torque
from exokit.benchsim import (
    GRID_SPEEDS_DEG, GRID_TORQUES, SineBackdriveSpec, simulate_backdrive, simulate_grid,
    simulate_step,
)
from exokit.errors import ConfigError, UnachievableTorqueError
from exokit.sysid import fit_inertia

P = FITTED_PARAMS


def dense_peak(freq, p=P):
    # phase-resolved maximum of J*accel + f_C*sgn over one period
    t = np.linspace(0, 1 / freq, 400001)
    w = 2 * np.pi * freq
    a = np.deg2rad(35)
    omega = a * w * np.cos(w * t)
    sgn = np.where(np.abs(omega) < 0.01, 0.0, np.sign(omega))
    return np.max(np.abs(p.reflected_inertia * -a * w * w * np.sin(w * t) + p.f_coulomb * sgn))


# --- backdrive --------------------------------------------------------------

def test_backdrive_peak_1hz():
    log = simulate_backdrive(SineBackdriveSpec(freq=1.0), P)
    peak = np.max(np.abs(log.tau_meas - P.bias))
    assert peak == pytest.approx(0.59, abs=0.005)
    assert peak == pytest.approx(dense_peak(1.0), abs=1e-3)
    assert peak < 2.0


def test_backdrive_peak_grows_with_frequency():
    p1 = np.max(np.abs(simulate_backdrive(SineBackdriveSpec(freq=1.0), P).tau_meas))
    p2 = np.max(np.abs(simulate_backdrive(SineBackdriveSpec(freq=2.0), P).tau_meas))
    assert p1 < p2 < 2.0


def test_backdrive_log_shape():
    spec = SineBackdriveSpec(freq=2.0, duration=3.0, sample_rate=500.0)
    log = simulate_backdrive(spec, P)
    assert len(log) == 1501
    assert np.all(log.i_q == 0)
    assert log.sample_rate == pytest.approx(500.0)
    assert np.max(np.abs(log.theta)) == pytest.approx(np.deg2rad(35), rel=1e-3)


def test_vanishing_amplitude_reads_bias():
    p = P.with_(bias=0.12)
    log = simulate_backdrive(SineBackdriveSpec(amplitude=1e-12), p)
    assert np.allclose(log.tau_meas, 0.12, atol=1e-12, rtol=0)


def test_backdrive_deterministic():
    spec = SineBackdriveSpec(freq=1.5)
    a = simulate_backdrive(spec, P, noise_sigma=0.1, seed=7)
    b = simulate_backdrive(spec, P, noise_sigma=0.1, seed=7)
    c = simulate_backdrive(spec, P, noise_sigma=0.1, seed=8)
    assert a.equals(b)
    assert not a.equals(c)


@pytest.mark.parametrize("freq", [1.0, 2.0])
def test_backdrive_closure(freq):
    p = P.with_(reflected_inertia=5e-3)
    fit = fit_inertia(simulate_backdrive(SineBackdriveSpec(freq=freq), p), p)
    assert fit.inertia == pytest.approx(5e-3, rel=1e-4)


@pytest.mark.parametrize("kw", [
    {"freq": 0.0}, {"amplitude": 0.0}, {"duration": -1.0},
    {"freq": 10.0, "sample_rate": 200.0},
])
def test_backdrive_spec_validation(kw):
    with pytest.raises(ConfigError):
        SineBackdriveSpec(**kw)


# --- grid -------------------------------------------------------------------

def test_default_grid():
    run = simulate_grid(P)
    speeds = {s for s, _, _ in run.segments} | {s for s, _ in run.skipped}
    torques = {q for _, q, _ in run.segments} | {q for _, q in run.skipped}
    assert speeds == {s * k for s in GRID_SPEEDS_DEG for k in (1, -1)}
    assert torques == {q * k for q in GRID_TORQUES for k in (1, -1)}
    # 13 signed speeds x 11 signed torques, every one reachable with fitted params
    assert len(run.segments) + len(run.skipped) == 13 * 11
    assert run.skipped == []
    assert len(run.log) == 13 * 11 * 400
    assert np.all(np.diff(run.log.t) > 0)


def test_grid_segment_currents():
    run = simulate_grid(P, speeds=[10.0], torques=[9.0], dwell=0.5)
    for speed, torque, i in run.segments:
        assert i == current_for_torque(P, torque, np.deg2rad(speed))
    assert len(run.log) == 4 * 100


def test_single_point_is_flat_bias():
    p = P.with_(bias=-0.2)
    log = simulate_grid(p, speeds=[0.0], torques=[0.0]).log
    assert np.all(log.tau_meas == -0.2)
    assert np.all(log.i_q == 0) and np.all(log.omega == 0)


def test_unachievable_points_skipped():
    run = simulate_grid(P, speeds=[100.0], torques=[5.0, 29.0])
    assert (100.0, 29.0) in run.skipped and (-100.0, -29.0) in run.skipped
    assert all(abs(q) == 5.0 or abs(q) == 29.0 for _, q, _ in run.segments)


def test_grid_errors():
    with pytest.raises(ConfigError):
        simulate_grid(P, speeds=[])
    with pytest.raises(ConfigError):
        simulate_grid(P, speeds=[10.0], torques=[50.0])


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 2**64 - 1), st.floats(0, 0.5))
def test_grid_deterministic(seed, sigma):
    a = simulate_grid(P, speeds=[0, 30], torques=[1, 9], noise_sigma=sigma, seed=seed).log
    b = simulate_grid(P, speeds=[0, 30], torques=[1, 9], noise_sigma=sigma, seed=seed).log
    assert a.equals(b)


# --- step -------------------------------------------------------------------

def test_step_30nm_settles():
    log = simulate_step(P, 30.0)
    assert log.tau_meas[-1] == pytest.approx(30.0, abs=1e-9)
    assert np.all(log.tau_meas[log.t < 2.0] == 0.0)


def test_step_zero_is_flat_bias():
    p = P.with_(bias=0.3)
    assert np.all(simulate_step(p, 0.0).tau_meas == 0.3)


def test_step_25nm_current():
    log = simulate_step(P, 25.0)
    assert log.i_q[-1] == pytest.approx(22.78, abs=5e-3)


def test_step_unachievable():
    with pytest.raises(UnachievableTorqueError):
        simulate_step(P, 45.0)
