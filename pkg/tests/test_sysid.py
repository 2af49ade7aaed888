import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays
from scipy import signal

from exokit.actuator import FITTED_PARAMS, predict_torque
from exokit.benchsim import SineBackdriveSpec, simulate_backdrive, simulate_grid
from exokit.errors import ConditioningError, ConfigError, FitError
from exokit.sysid import (
    REGRESSOR_COLUMNS, build_regressor, fit_inertia, fit_torque_model, lowpass2,
    lowpass2_coefficients, transient_samples,
)
from exokit.trial import TrialLog

P = FITTED_PARAMS.with_(bias=0.05)
FIELDS = ("bias", "k_tau", "k_n", "f_coulomb", "f_gear")


@pytest.fixture(scope="module")
def grid():
    return simulate_grid(P).log


def flat_log(n=400, fs=100.0, **cols):
    base = dict(t=np.arange(n) / fs, i_q=np.zeros(n), theta=np.zeros(n),
                omega=np.zeros(n), tau_meas=np.zeros(n))
    base.update({k: np.broadcast_to(v, n) for k, v in cols.items()})
    return TrialLog(**base)


# --- filter -----------------------------------------------------------------

@pytest.mark.parametrize("fs", [50.0, 200.0, 1000.0])
def test_coefficients_match_prewarped_bilinear(fs):
    fc, zeta = 2.0, 0.7
    wa = 2 * fs * np.tan(np.pi * fc / fs)
    b_ref, a_ref = signal.bilinear([wa**2], [1.0, 2 * zeta * wa, wa**2], fs)
    b, a = lowpass2_coefficients(fs, fc, zeta)
    assert np.allclose(b, b_ref, rtol=1e-12, atol=1e-15)
    assert np.allclose(a, a_ref, rtol=1e-12, atol=1e-15)
    assert b.sum() / a.sum() == pytest.approx(1.0, abs=1e-12)


def test_constant_passes_unchanged():
    y = lowpass2(np.full(500, 3.25), 200.0)
    assert np.allclose(y, 3.25, rtol=0, atol=1e-12)


def test_step_overshoot():
    fs = 1000.0
    x = np.r_[np.zeros(100), np.ones(5000)]
    y = lowpass2(x, fs)
    zeta = 0.7
    expected = np.exp(-np.pi * zeta / np.sqrt(1 - zeta**2))
    assert expected == pytest.approx(0.046, abs=5e-4)
    assert y.max() - 1 == pytest.approx(expected, abs=2e-3)
    assert y[-1] == pytest.approx(1.0, abs=1e-9)


@pytest.mark.parametrize("fs", [200.0, 1000.0])
def test_20hz_attenuation(fs):
    b, a = lowpass2_coefficients(fs)
    _, h = signal.freqz(b, a, worN=[20.0], fs=fs)
    assert 20 * np.log10(abs(h[0])) <= -35.0
    # time-domain check on a sine
    t = np.arange(int(10 * fs)) / fs
    y = lowpass2(np.sin(2 * np.pi * 20 * t), fs)
    tail = y[int(5 * fs):]
    assert 20 * np.log10(np.max(np.abs(tail))) <= -35.0


def test_filter_rejects_bad_config():
    with pytest.raises(ConfigError):
        lowpass2(np.ones(10), 4.0, fc=2.0)
    with pytest.raises(ConfigError):
        lowpass2(np.ones(10), 100.0, zeta=0.0)


@settings(max_examples=50)
@given(
    arrays(float, 64, elements=st.floats(-100, 100)),
    arrays(float, 64, elements=st.floats(-100, 100)),
    st.floats(-10, 10),
)
def test_filter_linearity(x, y, a):
    lhs = lowpass2(a * x + y, 100.0)
    rhs = a * lowpass2(x, 100.0) + lowpass2(y, 100.0)
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-9)


def test_filter_acts_column_wise():
    x = np.random.default_rng(0).normal(size=(300, 3))
    y = lowpass2(x, 100.0)
    for j in range(3):
        assert np.allclose(y[:, j], lowpass2(x[:, j], 100.0))


# --- regressor --------------------------------------------------------------

def test_regressor_rows():
    log = flat_log(n=2, tau_meas=0.3)
    reg = build_regressor(log, filtered=False)
    assert np.array_equal(reg.X, [[1, 0, 0, 0, 0]] * 2)
    assert np.array_equal(reg.y, [0.3, 0.3])
    row = build_regressor(flat_log(n=2, i_q=-2.0, omega=-1.0), filtered=False).X[0]
    assert np.allclose(row, [1, 9 * -2.0, -9 * 2 * -2.0, 1.0, 2.0])


def test_regressor_reproduces_target_noise_free(grid):
    reg = build_regressor(grid, filtered=False)
    theta = [P.bias, P.k_tau, P.k_n, P.f_coulomb, P.f_gear * P.gear_ratio * P.k_tau]
    assert np.allclose(reg.X @ theta, grid.tau_meas, atol=1e-12)
    filt = build_regressor(grid)
    assert np.allclose(filt.X @ theta, filt.y, atol=1e-9)


def test_standard_grid_full_rank(grid):
    reg = build_regressor(grid)
    assert np.linalg.matrix_rank(reg.X) == len(REGRESSOR_COLUMNS)
    assert reg.warnings == []


def test_zero_current_warns_and_fails_fit():
    log = flat_log(n=2000, omega=np.where(np.arange(2000) % 400 < 200, 1.0, -1.0))
    assert any("current" in w for w in build_regressor(log).warnings)
    with pytest.raises(FitError, match="torque_constant|nonlinear_constant|gear_friction"):
        fit_torque_model(log)


def test_too_short_for_transient():
    with pytest.raises(FitError, match="too short"):
        fit_torque_model(flat_log(n=100))


# --- stage one --------------------------------------------------------------

def test_noise_free_recovery(grid):
    rep = fit_torque_model(grid)
    for f in FIELDS:
        assert getattr(rep.params, f) == pytest.approx(getattr(P, f), rel=1e-6), f
    assert rep.residual_rmse < 1e-9
    assert rep.n_samples == len(grid) - transient_samples(grid.sample_rate)
    assert rep.sample_rate == pytest.approx(200.0)


def test_recovery_with_zero_bias():
    rep = fit_torque_model(simulate_grid(FITTED_PARAMS).log)
    assert abs(rep.params.bias) < 1e-9
    assert rep.params.k_tau == pytest.approx(0.147, rel=1e-6)


def test_noisy_recovery_within_two_percent():
    for seed in range(5):
        rep = fit_torque_model(simulate_grid(P, noise_sigma=0.1, seed=seed).log)
        assert rep.params.k_tau == pytest.approx(P.k_tau, rel=0.02)
        assert rep.params.f_coulomb == pytest.approx(P.f_coulomb, rel=0.02)


def test_residual_p95_at_reference_scale():
    rep = fit_torque_model(simulate_grid(P, noise_sigma=0.15, seed=11).log)
    assert 0 <= rep.residual_p95 <= 0.39
    assert rep.residual_rmse >= 0


@pytest.mark.parametrize("c", [-0.7, 0.2, 3.0])
def test_bias_invariance(grid, c):
    base = fit_torque_model(grid)
    shifted = TrialLog(**{**grid.columns(), "tau_meas": grid.tau_meas + c})
    rep = fit_torque_model(shifted)
    assert rep.params.bias - base.params.bias == pytest.approx(c, abs=1e-9)
    for f in FIELDS[1:]:
        assert getattr(rep.params, f) == pytest.approx(getattr(base.params, f), rel=1e-9)


# --- stage two --------------------------------------------------------------

@pytest.fixture(scope="module")
def backdrive():
    return [simulate_backdrive(SineBackdriveSpec(freq=f), P) for f in (1.0, 2.0)]


def test_inertia_recovery(backdrive):
    fit = fit_inertia(backdrive, P)
    assert fit.inertia == pytest.approx(92.11e-4, rel=1e-4)
    assert abs(fit.bias) < 1e-4
    assert fit.rmse_after < 0.3 * fit.rmse_before


@pytest.mark.parametrize("f", [1.0, 2.0])
def test_inertia_single_trial(f):
    fit = fit_inertia(simulate_backdrive(SineBackdriveSpec(freq=f), P), P)
    assert fit.inertia == pytest.approx(P.reflected_inertia, rel=1e-4)


def test_inertia_with_fitted_base(grid, backdrive):
    base = fit_torque_model(grid).params
    assert fit_inertia(backdrive, base).inertia == pytest.approx(92.11e-4, rel=1e-3)


def test_inertia_noisy_rmse_never_worse():
    for seed in range(4):
        trial = simulate_backdrive(SineBackdriveSpec(freq=1.5), P, noise_sigma=0.2, seed=seed)
        fit = fit_inertia(trial, P.with_(f_coulomb=0.3))
        assert fit.rmse_after <= fit.rmse_before


def test_inertia_needs_excitation():
    n = 2000
    log = flat_log(n=n, fs=200.0, omega=0.5, tau_meas=predict_torque(P, 0.0, 0.5))
    with pytest.raises(ConditioningError):
        fit_inertia(log, P)
