import logging

import numpy as np
import pytest


@pytest.fixture(autouse=True)
def _reset_exokit_logger():
    # the CLI installs its own stderr handler; undo it so caplog keeps working
    yield
    root = logging.getLogger("exokit")
    root.handlers[:] = []
    root.propagate = True
    root.setLevel(logging.NOTSET)


def write_emg_trial(directory, name, reps=5, fs=1000.0, gain=1.0, seed=0):
    """Synthetic squat EMG (VM, BF) whose amplitude follows the thigh angle."""
    rng = np.random.default_rng(seed)
    one = np.r_[np.zeros(int(fs)), np.linspace(0, 80, int(fs), endpoint=False),
                np.linspace(80, 0, int(fs), endpoint=False)]
    theta = np.r_[np.tile(one, reps), np.zeros(int(fs))]
    t = np.arange(theta.size) / fs
    act = 0.05 + gain * theta / 80.0
    vm = act * rng.normal(size=t.size)
    bf = 0.5 * act * rng.normal(size=t.size)
    emg = directory / f"{name}_emg.csv"
    thigh = directory / f"{name}_thigh.csv"
    rows = ["t,VM,BF"] + [f"{a!r},{b!r},{c!r}" for a, b, c in zip(t.tolist(), vm.tolist(), bf.tolist())]
    emg.write_text("\n".join(rows) + "\n")
    step = 10  # thigh track at a tenth of the EMG rate
    rows = ["t,theta_t_deg"] + [f"{a!r},{b!r}" for a, b in zip(t[::step].tolist(), theta[::step].tolist())]
    thigh.write_text("\n".join(rows) + "\n")
    return emg, thigh


def write_mvc(directory, fs=1000.0, seconds=3.0, seed=99):
    rng = np.random.default_rng(seed)
    t = np.arange(int(fs * seconds)) / fs
    vm = 2.0 * rng.normal(size=t.size)
    bf = 1.5 * rng.normal(size=t.size)
    path = directory / "mvc.csv"
    rows = ["t,VM,BF"] + [f"{a!r},{b!r},{c!r}" for a, b, c in zip(t.tolist(), vm.tolist(), bf.tolist())]
    path.write_text("\n".join(rows) + "\n")
    return path


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record the outcome of a numbered acceptance criterion, then assert it."""
    def record(number: int, ok: bool, detail: str):
        if number in ACCEPTANCE:
            prev_ok, prev = ACCEPTANCE[number]
            ok, detail = prev_ok and ok, f"{prev}; {detail}"
        ACCEPTANCE[number] = (bool(ok), detail)
        assert ok, f"criterion {number}: {detail}"
    return record


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] {n}: {detail}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark and rep.when == "call" and rep.failed:
        n = mark.args[0]
        if n not in ACCEPTANCE or ACCEPTANCE[n][0]:
            ACCEPTANCE[n] = (False, f"{item.name} raised {call.excinfo.typename}")
