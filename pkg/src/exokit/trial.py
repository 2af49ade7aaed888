"""Uniformly sampled benchtop trial logs and their CSV form.

CSV layout: header ``t,i_q,theta,omega,tau_meas``, SI units, comma separated,
UTF-8, LF line endings. Floats are written with ``repr`` so a log survives a
write/read round trip bit for bit.
"""
from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InputError, SchemaError

TRIAL_COLUMNS = ("t", "i_q", "theta", "omega", "tau_meas")
UNIFORM_TOL = 1e-6  # s


@dataclass(frozen=True, eq=False)
class TrialLog:
    t: np.ndarray
    i_q: np.ndarray
    theta: np.ndarray
    omega: np.ndarray
    tau_meas: np.ndarray

    def __post_init__(self):
        cols = {}
        for name in TRIAL_COLUMNS:
            arr = np.ascontiguousarray(getattr(self, name), dtype=float)
            if arr.ndim != 1:
                raise InputError(f"column {name!r} must be one-dimensional")
            if not np.all(np.isfinite(arr)):
                raise InputError(f"column {name!r} contains non-finite values")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
            cols[name] = arr
        lengths = {len(a) for a in cols.values()}
        if len(lengths) != 1:
            raise InputError(f"columns have unequal lengths {sorted(lengths)}")
        n = lengths.pop()
        if n < 2:
            raise InputError("a trial log needs at least 2 samples")
        dt = np.diff(self.t)
        if np.any(dt <= 0):
            raise InputError("column 't' must be strictly increasing")
        step = (self.t[-1] - self.t[0]) / (n - 1)
        if np.max(np.abs(dt - step)) > UNIFORM_TOL:
            raise InputError("column 't' is not uniformly sampled (tolerance 1e-6 s)")

    def __len__(self) -> int:
        return len(self.t)

    @property
    def dt(self) -> float:
        return float((self.t[-1] - self.t[0]) / (len(self.t) - 1))

    @property
    def sample_rate(self) -> float:
        return 1.0 / self.dt

    def columns(self) -> dict[str, np.ndarray]:
        return {name: getattr(self, name) for name in TRIAL_COLUMNS}

    def equals(self, other: "TrialLog") -> bool:
        """Bit-for-bit equality of every column."""
        return all(
            np.array_equal(a, b) for a, b in zip(self.columns().values(), other.columns().values())
        )

    @classmethod
    def concatenate(cls, logs: list["TrialLog"]) -> "TrialLog":
        """Join logs sharing one sample rate, re-timing them onto one clock."""
        if not logs:
            raise InputError("nothing to concatenate")
        dt = logs[0].dt
        n = sum(len(log) for log in logs)
        t = logs[0].t[0] + dt * np.arange(n)
        parts = {name: np.concatenate([getattr(log, name) for log in logs]) for name in TRIAL_COLUMNS[1:]}
        return cls(t=t, **parts)


def format_float(x: float) -> str:
    # shortest round-trip repr, with -0.0 folded to 0.0
    return repr(float(x) + 0.0)


def trial_to_csv(log: TrialLog) -> str:
    buf = io.StringIO()
    buf.write(",".join(TRIAL_COLUMNS) + "\n")
    cols = [getattr(log, name).tolist() for name in TRIAL_COLUMNS]
    for row in zip(*cols):
        buf.write(",".join(format_float(v) for v in row) + "\n")
    return buf.getvalue()


def write_trial_csv(log: TrialLog, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(trial_to_csv(log))
    return path


def read_trial_csv(path) -> TrialLog:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InputError(f"trial log not found: {path}") from None
    except UnicodeDecodeError as exc:
        raise SchemaError(f"{path}: not UTF-8 text ({exc})") from None
    rows = list(csv.reader(io.StringIO(text)))
    if not rows:
        raise SchemaError(f"{path}: empty file, expected header {','.join(TRIAL_COLUMNS)}")
    header = [h.strip() for h in rows[0]]
    missing = [c for c in TRIAL_COLUMNS if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
    extra = [c for c in header if c not in TRIAL_COLUMNS]
    if extra:
        raise SchemaError(f"{path}: unexpected column(s) {', '.join(extra)}")
    body = [r for r in rows[1:] if r]
    if not body:
        raise SchemaError(f"{path}: header present but no data rows")
    data = np.empty((len(body), len(header)))
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise SchemaError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
        for j, field in enumerate(row):
            try:
                data[lineno - 2, j] = float(field)
            except ValueError:
                raise SchemaError(
                    f"{path}:{lineno}: column {header[j]!r} has non-numeric value {field!r}"
                ) from None
    cols = {name: data[:, header.index(name)] for name in TRIAL_COLUMNS}
    try:
        return TrialLog(**cols)
    except InputError as exc:
        raise SchemaError(f"{path}: {exc}") from None
