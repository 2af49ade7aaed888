"""Surface EMG effort analysis for repeated squats.

Pipeline per channel: demean, 20-200 Hz band-pass, centred 100 ms moving RMS,
normalise to %MVC, crop into repetitions from the thigh angle, then integrate
(effort, %MVC s) and take the per-rep peak (%MVC).
"""
from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np
from scipy import signal
from scipy.integrate import trapezoid

from .errors import ConfigError, DetectionError, InputError, SchemaError

log = logging.getLogger(__name__)

BAND = (20.0, 200.0)  # Hz
BAND_ORDER = 4  # overall order of the band-pass (2 poles per edge)
RMS_WINDOW = 0.100  # s
MUSCLES = ("VM", "RF", "VL", "BF", "ST", "GM")
CYCLE_POINTS = 101


@dataclass(frozen=True, eq=False)
class EmgRecording:
    sample_rate: float
    channels: Mapping[str, np.ndarray]  # raw volts
    thigh_angle: np.ndarray | None = None  # rad
    thigh_t: np.ndarray | None = None  # s

    def __post_init__(self):
        if not self.sample_rate > 2 * BAND[1]:
            raise ConfigError(
                f"EMG sample rate {self.sample_rate:g} Hz must exceed {2 * BAND[1]:g} Hz"
            )
        chans = {name: np.asarray(x, dtype=float) for name, x in self.channels.items()}
        if not chans:
            raise InputError("recording has no channels")
        if len({len(x) for x in chans.values()}) != 1:
            raise InputError("EMG channels have unequal lengths")
        object.__setattr__(self, "channels", chans)

    @property
    def n_samples(self) -> int:
        return len(next(iter(self.channels.values())))

    @property
    def t(self) -> np.ndarray:
        return np.arange(self.n_samples) / self.sample_rate

    def thigh_on_emg_clock(self) -> np.ndarray:
        """Thigh angle linearly resampled onto the EMG time base."""
        if self.thigh_angle is None:
            raise InputError("recording has no thigh-angle track")
        return np.interp(self.t, self.thigh_t, self.thigh_angle)


def bandpass_sos(sample_rate: float, band=BAND, order: int = BAND_ORDER):
    if not sample_rate > 2 * band[1]:
        raise ConfigError(f"sample rate {sample_rate:g} Hz too low for a {band[1]:g} Hz band edge")
    return signal.butter(order // 2, band, btype="bandpass", fs=sample_rate, output="sos")


def moving_rms(x: np.ndarray, width: int) -> np.ndarray:
    """Centred moving RMS; the window is truncated (not padded) at the edges."""
    x = np.asarray(x, dtype=float)
    if width % 2 == 0:
        width += 1
    half = width // 2
    csum = np.concatenate([[0.0], np.cumsum(x * x)])
    idx = np.arange(len(x))
    lo = np.maximum(idx - half, 0)
    hi = np.minimum(idx + half + 1, len(x))
    ms = (csum[hi] - csum[lo]) / (hi - lo)
    return np.sqrt(np.maximum(ms, 0.0))


def rms_width(sample_rate: float, window: float = RMS_WINDOW) -> int:
    width = int(round(window * sample_rate))
    return width + 1 if width % 2 == 0 else width


def envelope(raw, sample_rate: float) -> np.ndarray:
    raw = np.asarray(raw, dtype=float)
    sos = bandpass_sos(sample_rate)
    filtered = signal.sosfilt(sos, raw - raw.mean())
    return moving_rms(filtered, rms_width(sample_rate))


def mvc_reference(mvc_envelope, percentile: float | None = None) -> float:
    mvc_envelope = np.asarray(mvc_envelope, dtype=float)
    ref = float(np.max(mvc_envelope) if percentile is None else np.percentile(mvc_envelope, percentile))
    if not ref > 0:
        raise InputError("MVC envelope has no positive activity; cannot normalise")
    return ref


def normalize_mvc(env, mvc_envelope, percentile: float | None = None) -> np.ndarray:
    return 100.0 * np.asarray(env, dtype=float) / mvc_reference(mvc_envelope, percentile)


def crop_reps(
    thigh_angle, expected_reps: int | None = None, *,
    low_frac: float = 0.25, high_frac: float = 0.5, min_excursion: float = np.deg2rad(10.0),
) -> list[tuple[int, int]]:
    """Split a thigh-angle trace into standing-to-standing repetitions.

    A hysteresis detector marks standing dwells (below the low threshold) that
    are separated by excursions above the high threshold. Interior dwells
    contribute their midpoint as a rep boundary. A dwell cut off by either end
    of the record sits half a typical interior dwell away from its inner edge,
    or at its lowest sample when there is no interior dwell to go by. Bounds are inclusive sample
    indices, and consecutive reps share their boundary sample.
    """
    x = np.asarray(thigh_angle, dtype=float)
    if x.size < 3 or not np.all(np.isfinite(x)):
        raise DetectionError("thigh-angle trace is too short or contains non-finite samples")
    lo_ref, hi_ref = np.percentile(x, [1, 99])
    span = hi_ref - lo_ref
    if span < min_excursion:
        raise DetectionError(
            f"no repetitions: thigh angle spans only {np.rad2deg(span):.2f} deg "
            f"(need {np.rad2deg(min_excursion):.1f} deg)"
        )
    low = lo_ref + low_frac * span
    high = lo_ref + high_frac * span

    # hysteresis state: True while standing
    standing = np.empty(x.size, dtype=bool)
    state = x[0] < high
    for i, v in enumerate(x):
        if state and v > high:
            state = False
        elif not state and v < low:
            state = True
        standing[i] = state
    # a standing run entered from an excursion starts when the trace fell below
    # `low`; it ends when the trace last rose past `low` before the next excursion
    edges = np.flatnonzero(np.diff(standing.astype(int)))
    starts = [0] if standing[0] else []
    starts += [e + 1 for e in edges if standing[e + 1]]
    ends = [e for e in edges if standing[e]]
    if standing[-1]:
        ends.append(x.size - 1)

    dwells = []
    for a, b in zip(starts, ends):
        below = np.flatnonzero(x[a:b + 1] < low)
        dwells.append((a + below[0], a + below[-1]) if below.size else (a, b))
    interior = [b - a for a, b in dwells if a > 0 and b < x.size - 1]
    half = int(np.median(interior)) // 2 if interior else None
    bounds = []
    for a, b in dwells:
        if 0 < a and b < x.size - 1:
            bounds.append(int((a + b) // 2))
        elif half is None:
            bounds.append(int(a + np.argmin(x[a:b + 1])))
        elif a == 0 and b == x.size - 1:
            bounds.append(int(a + np.argmin(x[a:b + 1])))
        elif a == 0:
            bounds.append(int(max(a, b - half)))
        else:
            bounds.append(int(min(b, a + half)))
    reps = [(s, e) for s, e in zip(bounds[:-1], bounds[1:]) if e > s]
    if not reps:
        raise DetectionError(
            f"no complete repetition found ({len(bounds)} standing dwell(s), "
            f"thresholds {np.rad2deg(low):.1f}/{np.rad2deg(high):.1f} deg)"
        )
    if expected_reps is not None and len(reps) != expected_reps:
        log.warning("detected %d reps, expected %d", len(reps), expected_reps)
    return reps


@dataclass(frozen=True)
class RepMetric:
    channel: str
    rep: int
    start: int
    stop: int
    effort: float  # %MVC s
    peak: float  # %MVC


@dataclass
class ChannelSummary:
    effort_mean: float
    effort_sd: float
    peak_mean: float
    peak_sd: float
    n_reps: int


@dataclass
class RepMetrics:
    rows: list[RepMetric] = field(default_factory=list)

    def channels(self) -> list[str]:
        seen = []
        for r in self.rows:
            if r.channel not in seen:
                seen.append(r.channel)
        return seen

    def summary(self) -> dict[str, ChannelSummary]:
        out = {}
        for ch in self.channels():
            eff = np.array([r.effort for r in self.rows if r.channel == ch])
            pk = np.array([r.peak for r in self.rows if r.channel == ch])
            out[ch] = ChannelSummary(
                effort_mean=float(eff.mean()), effort_sd=_sd(eff),
                peak_mean=float(pk.mean()), peak_sd=_sd(pk), n_reps=len(eff),
            )
        return out


def _sd(x: np.ndarray) -> float:
    return float(np.std(x, ddof=1)) if len(x) > 1 else 0.0


def summarize(
    emg_pct: Mapping[str, np.ndarray] | np.ndarray,
    reps: Sequence[tuple[int, int]],
    sample_rate: float,
) -> RepMetrics:
    """Per-rep effort (trapezoidal %MVC s) and peak (%MVC) for each channel."""
    if not isinstance(emg_pct, Mapping):
        emg_pct = {"EMG": emg_pct}
    dt = 1.0 / sample_rate
    rows = []
    for ch, series in emg_pct.items():
        series = np.asarray(series, dtype=float)
        for k, (a, b) in enumerate(reps):
            if not 0 <= a < b < len(series):
                log.warning("rep %d bounds (%d, %d) empty or outside %s; skipped", k, a, b, ch)
                continue
            seg = series[a:b + 1]
            rows.append(RepMetric(ch, k, a, b, float(trapezoid(seg, dx=dt)), float(seg.max())))
    return RepMetrics(rows)


def mean_sd(mean: float, sd: float) -> str:
    return f"{mean:.1f} ({sd:.1f})"


def format_table(
    summaries: Mapping[str, Mapping[str, ChannelSummary]], metric: str = "effort",
    muscles: Sequence[str] | None = None,
) -> str:
    """Muscle-by-mode text table of ``mean (SD)`` cells."""
    modes = list(summaries)
    if muscles is None:
        muscles = []
        for m in modes:
            muscles += [c for c in summaries[m] if c not in muscles]
    title = {
        "effort": "Muscle effort, mean (SD), %MVC s",
        "peak": "Peak muscle activation, mean (SD), %MVC",
    }[metric]
    cells = [[""] + modes]
    for mus in muscles:
        row = [mus]
        for m in modes:
            s = summaries[m].get(mus)
            row.append("-" if s is None else mean_sd(
                getattr(s, f"{metric}_mean"), getattr(s, f"{metric}_sd")))
        cells.append(row)
    widths = [max(len(r[j]) for r in cells) for j in range(len(cells[0]))]
    lines = [title]
    for i, row in enumerate(cells):
        lines.append(" ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("-" * len(lines[-1]))
    return "\n".join(lines) + "\n"


def ensemble_average(series, reps: Sequence[tuple[int, int]], points: int = CYCLE_POINTS):
    """Each rep resampled onto 0..100 % cycle; returns (cycle_pct, mean, sd)."""
    series = np.asarray(series, dtype=float)
    pct = np.linspace(0.0, 100.0, points)
    curves = []
    for a, b in reps:
        seg = series[a:b + 1]
        src = np.linspace(0.0, 100.0, len(seg))
        curves.append(np.interp(pct, src, seg))
    curves = np.array(curves)
    sd = curves.std(axis=0, ddof=1) if len(curves) > 1 else np.zeros(points)
    return pct, curves.mean(axis=0), sd


# --- files ---------------------------------------------------------------

METRIC_COLUMNS = ("mode", "channel", "rep", "start", "stop", "effort", "peak")


def _read_numeric_csv(path, first: str) -> tuple[list[str], np.ndarray]:
    path = Path(path)
    try:
        rows = list(csv.reader(io.StringIO(path.read_text(encoding="utf-8"))))
    except FileNotFoundError:
        raise InputError(f"file not found: {path}") from None
    rows = [r for r in rows if r]
    if not rows:
        raise SchemaError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if header[0] != first or len(header) < 2:
        raise SchemaError(f"{path}: header must start with '{first},' followed by data columns")
    if len(rows) < 2:
        raise SchemaError(f"{path}: no data rows")
    data = np.empty((len(rows) - 1, len(header)))
    for i, row in enumerate(rows[1:]):
        if len(row) != len(header):
            raise SchemaError(f"{path}:{i + 2}: expected {len(header)} fields, got {len(row)}")
        try:
            data[i] = [float(v) for v in row]
        except ValueError:
            raise SchemaError(f"{path}:{i + 2}: non-numeric field") from None
    if not np.all(np.isfinite(data)):
        raise SchemaError(f"{path}: non-finite values")
    return header, data


def read_recording(emg_path, thigh_path=None) -> EmgRecording:
    """Load ``t,<ch1>,...`` volts and an optional ``t,theta_t_deg`` track."""
    header, data = _read_numeric_csv(emg_path, "t")
    t = data[:, 0]
    dt = np.diff(t)
    if len(t) < 2 or np.any(dt <= 0):
        raise SchemaError(f"{emg_path}: time column must be strictly increasing")
    if np.max(np.abs(dt - dt.mean())) > 1e-6:
        raise SchemaError(f"{emg_path}: EMG samples are not uniformly spaced")
    fs = 1.0 / dt.mean()
    channels = {name: data[:, j] for j, name in enumerate(header) if j > 0}
    thigh = thigh_t = None
    if thigh_path is not None:
        th_header, th = _read_numeric_csv(thigh_path, "t")
        if th_header != ["t", "theta_t_deg"]:
            raise SchemaError(f"{thigh_path}: expected header t,theta_t_deg")
        thigh_t = th[:, 0] - t[0]
        thigh = np.deg2rad(th[:, 1])
    try:
        return EmgRecording(sample_rate=fs, channels=channels, thigh_angle=thigh, thigh_t=thigh_t)
    except (InputError, ConfigError) as exc:
        raise SchemaError(f"{emg_path}: {exc}") from None


def metrics_to_csv(metrics: Mapping[str, RepMetrics]) -> str:
    buf = io.StringIO()
    buf.write(",".join(METRIC_COLUMNS) + "\n")
    for mode, m in metrics.items():
        for r in m.rows:
            buf.write(f"{mode},{r.channel},{r.rep},{r.start},{r.stop},{r.effort!r},{r.peak!r}\n")
    return buf.getvalue()


def read_metrics_csv(path) -> dict[str, RepMetrics]:
    path = Path(path)
    try:
        rows = list(csv.DictReader(io.StringIO(path.read_text(encoding="utf-8"))))
    except FileNotFoundError:
        raise InputError(f"file not found: {path}") from None
    if not rows or list(rows[0].keys()) != list(METRIC_COLUMNS):
        raise SchemaError(f"{path}: expected header {','.join(METRIC_COLUMNS)}")
    out: dict[str, RepMetrics] = {}
    for i, row in enumerate(rows, start=2):
        try:
            metric = RepMetric(
                row["channel"], int(row["rep"]), int(row["start"]), int(row["stop"]),
                float(row["effort"]), float(row["peak"]),
            )
        except (TypeError, ValueError):
            raise SchemaError(f"{path}:{i}: malformed row") from None
        out.setdefault(row["mode"], RepMetrics()).rows.append(metric)
    return out
