"""Plain-text, CSV and JSON writers for fit reports, simulations and bundles.

Everything written here is a pure function of its inputs, except the
``created`` line of a bundle manifest. That line honours SOURCE_DATE_EPOCH
so bundles can be made reproducible too.
"""
from __future__ import annotations

import dataclasses
import datetime as _dt
import hashlib
import json
import os
import shutil
from pathlib import Path

import numpy as np

from .sysid import FitReport, InertiaFit
from .trial import format_float

FIT_PARAM_KEYS = ("gear_ratio", "k_tau", "k_n", "f_coulomb", "f_gear", "bias",
                  "reflected_inertia", "k_t_nominal")
SQUAT_COLUMNS = ("rep", "phase", "peak_tau_k_exo", "peak_tau_h_exo",
                 "human_knee_integral", "human_hip_integral")
SQUAT_SERIES_COLUMNS = ("t", "theta_t", "theta_h", "theta_k", "carrying",
                        "plant_knee", "plant_hip", "exo_knee", "exo_hip",
                        "human_knee", "human_hip")


def write_text(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    return path


def dump_json(obj) -> str:
    return json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"


def _jsonable(obj):
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: _jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        return float(obj) + 0.0
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, Path):
        return obj.as_posix()
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def fit_report_dict(report: FitReport, inertia: InertiaFit | None = None) -> dict:
    params = {k: getattr(report.params, k) for k in FIT_PARAM_KEYS}
    if inertia is not None:
        params["reflected_inertia"] = inertia.inertia
    out = {
        "params": params,
        "residual_rmse": report.residual_rmse,
        "residual_p95": report.residual_p95,
        "n_samples": report.n_samples,
        "sample_rate": report.sample_rate,
        "zero_velocity_policy": report.zero_velocity_policy,
        "warnings": list(report.warnings),
        "filter": {"type": "lowpass2", "fc_hz": 2.0, "zeta": 0.7},
    }
    if inertia is not None:
        out["inertia"] = inertia._asdict()
    return out


def fit_report_text(report: FitReport, inertia: InertiaFit | None = None) -> str:
    d = fit_report_dict(report, inertia)
    lines = [f"{k} = {format_float(v)}" for k, v in d["params"].items()]
    for key in ("residual_rmse", "residual_p95", "sample_rate"):
        lines.append(f"{key} = {format_float(d[key])}")
    lines.append(f"n_samples = {d['n_samples']}")
    lines.append(f"zero_velocity_policy = {d['zero_velocity_policy']}")
    if inertia is not None:
        lines.append(f"inertia_kg_cm2 = {inertia.inertia * 1e4:.4f}")
        lines.append(f"inertia_bias = {format_float(inertia.bias)}")
        lines.append(f"inertia_rmse_before = {format_float(inertia.rmse_before)}")
        lines.append(f"inertia_rmse_after = {format_float(inertia.rmse_after)}")
    for w in d["warnings"]:
        lines.append(f"warning = {w}")
    return "\n".join(lines) + "\n"


def read_fit_report_text(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if " = " in line:
            k, v = line.split(" = ", 1)
            out[k.strip()] = v.strip()
    return out


def columns_to_csv(columns: dict[str, np.ndarray | list]) -> str:
    names = list(columns)
    cols = [np.asarray(columns[n]).tolist() for n in names]
    lines = [",".join(names)]
    for row in zip(*cols):
        lines.append(",".join(format_float(v) if isinstance(v, float) else str(v) for v in row))
    return "\n".join(lines) + "\n"


def squat_results_csv(result) -> str:
    cols = {c: [getattr(r, c) for r in result.reps] for c in SQUAT_COLUMNS}
    return columns_to_csv(cols)


def squat_series_csv(result) -> str:
    return columns_to_csv({
        "t": result.t,
        "theta_t": result.q[:, 0], "theta_h": result.q[:, 1], "theta_k": result.q[:, 2],
        "carrying": result.carrying.astype(int),
        "plant_knee": result.plant.knee, "plant_hip": result.plant.hip,
        "exo_knee": result.exo_knee, "exo_hip": result.exo_hip,
        "human_knee": result.human_knee, "human_hip": result.human_hip,
    })


def _created_stamp() -> str:
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    when = (_dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch
            else _dt.datetime.now(_dt.timezone.utc))
    return when.replace(microsecond=0).isoformat()


def build_bundle(inputs: list[Path], out: Path) -> Path:
    """Copy result directories into ``out`` with a summary and a manifest."""
    out.mkdir(parents=True, exist_ok=True)
    copied = []
    for src in inputs:
        src = Path(src)
        files = [src] if src.is_file() else sorted(p for p in src.rglob("*") if p.is_file())
        for f in files:
            rel = Path(src.name) / f.relative_to(src) if src.is_dir() else Path(f.name)
            dst = out / rel
            if dst.resolve() == f.resolve():
                continue
            dst.parent.mkdir(parents=True, exist_ok=True)
            shutil.copyfile(f, dst)
            copied.append(rel)
    copied.sort(key=lambda p: p.as_posix())

    summary = []
    for rel in copied:
        if rel.suffix == ".txt":
            summary.append(f"== {rel.as_posix()} ==\n")
            summary.append((out / rel).read_text(encoding="utf-8"))
            summary.append("\n")
    write_text(out / "summary.txt", "".join(summary))

    lines = [f"created: {_created_stamp()}", "files:"]
    for rel in copied + [Path("summary.txt")]:
        data = (out / rel).read_bytes()
        kind = "plot-data" if rel.suffix == ".csv" else "report" if rel.suffix in (".txt", ".json") else "other"
        lines.append(f"  {hashlib.sha256(data).hexdigest()}  {len(data):>9}  {kind:<9}  {rel.as_posix()}")
    return write_text(out / "MANIFEST.txt", "\n".join(lines) + "\n")
