"""``exokit`` command-line front end.

Exit codes: 0 success, 2 input/config error, 3 numerical failure, 64 usage.
Diagnostics go to stderr at the level named by EXOKIT_LOG
(error|warn|info|debug, default warn).
"""
from __future__ import annotations

import argparse
import dataclasses
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .actuator import ActuatorParams
from .benchsim import SineBackdriveSpec, simulate_backdrive, simulate_grid, simulate_step
from .config import RunConfig, load_config
from .control import ExoConfig, Layout, assist_torques
from .emg import (
    MUSCLES, ensemble_average, envelope, format_table, metrics_to_csv, normalize_mvc,
    read_metrics_csv, read_recording, crop_reps, summarize,
)
from .errors import ConfigError, ExokitError, InputError
from .report import (
    build_bundle, columns_to_csv, dump_json, fit_report_dict, fit_report_text,
    squat_results_csv, squat_series_csv, write_text,
)
from .squat import SquatSpec, simulate_squat
from .sysid import fit_inertia, fit_torque_model
from .trial import TrialLog, read_trial_csv, write_trial_csv

log = logging.getLogger("exokit")

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_USAGE = 0, 2, 3, 64
LOG_LEVELS = {"error": logging.ERROR, "warn": logging.WARNING, "warning": logging.WARNING,
              "info": logging.INFO, "debug": logging.DEBUG}


class Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _u64(text: str) -> int:
    try:
        value = int(text, 0)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return value


def _common(p: argparse.ArgumentParser, full: bool = True) -> None:
    p.add_argument("--version", action="version", version=f"exokit {__version__}")
    if not full:
        return
    p.add_argument("--config", type=Path, help="YAML run configuration")
    p.add_argument("--seed", type=_u64, help="RNG seed (unsigned 64-bit)")
    p.add_argument("--out", type=Path, help="output directory")


def build_parser() -> Parser:
    parser = Parser(prog="exokit", description="Exoskeleton actuator, controller and EMG toolkit.")
    parser.add_argument("--version", action="version", version=f"exokit {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=Parser, metavar="COMMAND")
    sub.required = True

    p = sub.add_parser("sysid", help="fit the actuator torque model (and inertia) from trial CSVs")
    _common(p)
    p.add_argument("trials", nargs="*", type=Path, help="constant torque/speed trial CSV(s)")
    p.add_argument("--inertia", action="append", type=Path, default=None,
                   metavar="BACKDRIVE_CSV", help="backdrive trial for the inertia stage (repeatable)")
    p.add_argument("--gear-ratio", type=float)

    p = sub.add_parser("simulate", help="generate synthetic trials")
    _common(p, full=False)
    sim = p.add_subparsers(dest="kind", parser_class=Parser, metavar="KIND")
    sim.required = True

    q = sim.add_parser("backdrive", help="sinusoidal dynamic backdrive trial(s)")
    _common(q)
    q.add_argument("--freq", type=float, nargs="+", help="sine frequency in Hz (one file each)")
    q.add_argument("--amp-p2p-deg", type=float, help="peak-to-peak amplitude in degrees")
    q.add_argument("--duration", type=float)
    q.add_argument("--sample-rate", type=float)
    q.add_argument("--noise", type=float, help="torque noise sigma in Nm")

    q = sim.add_parser("grid", help="constant torque/speed characterisation grid")
    _common(q)
    q.add_argument("--speeds", type=float, nargs="+", help="speeds in deg/s")
    q.add_argument("--torques", type=float, nargs="+", help="torques in Nm")
    q.add_argument("--dwell", type=float)
    q.add_argument("--sample-rate", type=float)
    q.add_argument("--noise", type=float, help="torque noise sigma in Nm")

    q = sim.add_parser("step", help="locked-output torque step test")
    _common(q)
    q.add_argument("--tau", type=float, help="target torque in Nm")
    q.add_argument("--duration", type=float)
    q.add_argument("--sample-rate", type=float)

    q = sim.add_parser("squat", help="lifting-and-lowering squat task with assist")
    _common(q)
    q.add_argument("--layout", choices=[m.value for m in Layout])
    q.add_argument("--alpha", type=float)
    q.add_argument("--mass", type=float, help="subject mass in kg")
    q.add_argument("--reps", type=int)
    q.add_argument("--payload", type=float)
    q.add_argument("--cadence", type=float)
    q.add_argument("--depth-deg", type=float, nargs=3, metavar=("THIGH", "HIP", "KNEE"))

    p = sub.add_parser("control-eval", help="tabulate assist torques over an angle sweep")
    _common(p)
    p.add_argument("--layout", choices=[m.value for m in Layout], action="append")
    p.add_argument("--theta-t-deg", type=float, nargs=3, default=(-30.0, 90.0, 15.0),
                   metavar=("START", "STOP", "STEP"))
    p.add_argument("--theta-h-deg", type=float, nargs=3, default=(-30.0, 120.0, 15.0),
                   metavar=("START", "STOP", "STEP"))
    p.add_argument("--alpha", type=float)
    p.add_argument("--mass", type=float)

    p = sub.add_parser("emg", help="EMG effort/peak analysis and table report")
    _common(p)
    p.add_argument("--trial", action="append", default=[], metavar="MODE:EMG_CSV:THIGH_CSV",
                   help="one squat trial per experimental mode (repeatable)")
    p.add_argument("--mvc", type=Path, help="MVC recording CSV with the same channels")
    p.add_argument("--reps", type=int, help="expected repetitions per trial")
    p.add_argument("--mvc-percentile", type=float, help="use this percentile instead of the max")
    p.add_argument("--replay", type=Path, help="re-tabulate an existing rep-metrics CSV")

    p = sub.add_parser("report", help="gather outputs into one bundle with a manifest")
    _common(p)
    p.add_argument("inputs", nargs="+", type=Path, help="result directories or files")
    return parser


def _config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out = args.out
    if cfg.out is None:
        cfg.out = Path(".")
    return cfg


def _pick(value, default):
    return default if value is None else value


def _meta(args, cfg: RunConfig, **extra) -> dict:
    return {"exokit_version": __version__, "command": args.command,
            "kind": getattr(args, "kind", None), "seed": cfg.seed, **extra}


def cmd_sysid(args) -> int:
    cfg = _config(args)
    paths = list(args.trials) or list(cfg.inputs.trial)
    if not paths:
        raise InputError("no trial CSV given")
    trials = [read_trial_csv(p) for p in paths]
    trial = trials[0] if len(trials) == 1 else TrialLog.concatenate(trials)
    gear = _pick(args.gear_ratio, cfg.actuator.gear_ratio)
    report = fit_torque_model(trial, gear, k_t_nominal=cfg.actuator.k_t_nominal)
    inertia = None
    backdrive = args.inertia if args.inertia else list(cfg.inputs.inertia)
    if backdrive:
        inertia = fit_inertia([read_trial_csv(p) for p in backdrive], report.params)
    write_text(cfg.out / "fit_report.txt", fit_report_text(report, inertia))
    write_text(cfg.out / "fit_report.json", dump_json(fit_report_dict(report, inertia)))
    log.info("fit written to %s", cfg.out)
    return EXIT_OK


def cmd_simulate(args) -> int:
    cfg = _config(args)
    params: ActuatorParams = cfg.actuator
    out = cfg.out
    if args.kind == "backdrive":
        sec = cfg.backdrive
        freqs = args.freq or list(sec.freqs)
        amp = np.deg2rad(_pick(args.amp_p2p_deg, sec.amp_p2p_deg)) / 2
        noise = _pick(args.noise, sec.noise_sigma)
        files = []
        for k, f in enumerate(freqs):
            spec = SineBackdriveSpec(freq=f, amplitude=amp,
                                     duration=_pick(args.duration, sec.duration),
                                     sample_rate=_pick(args.sample_rate, sec.sample_rate))
            trial = simulate_backdrive(spec, params, noise, seed=[cfg.seed, k])
            name = f"backdrive_{f:g}hz.csv"
            write_trial_csv(trial, out / name)
            files.append({"file": name, "spec": spec,
                          "peak_abs_torque": float(np.max(np.abs(trial.tau_meas - params.bias)))})
        write_text(out / "backdrive.meta.json",
                   dump_json(_meta(args, cfg, params=params, noise_sigma=noise, trials=files)))
    elif args.kind == "grid":
        sec = cfg.grid
        speeds = args.speeds or list(sec.speeds_deg)
        torques = args.torques or list(sec.torques)
        noise = _pick(args.noise, sec.noise_sigma)
        run = simulate_grid(params, speeds, torques, dwell=_pick(args.dwell, sec.dwell),
                            sample_rate=_pick(args.sample_rate, sec.sample_rate),
                            noise_sigma=noise, seed=cfg.seed)
        write_trial_csv(run.log, out / "grid.csv")
        write_text(out / "grid.meta.json", dump_json(_meta(
            args, cfg, params=params, speeds_deg=speeds, torques=torques, noise_sigma=noise,
            skipped=run.skipped, segments=len(run.segments))))
    elif args.kind == "step":
        sec = cfg.step
        tau = _pick(args.tau, sec.tau_target)
        trial = simulate_step(params, tau, _pick(args.duration, sec.duration),
                              _pick(args.sample_rate, sec.sample_rate))
        write_trial_csv(trial, out / "step.csv")
        write_text(out / "step.meta.json", dump_json(_meta(
            args, cfg, params=params, tau_target=tau,
            commanded_current=float(trial.i_q[-1]), settled_torque=float(trial.tau_meas[-1]))))
    elif args.kind == "squat":
        exo = cfg.exo
        changes = {k: v for k, v in (("layout", args.layout), ("alpha", args.alpha),
                                       ("mass", args.mass)) if v is not None}
        exo = _replace(ExoConfig, exo, changes)
        spec = cfg.squat
        schanges = {k: v for k, v in (("reps", args.reps), ("payload", args.payload),
                                       ("cadence", args.cadence)) if v is not None}
        if args.mass is not None:
            schanges["subject_mass"] = args.mass
        if args.depth_deg is not None:
            schanges["squat_depth"] = tuple(np.deg2rad(args.depth_deg))
        spec = _replace(SquatSpec, spec, schanges)
        result = simulate_squat(spec, exo)
        write_text(out / "squat_results.csv", squat_results_csv(result))
        write_text(out / "squat_timeseries.csv", squat_series_csv(result))
        write_text(out / "squat.meta.json", dump_json(_meta(
            args, cfg, exo=exo, squat=result.metadata,
            reductions=[{"rep": r.rep, "knee_integral_reduction": r.knee_integral_reduction,
                         "hip_integral_reduction": r.hip_integral_reduction} for r in result.reps])))
    return EXIT_OK


def _replace(cls, obj, changes):
    try:
        return dataclasses.replace(obj, **changes)
    except ExokitError as exc:
        raise ConfigError(f"{cls.__name__}: {exc}") from None


def _sweep(start, stop, step):
    if step <= 0 or stop < start:
        raise ConfigError("sweep needs step > 0 and stop >= start")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return start + step * np.arange(n)


def cmd_control_eval(args) -> int:
    cfg = _config(args)
    layouts = args.layout or [m.value for m in Layout]
    tt = _sweep(*args.theta_t_deg)
    th = _sweep(*args.theta_h_deg)
    cols = {"layout": [], "theta_t_deg": [], "theta_h_deg": [], "tau_k": [], "tau_h": []}
    for name in layouts:
        changes = {"layout": Layout(name)}
        if args.alpha is not None:
            changes["alpha"] = args.alpha
        if args.mass is not None:
            changes["mass"] = args.mass
        exo = _replace(ExoConfig, cfg.exo, changes)
        T, Hh = np.meshgrid(tt, th, indexing="ij")
        tq = assist_torques(exo, np.deg2rad(T.ravel()), np.deg2rad(Hh.ravel()))
        n = T.size
        cols["layout"] += [name] * n
        cols["theta_t_deg"] += (T.ravel() + 0.0).tolist()
        cols["theta_h_deg"] += (Hh.ravel() + 0.0).tolist()
        cols["tau_k"] += tq.tau_k.tolist() if tq.tau_k is not None else [""] * n
        cols["tau_h"] += tq.tau_h.tolist() if tq.tau_h is not None else [""] * n
    text = columns_to_csv(cols)
    sys.stdout.write(text)
    if args.out is not None or cfg.out != Path("."):
        write_text(cfg.out / "control_eval.csv", text)
    return EXIT_OK


def _parse_trial_arg(spec: str):
    parts = spec.split(":")
    if len(parts) != 3 or not all(parts):
        raise InputError(f"--trial expects MODE:EMG_CSV:THIGH_CSV, got {spec!r}")
    return parts[0], Path(parts[1]), Path(parts[2])


def cmd_emg(args) -> int:
    cfg = _config(args)
    out = cfg.out
    if args.replay is not None:
        metrics = read_metrics_csv(args.replay)
        summaries = {mode: m.summary() for mode, m in metrics.items()}
        text = format_table(summaries, "effort", _muscle_order(summaries)) + "\n" + \
            format_table(summaries, "peak", _muscle_order(summaries))
        sys.stdout.write(text)
        write_text(out / "emg_report.txt", text)
        return EXIT_OK
    if not args.trial:
        raise InputError("give at least one --trial MODE:EMG_CSV:THIGH_CSV (or --replay)")
    if args.mvc is None:
        raise InputError("--mvc recording is required to normalise to %MVC")
    mvc = read_recording(args.mvc)
    mvc_env = {ch: envelope(x, mvc.sample_rate) for ch, x in mvc.channels.items()}
    metrics, ensembles = {}, {}
    for spec in args.trial:
        mode, emg_path, thigh_path = _parse_trial_arg(spec)
        rec = read_recording(emg_path, thigh_path)
        missing = sorted(set(rec.channels) - set(mvc_env))
        if missing:
            raise InputError(f"{emg_path}: channel(s) {', '.join(missing)} absent from MVC recording")
        reps = crop_reps(rec.thigh_on_emg_clock(), args.reps)
        pct = {ch: normalize_mvc(envelope(x, rec.sample_rate), mvc_env[ch], args.mvc_percentile)
               for ch, x in rec.channels.items()}
        metrics[mode] = summarize(pct, reps, rec.sample_rate)
        for ch, series in pct.items():
            cyc, mean, sd = ensemble_average(series, reps)
            ensembles.setdefault("cycle_pct", cyc)
            ensembles[f"{mode}_{ch}_mean"] = mean
            ensembles[f"{mode}_{ch}_sd"] = sd
    summaries = {mode: m.summary() for mode, m in metrics.items()}
    order = _muscle_order(summaries)
    text = format_table(summaries, "effort", order) + "\n" + format_table(summaries, "peak", order)
    write_text(out / "rep_metrics.csv", metrics_to_csv(metrics))
    write_text(out / "emg_report.txt", text)
    write_text(out / "ensemble.csv", columns_to_csv(ensembles))
    sys.stdout.write(text)
    return EXIT_OK


def _muscle_order(summaries) -> list[str]:
    present = []
    for s in summaries.values():
        present += [c for c in s if c not in present]
    return [m for m in MUSCLES if m in present] + [c for c in present if c not in MUSCLES]


def cmd_report(args) -> int:
    cfg = _config(args)
    for p in args.inputs:
        if not p.exists():
            raise InputError(f"report input does not exist: {p}")
    manifest = build_bundle(list(args.inputs), cfg.out)
    log.info("bundle manifest at %s", manifest)
    return EXIT_OK


COMMANDS = {"sysid": cmd_sysid, "simulate": cmd_simulate, "control-eval": cmd_control_eval,
            "emg": cmd_emg, "report": cmd_report}


def _setup_logging() -> None:
    level = LOG_LEVELS.get(os.environ.get("EXOKIT_LOG", "warn").lower(), logging.WARNING)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("exokit: %(levelname)s: %(message)s"))
    root = logging.getLogger("exokit")
    root.handlers[:] = [handler]
    root.setLevel(level)
    root.propagate = False


def main(argv=None) -> int:
    _setup_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args)
    except ExokitError as exc:
        log.error("%s", exc)
        return exc.exit_code
    except OSError as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
