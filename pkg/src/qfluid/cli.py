"""Command-line front end.

Usage::

    qfluid run --config run.json
    qfluid certify --config cert.json
    qfluid sweep --config sweep.json
    qfluid oracle-compare --config madelung.json
    qfluid report <run_dir>

All numerics come from the JSON configuration, which is validated against
:data:`CONFIG_SCHEMA` before anything is computed.  Exit codes are 0 on
success, 2 for configuration or input errors and 3 for numerical failure
(blow-up or vacuum; partial outputs are kept).  The last line written to
standard error is always a JSON object ``{"status": ..., "reason": ...}``.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
from dataclasses import fields
from pathlib import Path

import jsonschema
import numpy as np

from . import certify as cf
from . import functionals as fn
from .errors import BlowupError, ConfigError, MissingDataError, QFluidError, VacuumError
from .grid import TorusGrid
from .io import load_state, write_trajectory
from .oracle import run_sl
from .recipes import RECIPES, make_initial
from .solver import SCHEMES, SolverConfig, run
from .state import (AugmentedState, Params, WaveFunction, augment, deaugment,
                    inverse_madelung, madelung)

__all__ = ["main", "CONFIG_SCHEMA", "load_config", "report"]

MODES = ("reg_nslk", "aug_nslk", "elk", "sl", "oracle_compare", "certify", "sweep")
_COMMAND_MODES = {
    "run": ("reg_nslk", "aug_nslk", "elk", "sl"),
    "certify": ("certify",),
    "sweep": ("sweep",),
    "oracle-compare": ("oracle_compare",),
}
EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

_num = {"type": "number"}
_PARAM_PROPS = {("lambda" if f.name == "lam" else f.name): dict(_num) for f in fields(Params)}
_PARAM_PROPS["s"] = {"type": "integer", "minimum": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["mode", "grid", "solver", "initial_data"],
    "properties": {
        "mode": {"enum": list(MODES)},
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "required": ["dim", "n"],
            "properties": {"dim": {"enum": [1, 2, 3]},
                           "n": {"type": "integer", "minimum": 8, "multipleOf": 2}},
        },
        "params": {"type": "object", "additionalProperties": False, "properties": _PARAM_PROPS},
        "solver": {
            "type": "object",
            "additionalProperties": False,
            "required": ["dt", "t_end"],
            "properties": {
                "dt": {"type": "number", "exclusiveMinimum": 0},
                "t_end": {"type": "number", "exclusiveMinimum": 0},
                "scheme": {"enum": list(SCHEMES)},
                "dealias": {"type": "boolean"},
                "report_every": {"type": "integer", "minimum": 1},
                "density_floor": {"type": "number", "exclusiveMinimum": 0},
                "gmres_rtol": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "initial_data": {
            "type": "object",
            "additionalProperties": False,
            "required": ["recipe"],
            "properties": {
                "recipe": {"enum": sorted(RECIPES) + ["snapshot"]},
                "params": {"type": "object"},
                "path": {"type": "string"},
            },
        },
        "reference": {
            "type": "object",
            "required": ["name"],
            "properties": {"name": {"enum": ["zero", "uniform", "traveling_wave", "random"]}},
        },
        "certificate": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "C": {"type": "number", "minimum": 0},
                "c_struct": {"type": "number", "exclusiveMinimum": 0},
                "tol_cert": {"type": "number", "minimum": 0},
                "include_b": {"type": "boolean"},
            },
        },
        "nu_list": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
        "output_dir": {"type": "string"},
        "seed": {"type": "integer"},
        "workers": {"type": "integer", "minimum": 1},
        "save_snapshots": {"type": "boolean"},
    },
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(message)


def load_config(path) -> dict:
    """Read and validate a configuration.

    A ``run.json`` written by a previous run is accepted as well; its
    ``config`` entry is used.
    """
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from None
    except json.JSONDecodeError as e:
        raise ConfigError(f"{path} is not valid JSON: {e}") from None
    if isinstance(doc, dict) and "config" in doc and "status" in doc:
        doc = doc["config"]
    try:
        jsonschema.validate(doc, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"config {where}: {e.message}") from None
    return doc


def _output_dir(cfg) -> Path:
    return Path(os.environ.get("QFLUID_OUT") or cfg.get("output_dir") or f"qfluid_out/{cfg['mode']}")


def _setup(cfg):
    grid = TorusGrid(cfg["grid"]["dim"], cfg["grid"]["n"])
    params = Params.from_dict(cfg.get("params", {}))
    scfg = SolverConfig(**cfg["solver"])
    init = cfg["initial_data"]
    if init["recipe"] == "snapshot":
        if "path" not in init:
            raise ConfigError("snapshot recipe needs initial_data.path")
        st, _ = load_state(init["path"])
        if st.grid != grid:
            raise ConfigError(f"snapshot grid {st.grid} differs from configured {grid}")
        if isinstance(st, WaveFunction):
            st = madelung(st, params)
        elif isinstance(st, AugmentedState):
            st = deaugment(st, params)
    else:
        kw = dict(init.get("params", {}))
        if init["recipe"] == "random" and "seed" in cfg:
            kw.setdefault("seed", cfg["seed"])
        st = make_initial(init["recipe"], grid, params, **kw)
    return grid, params, scfg, st


def _need_inviscid(params, mode):
    if params.nu != 0:
        raise ConfigError(f"mode {mode!r} is inviscid; set nu = 0 (got {params.nu})")


def _run_info(cfg, params, status="ok", reason="", **extra):
    info = {"config": cfg, "mode": cfg["mode"], "params": params.to_dict(),
            "status": status, "reason": reason}
    info.update(extra)
    return info


def _sl_reports(waves, params):
    out = []
    for w in waves:
        st = madelung(w, params)
        E, D = fn.energy_nslk(st, params)
        out.append(fn.EntropyReport(time=w.time, mass=w.norm2, energy_nslk=E,
                                    dissipation_nslk=D))
    return out


def _cmd_run(cfg, out: Path):
    grid, p, scfg, initial = _setup(cfg)
    mode = cfg["mode"]
    save = cfg.get("save_snapshots", True)
    if mode == "sl":
        _need_inviscid(p, mode)
        wave = inverse_madelung(initial, p)
        status, reason = "ok", ""
        try:
            tr = run_sl(wave, p, scfg.dt, scfg.t_end, save_every=scfg.report_every)
            waves = tr.waves
        except VacuumError as e:
            waves, status, reason = [wave], "vacuum", str(e)
        write_trajectory(out, waves if save else [], _sl_reports(waves, p),
                         _run_info(cfg, p, status, reason), p)
        return status, reason, f"sl: {len(waves)} snapshots, final time {waves[-1].time:.6g}"
    if mode == "reg_nslk":
        start = initial
    else:
        if mode == "elk":
            _need_inviscid(p, mode)
        start = augment(initial, p)
    traj = run(start, p, scfg)
    info = _run_info(cfg, p, traj.status, traj.reason, steps_taken=traj.steps_taken,
                     implicit_iterations=traj.implicit_iterations)
    write_trajectory(out, traj.states if save else [], traj.reports, info, p)
    s = traj.series
    drift = abs(s["mass"][-1] - s["mass"][0]) / abs(s["mass"][0])
    return traj.status, traj.reason, (f"{mode}: {traj.steps_taken} steps, "
                                      f"relative mass drift {drift:.3e}")


def _cmd_certify(cfg, out: Path):
    grid, p, scfg, initial = _setup(cfg)
    spec = cf.u_spec_from_dict(cfg.get("reference", {"name": "traveling_wave"}))
    cc = cfg.get("certificate", {})
    ref = cf.manufactured_reference(spec, initial.rho, p, scfg.dt, scfg.t_end, grid=grid,
                                    mode="nslk" if p.nu else "elk", dealias=scfg.dealias)
    traj = run(augment(initial, p), p, scfg, refs=ref, with_functionals=False,
               keep_states=cfg.get("save_snapshots", True))
    info = _run_info(cfg, p, traj.status, traj.reason, steps_taken=traj.steps_taken)
    if not traj.ok:
        write_trajectory(out, traj.states, traj.reports, info, p)
        return traj.status, traj.reason, "certify: weak run stopped early"
    c_struct = cc.get("c_struct", cf.C_STRUCT)
    C = cc["C"] if "C" in cc else cf.estimate_C(ref, p, c_struct=c_struct)
    cert = cf.gronwall_certificate(traj, ref, p, C, tol_cert=cc.get("tol_cert"),
                                   include_b=cc.get("include_b", True), c_struct=c_struct)
    info["verdict"] = cert.verdict
    write_trajectory(out, traj.states if cfg.get("save_snapshots", True) else [],
                     traj.reports, info, p)
    cf.write_certificate(cert, out / "certificate.json")
    return "ok", "", (f"certificate: verdict={cert.verdict} margin={cert.margin:.6e} "
                      f"C_used={cert.C_used:.6g}")


def _cmd_sweep(cfg, out: Path):
    grid, p, scfg, initial = _setup(cfg)
    if "nu_list" not in cfg:
        raise ConfigError("sweep mode needs nu_list")
    spec = cf.u_spec_from_dict(cfg.get("reference", {"name": "traveling_wave"}))
    rep = cf.inviscid_sweep(initial, p, cfg["nu_list"], scfg, spec, workers=cfg.get("workers", 1))
    out.mkdir(parents=True, exist_ok=True)
    cf.write_sweep(rep, out / "sweep.csv")
    with open(out / "sweep.json", "w") as fh:
        json.dump(rep.to_dict(), fh, indent=1)
    failed = [r for r in rep.rows if r.verdict == "error"]
    status = "ok" if not failed else "partial"
    reason = "; ".join(f"nu={r.nu:g}: {r.reason}" for r in failed)
    write_trajectory(out, [], None, _run_info(cfg, p, status, reason, monotone=rep.monotone,
                                              order=rep.order), p)
    lines = [f"nu={r.nu:g} relE_ref={r.relE_ref} relE_oracle={r.relE_oracle} verdict={r.verdict}"
             for r in rep.rows]
    lines.append(f"monotone={rep.monotone} order={rep.order}")
    return status, reason, "\n".join(lines)


def _cmd_oracle(cfg, out: Path):
    grid, p, scfg, initial = _setup(cfg)
    _need_inviscid(p, "oracle_compare")
    res = cf.oracle_compare(initial, p, scfg.dt, scfg.t_end, scfg.dealias)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "oracle_compare.json", "w") as fh:
        json.dump(res, fh, indent=1)
    write_trajectory(out, [], None, _run_info(cfg, p, **res), p)
    return "ok", "", (f"oracle-compare: t={res['time']:.6g} l1_density={res['l1_density']:.6e} "
                      f"max_density={res['max_density']:.6e} l1_momentum={res['l1_momentum']:.6e}")


_COMMANDS = {"run": _cmd_run, "certify": _cmd_certify, "sweep": _cmd_sweep,
             "oracle-compare": _cmd_oracle}


# -- report -------------------------------------------------------------------------------


def _finite(v):
    return v != "" and math.isfinite(float(v))


def report(run_dir) -> list[str]:
    """Summarize ``run_dir/reports.csv`` and write ``plotdata_<name>.csv`` files.

    Besides the report columns, ``u_rms = sqrt(D / (mu * mass))`` is emitted
    when the drag is positive: for a uniform density without viscosity it is
    the root-mean-square velocity.

    Returns the summary lines.
    """
    d = Path(run_dir)
    path = d / "reports.csv"
    if not path.is_file():
        raise MissingDataError(f"{d} has no reports.csv")
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise MissingDataError(f"{path} has no rows")
    cols = {k: [] for k in rows[0] if k != "time"}
    times = [float(r["time"]) for r in rows]
    for k in cols:
        cols[k] = [(t, float(r[k])) for t, r in zip(times, rows) if _finite(r[k])]
    mu = None
    info_path = d / "run.json"
    if info_path.is_file():
        with open(info_path) as fh:
            mu = json.load(fh).get("params", {}).get("mu")
    if mu and cols.get("D"):
        mass = {t: float(r["mass"]) for t, r in zip(times, rows)}
        cols["u_rms"] = [(t, math.sqrt(max(v, 0.0) / (mu * mass[t]))) for t, v in cols["D"]]
    lines = [f"{d}: {len(rows)} report rows, t in [{times[0]:.6g}, {times[-1]:.6g}]"]
    for k, series in cols.items():
        if not series:
            continue
        vals = np.array([v for _, v in series])
        lines.append(f"{k:>10s}: min={vals.min():.6e} max={vals.max():.6e} final={vals[-1]:.6e}")
        with open(d / f"plotdata_{k}.csv", "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["time", "value"])
            w.writerows((repr(t), repr(v)) for t, v in series)
    cert_path = d / "certificate.json"
    if cert_path.is_file():
        with open(cert_path) as fh:
            c = json.load(fh)
        lines.append(f"certificate: verdict={c['verdict']} margin={c['margin']:.6e} "
                     f"C_used={c['C_used']:.6g}")
    return lines


# -- entry point ----------------------------------------------------------------------------


def _parser():
    ap = _Parser(prog="qfluid", description="Quantum-fluid solver, oracle and certificates.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON run configuration")
    sp = sub.add_parser("report")
    sp.add_argument("run_dir")
    return ap


def _finish(status, reason, code):
    print(json.dumps({"status": status, "reason": reason}), file=sys.stderr)
    return code


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
        if args.command == "report":
            print("\n".join(report(args.run_dir)))
            return _finish("ok", "", EXIT_OK)
        cfg = load_config(args.config)
        if cfg["mode"] not in _COMMAND_MODES[args.command]:
            raise ConfigError(f"mode {cfg['mode']!r} does not belong to the "
                              f"{args.command!r} command; use one of {_COMMAND_MODES[args.command]}")
        status, reason, summary = _COMMANDS[args.command](cfg, _output_dir(cfg))
    except (VacuumError, BlowupError) as e:
        return _finish("numerical_failure", str(e), EXIT_NUMERIC)
    except (QFluidError, ValueError, OSError) as e:
        return _finish("config_error", str(e), EXIT_CONFIG)
    print(summary)
    if status in ("vacuum", "blowup"):
        return _finish("numerical_failure", reason, EXIT_NUMERIC)
    if status == "partial":
        return _finish("partial", reason, EXIT_NUMERIC)
    return _finish("ok", "", EXIT_OK)
