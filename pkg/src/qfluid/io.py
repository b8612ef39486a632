"""Snapshot files and trajectory directories.

A snapshot is a one-line ASCII header ``QFLD1 dim=<d> n=<n> comps=<c>``
followed by little-endian float64 values laid out as an ``(n, ..., n, c)``
C-order array: spatial axes first, component index fastest.

States are written as one snapshot holding all their components and a JSON
sidecar (``<path>.json``) with the time, the parameters and the component
names, so a file can be read back without knowing what produced it.
"""
from __future__ import annotations

import json
import os
import re
from pathlib import Path

import numpy as np

from .errors import MissingDataError
from .functionals import write_reports
from .grid import TorusGrid
from .state import AugmentedState, FluidState, Params, WaveFunction

__all__ = [
    "write_qfld",
    "read_qfld",
    "save_state",
    "load_state",
    "write_trajectory",
]

_HEADER = re.compile(r"^QFLD1 dim=(\d+) n=(\d+) comps=(\d+)$")
_LE = np.dtype("<f8")


def write_qfld(path, data: np.ndarray, dim: int) -> None:
    """Write ``data`` of shape ``(n,)*dim`` or ``(n,)*dim + (comps,)``."""
    a = np.asarray(data, dtype=float)
    if a.ndim == dim:
        a = a[..., None]
    if a.ndim != dim + 1 or len(set(a.shape[:dim])) != 1:
        raise ValueError(f"cannot write array of shape {a.shape} as a {dim}-D snapshot")
    n, comps = a.shape[0], a.shape[-1]
    with open(path, "wb") as fh:
        fh.write(f"QFLD1 dim={dim} n={n} comps={comps}\n".encode("ascii"))
        fh.write(np.ascontiguousarray(a, dtype=_LE).tobytes())


def read_qfld(path) -> np.ndarray:
    """Read a snapshot as an ``(n,)*dim + (comps,)`` array."""
    path = Path(path)
    if not path.is_file():
        raise MissingDataError(f"no snapshot at {path}")
    with open(path, "rb") as fh:
        head = fh.readline().decode("ascii", errors="replace").strip()
        m = _HEADER.match(head)
        if not m:
            raise ValueError(f"{path}: not a QFLD1 file (header {head!r})")
        dim, n, comps = map(int, m.groups())
        buf = fh.read()
    shape = (n,) * dim + (comps,)
    want = int(np.prod(shape)) * 8
    if len(buf) != want:
        raise ValueError(f"{path}: expected {want} data bytes, found {len(buf)}")
    return np.frombuffer(buf, dtype=_LE).reshape(shape).astype(float)


def _components(state):
    """Component stack (first axis) and names for a state."""
    if isinstance(state, FluidState):
        d = state.grid.dim
        return np.concatenate([state.rho[None], state.u]), ["rho"] + [f"u{i}" for i in range(d)], "fluid"
    if isinstance(state, AugmentedState):
        d = state.grid.dim
        names = ["rho"] + [f"w{i}" for i in range(d)] + [f"vbar{i}" for i in range(d)]
        return np.concatenate([state.rho[None], state.w, state.vbar]), names, "augmented"
    if isinstance(state, WaveFunction):
        return np.stack([state.psi.real, state.psi.imag]), ["re", "im"], "wave"
    raise TypeError(f"cannot serialize {type(state).__name__}")


def save_state(state, path, params: Params | None = None) -> None:
    """Write ``state`` to ``path`` plus the sidecar ``path + '.json'``."""
    stack, names, kind = _components(state)
    write_qfld(path, np.moveaxis(stack, 0, -1), state.grid.dim)
    side = {"time": state.time, "kind": kind, "components": names,
            "params": params.to_dict() if params is not None else None}
    with open(str(path) + ".json", "w") as fh:
        json.dump(side, fh, indent=1)


def load_state(path):
    """Read a state written by :func:`save_state`.

    Returns
    -------
    state, params
        ``params`` is ``None`` when the sidecar recorded none.
    """
    side_path = Path(str(path) + ".json")
    if not side_path.is_file():
        raise MissingDataError(f"no sidecar at {side_path}")
    with open(side_path) as fh:
        side = json.load(fh)
    a = read_qfld(path)
    dim, n = a.ndim - 1, a.shape[0]
    g = TorusGrid(dim, n)
    c = np.moveaxis(a, -1, 0)
    kind, t = side["kind"], side["time"]
    if kind == "fluid":
        st = FluidState(g, c[0], c[1:], t)
    elif kind == "augmented":
        st = AugmentedState(g, c[0], c[1:1 + dim], c[1 + dim:], t)
    elif kind == "wave":
        st = WaveFunction(g, c[0] + 1j * c[1], t)
    else:
        raise ValueError(f"unknown state kind {kind!r} in {side_path}")
    p = side.get("params")
    return st, (Params.from_dict(p) if p is not None else None)


def write_trajectory(out_dir, states, reports, run_info: dict, params: Params | None = None) -> Path:
    """Lay out ``snapshots/t_<index>.qfld``, ``reports.csv`` and ``run.json``."""
    out = Path(out_dir)
    snap = out / "snapshots"
    snap.mkdir(parents=True, exist_ok=True)
    for i, s in enumerate(states):
        save_state(s, snap / f"t_{i:05d}.qfld", params)
    if reports is not None:
        write_reports(out / "reports.csv", reports)
    tmp = out / "run.json.tmp"
    with open(tmp, "w") as fh:
        json.dump(run_info, fh, indent=1, sort_keys=False)
    os.replace(tmp, out / "run.json")
    return out
