r"""Manufactured references, Gronwall certificates and the inviscid sweep.

A weak trajectory :math:`(\rho, u)` is certified against a smooth reference
:math:`(R, U)` when its relative entropy obeys

.. math::

    \mathcal E(t) \le \mathcal E(0)e^{Ct} + b(t) + C\int_0^t b(s)e^{C(t-s)}\,ds,
    \qquad b(t) = \int_0^t\int \frac{\rho}{R}|\mathcal E(R,U)\cdot(U - u)|,

at every sampled time.  The constant :math:`C` is not known in closed form;
:func:`estimate_C` supplies a deterministic bound-shaped estimate built from
sup-norms of the reference fields, and every certificate records the value
it used.
"""
from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from . import functionals as fn
from .errors import GridMismatchError, MassMismatchError, ParamError, QFluidError
from .grid import TorusGrid
from .oracle import run_sl
from .solver import SolverConfig, Trajectory, run
from .state import FluidState, Params, augment, deaugment, inverse_madelung, madelung

__all__ = [
    "Zero",
    "Uniform",
    "TravelingWave",
    "RandomBandlimited",
    "u_spec_from_dict",
    "ReferenceTrajectory",
    "manufactured_reference",
    "estimate_C",
    "Certificate",
    "gronwall_certificate",
    "write_certificate",
    "oracle_compare",
    "SweepRow",
    "SweepReport",
    "inviscid_sweep",
    "write_sweep",
    "C_STRUCT",
]

# number of bounded bilinear remainder terms in the relative-entropy estimate
C_STRUCT = 8.0
TIME_TOL = 1e-9


# -- reference velocity recipes --------------------------------------------------------


@dataclass(frozen=True)
class Zero:
    """``U = 0``."""

    name = "zero"

    def U(self, grid: TorusGrid, t: float):
        return grid.zeros_vector()

    def dUdt(self, grid: TorusGrid, t: float):
        return grid.zeros_vector()

    def to_dict(self):
        return {"name": self.name}


@dataclass(frozen=True)
class Uniform:
    """Constant velocity ``U = c``."""

    c: tuple = (0.1,)
    name = "uniform"

    def U(self, grid, t):
        c = np.resize(np.asarray(self.c, float), grid.dim)
        return np.broadcast_to(c.reshape((grid.dim,) + (1,) * grid.dim),
                               (grid.dim,) + grid.shape).copy()

    def dUdt(self, grid, t):
        return grid.zeros_vector()

    def to_dict(self):
        return {"name": self.name, "c": list(self.c)}


@dataclass(frozen=True)
class TravelingWave:
    """``U = amp sin(k x_axis - speed t) e_axis``."""

    amp: float = 0.1
    k: int = 1
    speed: float = 1.0
    axis: int = 0
    name = "traveling_wave"

    def _phase(self, grid, t):
        return self.k * grid.x[self.axis] - self.speed * t

    def U(self, grid, t):
        out = grid.zeros_vector()
        out[self.axis] = self.amp * np.sin(self._phase(grid, t))
        return out

    def dUdt(self, grid, t):
        out = grid.zeros_vector()
        out[self.axis] = -self.amp * self.speed * np.cos(self._phase(grid, t))
        return out

    def to_dict(self):
        return {"name": self.name, "amp": self.amp, "k": self.k, "speed": self.speed,
                "axis": self.axis}


@dataclass(frozen=True)
class RandomBandlimited:
    """Steady random velocity with modes ``|k_i| <= kmax``, scaled to max-norm ``amp``."""

    seed: int = 0
    kmax: int = 4
    amp: float = 0.1
    name = "random"

    def U(self, grid, t):
        rng = np.random.default_rng(self.seed)
        f = grid.project(rng.standard_normal((grid.dim,) + grid.shape), self.kmax)
        return self.amp * f / np.max(np.abs(f))

    def dUdt(self, grid, t):
        return grid.zeros_vector()

    def to_dict(self):
        return {"name": self.name, "seed": self.seed, "kmax": self.kmax, "amp": self.amp}


_SPECS = {c.name: c for c in (Zero, Uniform, TravelingWave, RandomBandlimited)}


def u_spec_from_dict(d: dict):
    """Build a velocity recipe from ``{"name": ..., **parameters}``."""
    d = dict(d)
    name = d.pop("name")
    if name not in _SPECS:
        raise ParamError(f"unknown reference velocity {name!r}; choose from {sorted(_SPECS)}")
    if name == "uniform" and "c" in d:
        d["c"] = tuple(d["c"])
    return _SPECS[name](**d)


# -- manufactured references --------------------------------------------------------------


class ReferenceTrajectory:
    """Reference density stored at every solver step, with lazily built fields.

    Calling the object with a time returns the
    :class:`~qfluid.functionals.StrongReference` at that step.
    """

    def __init__(self, grid, params, spec, mode, t0, dt, densities):
        self.grid = grid
        self.params = params
        self.spec = spec
        self.mode = mode
        self.t0 = t0
        self.dt = dt
        self.R = densities
        self._cache = {}

    @property
    def times(self):
        return [self.t0 + i * self.dt for i in range(len(self.R))]

    def index(self, t: float) -> int:
        i = int(round((t - self.t0) / self.dt))
        if i < 0 or i >= len(self.R) or abs(self.t0 + i * self.dt - t) > TIME_TOL * max(1.0, abs(t)):
            raise GridMismatchError(f"time {t} is not on the reference time grid")
        return i

    def at_index(self, i: int) -> fn.StrongReference:
        ref = self._cache.get(i)
        if ref is None:
            t = self.t0 + i * self.dt
            g = self.grid
            ref = fn.make_reference(g, self.R[i], self.spec.U(g, t), self.params,
                                    self.spec.dUdt(g, t), t, self.mode)
            # the solver walks forward in time; keep only the latest entry
            self._cache = {i: ref}
        return ref

    def __call__(self, t: float) -> fn.StrongReference:
        return self.at_index(self.index(t))


def manufactured_reference(spec, R0, params: Params, dt: float, t_end: float,
                           grid: TorusGrid | None = None, mode: str = "elk",
                           dealias: bool = True, t0: float = 0.0) -> ReferenceTrajectory:
    r"""Advance :math:`R_t + \mathrm{div}(RU) = 0` with the prescribed ``U``.

    Uses classical RK4 with the same spectral operators and dealiasing as the
    solver.  ``mode`` selects the ELK fields or the viscous NSLK fields and
    error field.
    """
    if grid is None:
        raise ParamError("manufactured_reference needs the grid")
    g = grid
    R = np.array(R0, dtype=float)
    if dealias:
        R = g.dealias(R)
    fn.checked_density(R, params.density_floor)
    n = int(round(t_end / dt))

    def f(Rv, t):
        out = -g.divergence(Rv * spec.U(g, t))
        return g.dealias(out) if dealias else out

    Rs = [R]
    for i in range(n):
        t = t0 + i * dt
        k1 = f(R, t)
        k2 = f(R + 0.5 * dt * k1, t + 0.5 * dt)
        k3 = f(R + 0.5 * dt * k2, t + 0.5 * dt)
        k4 = f(R + dt * k3, t + dt)
        R = R + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
        fn.checked_density(R, params.density_floor)
        Rs.append(R)
    return ReferenceTrajectory(g, params, spec, mode, t0, dt, Rs)


def estimate_C(ref: ReferenceTrajectory, params: Params, c_struct: float = C_STRUCT,
               stride: int = 1) -> float:
    r"""Deterministic Gronwall constant.

    .. math::

        C = c_{struct}\Big(1 + \sup_t\big(\|\nabla\bar V\|_\infty + \|\nabla W\|_\infty
            + \|\bar V\|_\infty + \|W\|_\infty + \|\nabla\log R\|_\infty\big)\Big)
            \Big(1 + \frac{\nu}{\hbar_\nu}\Big)

    with pointwise Euclidean (vectors) and Frobenius (tensors) norms.
    """
    g = ref.grid
    p = params
    nu_fac = 1.0 + (p.nu / p.hbar_nu if p.nu else 0.0)
    sup = 0.0
    for i in range(0, len(ref.R), stride):
        t = ref.t0 + i * ref.dt
        R = fn.checked_density(ref.R[i], p.density_floor)
        U = ref.spec.U(g, t)
        glog = g.gradient(np.log(R))
        if ref.mode == "elk":
            W, V = U, 0.5 * p.hbar * glog
        else:
            W, V = U + 0.5 * p.nu * glog, 0.5 * p.hbar_nu * glog
        val = sum(float(np.max(np.sqrt(g.norm2(a)))) for a in
                  (g.jacobian(V), g.jacobian(W), V, W, glog))
        sup = max(sup, val)
    return float(c_struct * (1.0 + sup) * nu_fac)


# -- certificates -------------------------------------------------------------------------------


@dataclass
class Certificate:
    """Sampled Gronwall inequality; ``verdict`` is ``"pass"`` iff ``margin >= -tol_cert``."""

    times: list
    lhs: list
    rhs: list
    C_used: float
    c_struct: float
    tol_cert: float
    margin: float
    verdict: str
    include_b: bool = True

    @property
    def passed(self) -> bool:
        return self.verdict == "pass"

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("include_b")
        return d


def _gronwall_rhs(times, E0, b, C):
    """``E0 e^{Ct} + b(t) + C int_0^t b(s) e^{C(t-s)} ds`` by trapezoid recursion."""
    rhs = np.empty(len(times))
    conv = 0.0
    for i, t in enumerate(times):
        if i:
            h = t - times[i - 1]
            e = math.exp(C * h)
            conv = e * conv + 0.5 * h * (b[i - 1] * e + b[i])
        rhs[i] = E0 * math.exp(C * (t - times[0])) + b[i] + C * conv
    return rhs


def gronwall_certificate(weak: Trajectory, ref: ReferenceTrajectory, params: Params,
                         C: float, tol_cert: Optional[float] = None,
                         include_b: bool = True, c_struct: float = C_STRUCT) -> Certificate:
    """Evaluate the Gronwall inequality along a weak trajectory.

    ``weak`` must come from :func:`qfluid.solver.run` with ``refs=ref`` so
    that its per-step relative entropy and ``b`` series exist.
    ``include_b=False`` drops the ``b`` terms (adversarial check).

    Raises
    ------
    GridMismatchError
        If the weak series is missing or its times are off the reference grid.
    MassMismatchError
        If the initial masses differ by more than ``1e-9`` relative.
    """
    s = weak.series
    if not s.get("rel_entropy_total"):
        raise GridMismatchError("weak trajectory carries no relative-entropy series")
    times = np.asarray(s["time"], float)
    for t in times:
        ref.index(t)
    if np.any(np.diff(times) <= 0):
        raise GridMismatchError("weak times are not strictly increasing")
    M0 = weak.grid.integrate(ref.R[ref.index(times[0])])
    m0 = s["mass"][0]
    if abs(m0 - M0) > 1e-9 * abs(M0):
        raise MassMismatchError(f"initial masses differ: {m0:.12g} vs {M0:.12g}")
    lhs = np.asarray(s["rel_entropy_total"], float)
    b = np.asarray(s["b"], float) if include_b else np.zeros_like(lhs)
    E0 = float(lhs[0])
    if tol_cert is None:
        tol_cert = 1e-6 * (1.0 + abs(E0))
    rhs = _gronwall_rhs(times, E0, b, C)
    margin = float(np.min(rhs - lhs))
    return Certificate(times.tolist(), lhs.tolist(), rhs.tolist(), float(C), float(c_struct),
                       float(tol_cert), margin, "pass" if margin >= -tol_cert else "fail",
                       include_b)


def write_certificate(cert: Certificate, path) -> None:
    with open(path, "w") as fh:
        json.dump(cert.to_dict(), fh, indent=1)


# -- oracle comparison ----------------------------------------------------------------------------


def oracle_compare(initial: FluidState, params: Params, dt: float, t_end: float,
                   dealias: bool = True) -> dict:
    """Run the augmented ELK solver and the split-step oracle from matched data.

    The wave function is ``inverse_madelung(initial)``; the hydrodynamic run
    starts from its Madelung image so both see identical data.

    Returns
    -------
    dict
        ``l1_density`` (``integrate |rho_sl - rho|``), ``max_density``,
        ``l1_momentum`` and the final ``time``.
    """
    p = params.replace(nu=0.0)
    wave = inverse_madelung(initial, p)
    start = madelung(wave, p)
    cfg = SolverConfig(dt=dt, t_end=t_end, dealias=dealias, report_every=max(1, int(round(t_end / dt))))
    traj = run(augment(start, p), p, cfg, with_functionals=False, keep_states=False)
    if not traj.ok:
        raise QFluidError(f"solver stopped: {traj.reason}")
    sl = run_sl(wave, p, dt, t_end, save_every=int(round(t_end / dt)))
    g = initial.grid
    fl = deaugment(traj.final, p)
    ref = madelung(sl.final, p)
    return {
        "time": traj.final.time,
        "l1_density": float(g.integrate(np.abs(ref.rho - fl.rho))),
        "max_density": float(np.max(np.abs(ref.rho - fl.rho))),
        "l1_momentum": float(g.integrate(np.sqrt(g.norm2(ref.rho * ref.u - fl.rho * fl.u)))),
        "mass_drift_sl": abs(sl.final.norm2 - wave.norm2) / wave.norm2,
    }


# -- inviscid sweep -----------------------------------------------------------------------------------


@dataclass
class SweepRow:
    nu: float
    relE_ref: Optional[float]
    relE_oracle: Optional[float]
    verdict: str
    escript_ratio: Optional[float] = None
    C_used: Optional[float] = None
    reason: str = ""


@dataclass
class SweepReport:
    rows: list = field(default_factory=list)
    order: Optional[float] = None

    @property
    def monotone(self) -> bool:
        vals = [r.relE_oracle for r in self.rows]
        if any(v is None for v in vals):
            return False
        return all(b < a for a, b in zip(vals, vals[1:]))

    def to_dict(self) -> dict:
        return {"rows": [asdict(r) for r in self.rows], "order": self.order,
                "monotone": self.monotone}


def _sweep_entry(args):
    initial, params, config, spec, oracle_state = args
    g = initial.grid
    p = params
    try:
        p.require_augmented()
        ref = manufactured_reference(spec, initial.rho, p, config.dt, config.t_end, grid=g,
                                     mode="nslk" if p.nu else "elk", dealias=config.dealias)
        traj = run(augment(initial, p), p, config, refs=ref, with_functionals=False,
                   keep_states=False)
        if not traj.ok:
            return SweepRow(p.nu, None, None, "error", reason=traj.reason)
        C = estimate_C(ref, p, stride=max(1, len(ref.R) // 50))
        cert = gronwall_certificate(traj, ref, p, C)
        final = deaugment(traj.final, p)
        pe = p.replace(nu=0.0)
        oref = fn.make_reference(g, oracle_state.rho, oracle_state.u, pe, time=oracle_state.time)
        relE_oracle = fn.rel_entropy_elk(final, oref, pe)[0]
        last = ref.at_index(len(ref.R) - 1)
        t = last.time
        dU = spec.dUdt(g, t)
        ratio = None
        if p.nu:
            diff = fn.error_field(last, p, dU, "nslk_nu") - fn.error_field(last, p, dU, "elk")
            ratio = float(np.max(np.sqrt(g.norm2(diff)))) / p.nu
        return SweepRow(p.nu, float(traj.series["rel_entropy_total"][-1]), float(relE_oracle),
                        cert.verdict, ratio, C)
    except QFluidError as e:
        return SweepRow(p.nu, None, None, "error", reason=str(e))


def inviscid_sweep(initial: FluidState, params: Params, nu_list, config: SolverConfig,
                   spec=None, workers: int = 1) -> SweepReport:
    """Augmented NSLK runs for decreasing viscosities.

    For each ``nu`` the report holds the relative entropy at ``t_end`` against
    the manufactured reference (``relE_ref``), the ELK relative entropy
    against the split-step oracle's Madelung state (``relE_oracle``), the
    certificate verdict, and ``max|E^nu - E| / nu`` of the reference error
    fields.  ``order`` is the least-squares slope of ``log relE_oracle``
    against ``log nu`` over positive viscosities.
    """
    nus = [float(v) for v in nu_list]
    if not nus:
        raise ParamError("nu_list is empty")
    if any(b >= a for a, b in zip(nus, nus[1:])):
        raise ParamError(f"nu_list must be strictly decreasing, got {nus}")
    if spec is None:
        spec = TravelingWave()
    pe = params.replace(nu=0.0)
    wave = inverse_madelung(initial, pe)
    sl = run_sl(wave, pe, config.dt, config.t_end, save_every=config.n_steps)
    oracle_state = madelung(sl.final, pe)
    jobs = [(initial, params.replace(nu=nu), config, spec, oracle_state) for nu in nus]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_entry, jobs))
    else:
        rows = [_sweep_entry(j) for j in jobs]
    rep = SweepReport(rows)
    pts = [(r.nu, r.relE_oracle) for r in rows if r.nu > 0 and r.relE_oracle and r.relE_oracle > 0]
    if len(pts) >= 2:
        x, y = np.log([a for a, _ in pts]), np.log([b for _, b in pts])
        rep.order = float(np.polyfit(x, y, 1)[0])
    return rep


def write_sweep(rep: SweepReport, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["nu", "relE_ref", "relE_oracle", "verdict"])
        for r in rep.rows:
            w.writerow([repr(r.nu), "" if r.relE_ref is None else repr(r.relE_ref),
                        "" if r.relE_oracle is None else repr(r.relE_oracle), r.verdict])
