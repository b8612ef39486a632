r"""Time integration of the regularized and augmented NSLK systems.

Both systems are evolved in conserved variables on the dealiased Fourier
space (a Fourier Galerkin scheme): ``(rho, m = rho u)`` for the regularized
system and ``(rho, q = rho w, z = rho vbar)`` for the augmented one.

Regularized system::

    rho_t = -div m + delta1 lap rho
    m_t   = -div(m (x) u) - lam grad rho - mu m - r0 u - r1 rho |u|^2 u
            + (hbar^2/4) div(rho hess log rho) + nu div(rho D u)
            - delta2 lap^2 u - delta1 (grad u) grad rho
            + eta1 grad rho^-alpha + eta2 rho grad lap^(2s+1) rho

Augmented system, with ``u = w - (nu/2) grad log rho``::

    rho_t = -div q + (nu/2) lap rho
    q_t   = -div(q (x) u) - lam' grad rho - mu q
            + (hbar_nu/2) div(rho grad vbar) + (nu/2) div(rho grad w)
    z_t   = -div(z (x) u) - (hbar_nu/2) div(rho (grad u)^T)

For ``nu = 0`` the augmented system is the augmented ELK system.

Schemes
-------
``rk4``
    Classical fourth-order Runge-Kutta on the full right-hand side.
``imex_cn``
    Regularized runs only.  The stiff linear part ``A`` (``delta1`` and
    ``delta2`` diffusion, the ``eta2`` hyperdispersion and the linearised
    Bohm term, with density frozen at the start of the step) is treated by
    Crank-Nicolson and the remainder ``F - A`` by Heun's method.  Each
    implicit solve uses GMRES preconditioned by the constant-density
    Fourier inverse.  The density row of ``F - A`` vanishes, so mass is
    conserved to roundoff.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator, gmres

from . import functionals as fn
from .errors import BlowupError, ParamError, QFluidError, VacuumError
from .grid import TorusGrid
from .state import AugmentedState, FluidState, Params, checked_density

__all__ = [
    "SolverConfig",
    "Trajectory",
    "rhs_reg_nslk",
    "rhs_aug_nslk",
    "stability_dt",
    "step",
    "run",
    "BLOWUP_THRESHOLD",
]

BLOWUP_THRESHOLD = 1e8
C_CFL = 2.5
SCHEMES = ("rk4", "imex_cn")


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping controls.

    ``density_floor`` overrides :attr:`Params.density_floor` when given.
    """

    dt: float
    t_end: float
    scheme: str = "rk4"
    dealias: bool = True
    report_every: int = 1
    density_floor: Optional[float] = None
    gmres_rtol: float = 1e-12

    def __post_init__(self):
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ParamError(f"dt must be > 0, got {self.dt}")
        if not (self.t_end > 0 and math.isfinite(self.t_end)):
            raise ParamError(f"t_end must be > 0, got {self.t_end}")
        if self.scheme not in SCHEMES:
            raise ParamError(f"scheme must be one of {SCHEMES}, got {self.scheme!r}")
        if int(self.report_every) != self.report_every or self.report_every < 1:
            raise ParamError(f"report_every must be an integer >= 1, got {self.report_every}")
        if self.density_floor is not None and self.density_floor <= 0:
            raise ParamError("density_floor must be > 0")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))

    def to_dict(self) -> dict:
        return asdict(self)


# -- right-hand sides ---------------------------------------------------------------


def _maybe_dealias(g, f, on):
    return g.dealias(f) if on else f


def _reg_rhs(g: TorusGrid, p: Params, rho, m, dealias=True):
    rc = checked_density(rho, p.density_floor)
    u = _maybe_dealias(g, m / rc, dealias)
    grho = g.gradient(rho)
    drho = -g.divergence(m)
    if p.delta1:
        drho = drho + p.delta1 * g.laplacian(rho)
    dm = -g.divergence_tensor(g.outer(m, u)) - p.lam * grho - p.mu * m
    dm = dm + 0.25 * p.hbar**2 * g.divergence_tensor(rho * g.hessian(np.log(rc)))
    if p.nu:
        dm = dm + p.nu * g.divergence_tensor(rho * g.sym_grad(u))
    if p.r0:
        dm = dm - p.r0 * u
    if p.r1:
        dm = dm - p.r1 * rho * g.norm2(u) * u
    if p.delta2:
        dm = dm - p.delta2 * g.laplacian_power(u, 2)
    if p.delta1:
        dm = dm - p.delta1 * g.matvec(g.jacobian(u), grho)
    if p.eta1:
        dm = dm + p.eta1 * g.gradient(rc ** (-p.alpha))
    if p.eta2:
        dm = dm + p.eta2 * rho * g.gradient(g.laplacian_power(rho, 2 * p.s + 1))
    return _maybe_dealias(g, drho, dealias), _maybe_dealias(g, dm, dealias)


def _aug_rhs(g: TorusGrid, p: Params, rho, q, z, dealias=True):
    rc = checked_density(rho, p.density_floor)
    hnu = p.hbar_nu
    w = _maybe_dealias(g, q / rc, dealias)
    vb = _maybe_dealias(g, z / rc, dealias)
    if p.nu:
        u = w - 0.5 * p.nu * _maybe_dealias(g, g.gradient(rho) / rc, dealias)
    else:
        u = w
    drho = -g.divergence(q)
    if p.nu:
        drho = drho + 0.5 * p.nu * g.laplacian(rho)
    dq = (-g.divergence_tensor(g.outer(q, u)) - p.lambda_prime * g.gradient(rho) - p.mu * q
          + 0.5 * hnu * g.divergence_tensor(rho * g.jacobian(vb)))
    if p.nu:
        dq = dq + 0.5 * p.nu * g.divergence_tensor(rho * g.jacobian(w))
    dz = (-g.divergence_tensor(g.outer(z, u))
          - 0.5 * hnu * g.divergence_tensor(rho * np.swapaxes(g.jacobian(u), 0, 1)))
    return tuple(_maybe_dealias(g, f, dealias) for f in (drho, dq, dz))


def rhs_reg_nslk(state: FluidState, params: Params, dealias: bool = True):
    """Time derivatives ``(d rho/dt, d(rho u)/dt)`` of the regularized system."""
    return _reg_rhs(state.grid, params, state.rho, state.rho * state.u, dealias)


def rhs_aug_nslk(aug: AugmentedState, params: Params, dealias: bool = True):
    """Time derivatives ``(d rho/dt, d(rho w)/dt, d(rho vbar)/dt)`` of the augmented system."""
    params.require_augmented()
    return _aug_rhs(aug.grid, params, aug.rho, aug.rho * aug.w, aug.rho * aug.vbar, dealias)


# -- systems --------------------------------------------------------------------------


class _RegSystem:
    kind = "reg"

    def __init__(self, g, p, dealias):
        self.g, self.p, self.dealias = g, p, dealias

    def pack(self, s: FluidState):
        return [np.array(s.rho), s.rho * s.u]

    def unpack(self, y, t) -> FluidState:
        rc = checked_density(y[0], self.p.density_floor)
        return FluidState(self.g, y[0], y[1] / rc, t)

    def rhs(self, y):
        return list(_reg_rhs(self.g, self.p, y[0], y[1], self.dealias))

    def balance(self, y, t):
        """Energy and dissipation whose balance is monitored."""
        return fn.energy_reg(self.unpack(y, t), self.p)

    def omega(self, y, scheme):
        g, p = self.g, self.p
        K = g.dealias_cutoff if self.dealias else g.n / 2
        rmin, rmax = float(np.min(y[0])), float(np.max(y[0]))
        rmin = max(rmin, p.density_floor)
        umax = float(np.max(np.sqrt(g.norm2(y[1])))) / rmin
        om = K * umax + K * math.sqrt(abs(p.lam)) + p.mu + p.r0 / rmin + p.r1 * umax**2
        om += p.nu * K**2 * rmax / rmin
        if p.eta1:
            om += K * math.sqrt(p.eta1 * p.alpha * rmin ** (-p.alpha))
        if scheme == "rk4":
            om += 0.5 * p.hbar * K**2 + p.delta1 * K**2
            om += p.delta2 * K**4 / rmin + math.sqrt(p.eta2 * rmax) * K ** (2 * p.s + 2)
        return om


class _AugSystem:
    kind = "aug"

    def __init__(self, g, p, dealias):
        p.require_augmented()
        self.g, self.p, self.dealias = g, p, dealias

    def pack(self, a: AugmentedState):
        return [np.array(a.rho), a.rho * a.w, a.rho * a.vbar]

    def unpack(self, y, t) -> AugmentedState:
        rc = checked_density(y[0], self.p.density_floor)
        return AugmentedState(self.g, y[0], y[1] / rc, y[2] / rc, t)

    def rhs(self, y):
        return list(_aug_rhs(self.g, self.p, y[0], y[1], y[2], self.dealias))

    def balance(self, y, t):
        return fn.aug_energy(self.unpack(y, t), self.p)

    def omega(self, y, scheme):
        g, p = self.g, self.p
        K = g.dealias_cutoff if self.dealias else g.n / 2
        rmin = max(float(np.min(y[0])), p.density_floor)
        wmax = float(np.max(np.sqrt(g.norm2(y[1])))) / rmin
        vmax = float(np.max(np.sqrt(g.norm2(y[2])))) / rmin
        umax = wmax + p.nu / p.hbar_nu * vmax
        return (K * umax + K * math.sqrt(p.lambda_prime) + p.mu
                + 0.5 * p.hbar_nu * K**2 + 0.5 * p.nu * K**2)


def _system_for(state, g, p, dealias):
    if isinstance(state, FluidState):
        return _RegSystem(g, p, dealias)
    if isinstance(state, AugmentedState):
        return _AugSystem(g, p, dealias)
    raise TypeError(f"cannot integrate a {type(state).__name__}")


# -- steppers ---------------------------------------------------------------------------


def _axpy(y, k, a):
    return [yi + a * ki for yi, ki in zip(y, k)]


def _rk4(sys_, y, dt):
    k1 = sys_.rhs(y)
    k2 = sys_.rhs(_axpy(y, k1, 0.5 * dt))
    k3 = sys_.rhs(_axpy(y, k2, 0.5 * dt))
    k4 = sys_.rhs(_axpy(y, k3, dt))
    return [yi + dt / 6.0 * (a + 2 * b + 2 * c + d) for yi, a, b, c, d in zip(y, k1, k2, k3, k4)]


class _ImexCN:
    """Crank-Nicolson / Heun splitting for the regularized system."""

    def __init__(self, sys_: _RegSystem, rtol):
        if not isinstance(sys_, _RegSystem):
            raise ParamError("imex_cn is available for regularized runs only")
        self.sys = sys_
        self.rtol = rtol
        g = sys_.g
        sym = g._symbols(False)
        self.dk = sym["dk"]
        self.k2 = sym["k2"]
        self.kk = sum(np.abs(d) ** 2 for d in self.dk)
        self.keep = sym["keep"] if sys_.dealias else np.ones_like(sym["keep"])
        self.iterations = 0

    def linear(self, rho, m, rstar):
        """Frozen-density stiff operator ``A(rstar)`` applied to ``(rho, m)``."""
        g, p = self.sys.g, self.sys.p
        on = self.sys.dealias
        ar = -g.divergence(m)
        am = 0.25 * p.hbar**2 * g.gradient(g.laplacian(rho))
        if p.delta1:
            ar = ar + p.delta1 * g.laplacian(rho)
        if p.eta2:
            am = am + p.eta2 * rstar * g.gradient(g.laplacian_power(rho, 2 * p.s + 1))
        if p.delta2:
            am = am - p.delta2 * g.laplacian_power(_maybe_dealias(g, m / rstar, on), 2)
        return _maybe_dealias(g, ar, on), _maybe_dealias(g, am, on)

    def _precond(self, theta_dt, rbar):
        g, p = self.sys.g, self.sys.p
        dk, k2, kk = self.dk, self.k2, self.kk
        beta = 1.0 + theta_dt * p.delta2 * k2**2 / rbar
        c = -(p.eta2 * rbar * k2 ** (2 * p.s + 1) + 0.25 * p.hbar**2 * k2)
        den = 1.0 + theta_dt * p.delta1 * k2 - theta_dt**2 * kk * c / beta
        d = g.dim
        shape = g.shape

        def apply(vec):
            br = vec[: g.size].reshape(shape)
            bm = vec[g.size:].reshape((d,) + shape)
            brh, bmh = g.fft(br), g.fft(bm)
            div_b = sum(dk[j] * bmh[j] for j in range(d))
            rh = (brh - theta_dt * div_b / beta) / den
            mh = (bmh + theta_dt * np.stack([dk[j] * c * rh for j in range(d)])) / beta
            rh = np.where(self.keep, rh, 0.0)
            mh = np.where(self.keep, mh, 0.0)
            return np.concatenate([g.ifft(rh).ravel(), g.ifft(mh).ravel()])

        return apply

    def _solve(self, rhs_r, rhs_m, theta_dt, rstar, x0):
        g = self.sys.g
        d = g.dim
        size = g.size
        shape = g.shape

        def matvec(v):
            r = v[:size].reshape(shape)
            m = v[size:].reshape((d,) + shape)
            ar, am = self.linear(r, m, rstar)
            return np.concatenate([(r - theta_dt * ar).ravel(), (m - theta_dt * am).ravel()])

        # left preconditioning: the stiff modes dominate the raw residual but
        # not the error, so convergence is judged on M (b - A x)
        prec = self._precond(theta_dt, float(np.mean(rstar)))
        n = size * (d + 1)
        MA = LinearOperator((n, n), matvec=lambda v: prec(matvec(v)), dtype=float)
        b = prec(np.concatenate([rhs_r.ravel(), rhs_m.ravel()]))
        count = [0]

        def cb(_):
            count[0] += 1

        x, info = gmres(MA, b, x0=np.concatenate([x0[0].ravel(), x0[1].ravel()]),
                        rtol=self.rtol, atol=0.0, restart=50, maxiter=20,
                        callback=cb, callback_type="pr_norm")
        self.iterations += count[0]
        if info != 0:
            raise BlowupError(f"implicit solve did not converge (gmres info {info})")
        r = x[:size].reshape(shape)
        m = x[size:].reshape((d,) + shape)
        # the zero mode decouples (A has no mean component): solve it exactly
        ax = g.axes
        r = r - np.mean(r) + np.mean(rhs_r)
        m = m - np.mean(m, axis=ax, keepdims=True) + np.mean(rhs_m, axis=ax, keepdims=True)
        return [r, m]

    def step(self, y, dt):
        sys_ = self.sys
        rstar = checked_density(y[0], sys_.p.density_floor)
        h = 0.5 * dt

        def remainder(z):
            f = sys_.rhs(z)
            a = self.linear(z[0], z[1], rstar)
            # the density row of F - A vanishes identically
            return [np.zeros_like(z[0]), f[1] - a[1]]

        a0 = self.linear(y[0], y[1], rstar)
        n0 = remainder(y)
        base = [y[0] + h * a0[0], y[1] + h * a0[1]]
        y1 = self._solve(base[0] + dt * n0[0], base[1] + dt * n0[1], h, rstar, y)
        n1 = remainder(y1)
        return self._solve(base[0] + h * (n0[0] + n1[0]), base[1] + h * (n0[1] + n1[1]),
                           h, rstar, y1)


def _check_blowup(y):
    for f in y:
        m = np.max(np.abs(f))
        if not np.isfinite(m) or m > BLOWUP_THRESHOLD:
            raise BlowupError(f"field max-norm {m:.3e} exceeds {BLOWUP_THRESHOLD:g}")


def _effective_params(params: Params, config: SolverConfig) -> Params:
    if config.density_floor is not None and config.density_floor != params.density_floor:
        return params.replace(density_floor=config.density_floor)
    return params


def stability_dt(state, params: Params, config: SolverConfig) -> float:
    """Largest admissible step ``C_CFL / omega`` for the scheme in ``config``."""
    p = _effective_params(params, config)
    sys_ = _system_for(state, state.grid, p, config.dealias)
    om = sys_.omega(sys_.pack(state), config.scheme)
    return C_CFL / om if om > 0 else math.inf


def step(state, params: Params, config: SolverConfig):
    """Advance a :class:`FluidState` or :class:`AugmentedState` by one step."""
    p = _effective_params(params, config)
    sys_ = _system_for(state, state.grid, p, config.dealias)
    y = sys_.pack(state)
    if config.scheme == "imex_cn":
        y = _ImexCN(sys_, config.gmres_rtol).step(y, config.dt)
    else:
        y = _rk4(sys_, y, config.dt)
    _check_blowup(y)
    return sys_.unpack(y, state.time + config.dt)


# -- runs -----------------------------------------------------------------------------


@dataclass
class Trajectory:
    """Output of :func:`run`.

    ``states`` and ``reports`` are sampled every ``report_every`` steps;
    ``series`` holds per-step scalar diagnostics (time, mass, monitored
    energy and its dissipation, the running integral of the dissipation).
    """

    kind: str
    grid: TorusGrid
    params: Params
    config: SolverConfig
    states: list = field(default_factory=list)
    reports: list = field(default_factory=list)
    series: dict = field(default_factory=dict)
    status: str = "ok"
    reason: str = ""
    steps_taken: int = 0
    implicit_iterations: int = 0

    @property
    def times(self):
        return [s.time for s in self.states]

    @property
    def final(self):
        return self.states[-1]

    @property
    def ok(self) -> bool:
        return self.status == "ok"


class _Monitor:
    """Per-step accumulators and report assembly."""

    def __init__(self, sys_, refs, with_functionals):
        self.sys = sys_
        self.refs = refs
        self.with_functionals = with_functionals
        self.dint = fn.TimeIntegral()
        self.b = fn.TimeIntegral()
        self.acc = [fn.TimeIntegral(), fn.TimeIntegral()]
        self.series = {k: [] for k in ("time", "mass", "energy", "dissipation", "dissipation_integral",
                                       "rel_entropy_total", "b")}

    def observe(self, y, t):
        sys_ = self.sys
        g, p = sys_.g, sys_.p
        E, D = sys_.balance(y, t)
        self.dint.advance(t, D)
        s = self.series
        s["time"].append(t)
        s["mass"].append(float(g.integrate(y[0])))
        s["energy"].append(E)
        s["dissipation"].append(D)
        s["dissipation_integral"].append(self.dint.value)
        if self.refs is None:
            return
        ref = self.refs(t)
        st = sys_.unpack(y, t)
        if sys_.kind == "aug":
            rates = fn.nslk_rates(st, ref)
            for a, r in zip(self.acc, rates):
                a.advance(t, r)
            fl = _deaugmented(st, p)
        else:
            fl = st
            self.acc[1].advance(t, fn.elk_drag_rate(st, ref))
        self.b.advance(t, fn.b_rate(fl, ref, p))
        s["rel_entropy_total"].append(self.rel_entropy(st, ref)[1])
        s["b"].append(self.b.value)

    def rel_entropy(self, st, ref):
        p = self.sys.p
        if self.sys.kind == "aug":
            return fn.rel_entropy_nslk(st, ref, p, (self.acc[0].value, self.acc[1].value))
        return fn.rel_entropy_elk(st, ref, p, self.acc[1].value)

    def report(self, y, t) -> fn.EntropyReport:
        sys_ = self.sys
        g, p = sys_.g, sys_.p
        st = sys_.unpack(y, t)
        rep = fn.EntropyReport(time=t, mass=float(g.integrate(y[0])))
        if sys_.kind == "aug":
            rep.aug_energy, rep.aug_dissipation = fn.aug_energy(st, p)
            fl = _deaugmented(st, p)
        else:
            fl = st
            rep.energy_reg, rep.dissipation_reg = fn.energy_reg(fl, p)
            rep.bd_entropy_reg = fn.bd_entropy_reg(fl, p)[0]
        if self.with_functionals:
            rep.energy_nslk, rep.dissipation_nslk = fn.energy_nslk(fl, p)
            rep.bd_entropy, rep.bd_dissipation = fn.bd_entropy_nslk(fl, p)
            try:
                rep.bohm_ratio = fn.bohm_inequality_ratio(g, st.rho, p.density_floor)
            except QFluidError:
                rep.bohm_ratio = None
        if self.refs is not None:
            ref = self.refs(t)
            rep.rel_entropy_instant, rep.rel_entropy_total = self.rel_entropy(st, ref)
            rep.b_accumulator = self.b.value
            try:
                rep.ck_gap = fn.csiszar_kullback_gap(g, st.rho, ref.R, p.density_floor)
            except QFluidError:
                rep.ck_gap = None
        return rep


def _deaugmented(a: AugmentedState, p: Params) -> FluidState:
    g = a.grid
    rc = checked_density(a.rho, p.density_floor)
    return FluidState(g, a.rho, a.w - 0.5 * p.nu * g.gradient(rc) / rc, a.time)


def run(initial, params: Params, config: SolverConfig,
        refs: Optional[Callable[[float], "fn.StrongReference"]] = None,
        with_functionals: bool = True, check_stability: bool = True,
        keep_states: bool = True) -> Trajectory:
    """Integrate from ``initial`` to ``config.t_end``.

    Parameters
    ----------
    initial : FluidState or AugmentedState
        Selects the regularized or the augmented system.
    refs : callable, optional
        ``refs(t)`` returns the :class:`~qfluid.functionals.StrongReference`
        at time ``t``; enables relative entropies, ``b`` and the
        Csiszar-Kullback gap in reports.
    with_functionals : bool
        Include the first-order energies, BD entropies and the Bohm ratio in
        reports.

    Returns
    -------
    Trajectory
        Partial when the run stops on :class:`VacuumError` or
        :class:`BlowupError`; ``status`` and ``reason`` say why.
    """
    p = _effective_params(params, config)
    g = initial.grid
    sys_ = _system_for(initial, g, p, config.dealias)
    y = sys_.pack(initial)
    if config.dealias:
        y = [g.dealias(f) for f in y]
    if check_stability:
        om = sys_.omega(y, config.scheme)
        if om > 0 and config.dt > C_CFL / om:
            raise ParamError(
                f"dt = {config.dt:g} exceeds the {config.scheme} stability budget "
                f"{C_CFL / om:.3g} (omega ~ {om:.3g})"
            )
    stepper = _ImexCN(sys_, config.gmres_rtol) if config.scheme == "imex_cn" else None
    traj = Trajectory(sys_.kind, g, p, config)
    mon = _Monitor(sys_, refs, with_functionals)
    t0 = initial.time
    t = t0
    try:
        mon.observe(y, t)
        if keep_states:
            traj.states.append(sys_.unpack(y, t))
        traj.reports.append(mon.report(y, t))
        for i in range(1, config.n_steps + 1):
            y = stepper.step(y, config.dt) if stepper else _rk4(sys_, y, config.dt)
            _check_blowup(y)
            t = t0 + i * config.dt
            mon.observe(y, t)
            traj.steps_taken = i
            if i % config.report_every == 0 or i == config.n_steps:
                if keep_states:
                    traj.states.append(sys_.unpack(y, t))
                traj.reports.append(mon.report(y, t))
        if not keep_states:
            traj.states.append(sys_.unpack(y, t))
    except VacuumError as e:
        traj.status, traj.reason = "vacuum", str(e)
    except BlowupError as e:
        traj.status, traj.reason = "blowup", str(e)
    traj.series = mon.series
    if stepper is not None:
        traj.implicit_iterations = stepper.iterations
    return traj
