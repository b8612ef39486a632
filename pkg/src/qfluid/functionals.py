r"""Energies, dissipations, entropies and reference-error fields.

All integrals use the periodic trapezoidal rule of :class:`TorusGrid`, which
is exact for band-limited integrands.  Gradients of :math:`\sqrt\rho` are
formed as :math:`|\nabla\sqrt\rho|^2 = |\nabla\rho|^2 / (4\rho)` so that only
smooth fields are differentiated spectrally.

Two pressure shifts appear.  The first-order BD entropy and its regularized
version use ``lam - mu*nu`` (:attr:`Params.lambda_prime_bd`); the augmented
energy and the augmented relative entropy use ``lam - mu*nu/2``
(:attr:`Params.lambda_prime`).

Time integrals inside relative entropies and the ``b`` accumulator are not
computed here; callers advance them with :class:`TimeIntegral`.
"""
from __future__ import annotations

import csv
import math
from dataclasses import asdict, dataclass, fields, replace
from typing import Optional

import numpy as np

from .errors import DegenerateError, MassMismatchError
from .grid import TorusGrid
from .state import AugmentedState, FluidState, Params, checked_density

__all__ = [
    "enthalpy",
    "relative_enthalpy",
    "energy_nslk",
    "bd_entropy_nslk",
    "energy_reg",
    "energy_reg_terms",
    "bd_entropy_reg",
    "bd_entropy_reg_terms",
    "aug_energy",
    "StrongReference",
    "make_reference",
    "error_field",
    "rel_entropy_elk",
    "rel_entropy_nslk",
    "elk_drag_rate",
    "nslk_rates",
    "b_rate",
    "b_accumulate",
    "TimeIntegral",
    "csiszar_kullback_gap",
    "bohm_inequality_ratio",
    "bohm_force",
    "EntropyReport",
    "REPORT_COLUMNS",
    "write_reports",
    "read_reports",
]

MASS_RTOL = 1e-8


# -- pointwise pieces ---------------------------------------------------------


def enthalpy(rho: np.ndarray, floor: float = 1e-8) -> np.ndarray:
    r"""``H(rho) = rho log rho - rho``, evaluated as ``rho (log rho - 1)``."""
    rho = checked_density(rho, floor)
    return rho * (np.log(rho) - 1.0)


def relative_enthalpy(rho: np.ndarray, R: np.ndarray, floor: float = 1e-8) -> np.ndarray:
    r"""Bregman divergence of ``H``.

    .. math:: H(\rho|R) = H(\rho) - H(R) - \log R\,(\rho - R)
              = \rho\log(\rho/R) - \rho + R \ge 0.
    """
    rho = checked_density(rho, floor)
    R = checked_density(R, floor)
    return rho * np.log(rho / R) - rho + R


def _grad_sqrt2(g: TorusGrid, rho):
    """Pointwise ``|grad sqrt(rho)|^2``."""
    return g.norm2(g.gradient(rho)) / (4.0 * rho)


def _hess_log2(g: TorusGrid, rho):
    """Pointwise ``rho |hess log rho|^2``."""
    return rho * g.norm2(g.hessian(np.log(rho)))


def _grad_rho_pow2(g: TorusGrid, rho, alpha):
    """Pointwise ``|grad rho^(-alpha/2)|^2`` by the chain rule."""
    return (0.5 * alpha) ** 2 * rho ** (-alpha - 2.0) * g.norm2(g.gradient(rho))


# -- energies of the hydrodynamic system ---------------------------------------


def energy_nslk(state: FluidState, params: Params):
    r"""Energy and dissipation of the NSLK system.

    .. math::

        E = \frac12\int\rho|u|^2 + \hbar^2|\nabla\sqrt\rho|^2 + \lambda\int H(\rho),
        \qquad
        D = \mu\int\rho|u|^2 + \nu\int\rho|\mathbb{D}u|^2.

    Returns
    -------
    (E, D) : tuple of float
    """
    g = state.grid
    rho = checked_density(state.rho, params.density_floor)
    u = state.u
    kin = g.integrate(rho * g.norm2(u))
    E = 0.5 * kin + 0.5 * params.hbar**2 * g.integrate(_grad_sqrt2(g, rho)) \
        + params.lam * g.integrate(enthalpy(rho, params.density_floor))
    D = params.mu * kin
    if params.nu:
        D += params.nu * g.integrate(rho * g.norm2(g.sym_grad(u)))
    return float(E), float(D)


def bd_entropy_nslk(state: FluidState, params: Params):
    r"""First-order BD entropy and its dissipation.

    .. math::

        \mathcal E = \frac12\int\rho|u + \tfrac{\nu}{2}\nabla\log\rho|^2
            + \hbar^2|\nabla\sqrt\rho|^2 + \lambda'\int H(\rho), \\
        \mathcal D = \mu\int\rho|u|^2 + \frac{\nu}{2}\int\rho|\mathbb{A}u|^2
            + \frac{\nu\hbar^2}{2}\int\rho|\nabla^2\log\rho|^2
            + 2\nu\int|\nabla\sqrt\rho|^2,

    with :math:`\lambda' = \lambda - \mu\nu`.
    """
    g = state.grid
    p = params
    rho = checked_density(state.rho, p.density_floor)
    u = state.u
    shifted = u + 0.5 * p.nu * g.gradient(np.log(rho))
    gs2 = g.integrate(_grad_sqrt2(g, rho))
    E = 0.5 * g.integrate(rho * g.norm2(shifted)) + 0.5 * p.hbar**2 * gs2 \
        + p.lambda_prime_bd * g.integrate(enthalpy(rho, p.density_floor))
    D = p.mu * g.integrate(rho * g.norm2(u))
    if p.nu:
        D += 0.5 * p.nu * g.integrate(rho * g.norm2(g.antisym_grad(u)))
        D += 0.5 * p.nu * p.hbar**2 * g.integrate(_hess_log2(g, rho))
        D += 2.0 * p.nu * gs2
    return float(E), float(D)


def energy_reg_terms(state: FluidState, params: Params, convention: str = "paper"):
    """Term-by-term energy and dissipation of the regularized NSLK system.

    Parameters
    ----------
    convention : {"paper", "exact"}
        ``"paper"`` uses the published dissipation coefficients.  ``"exact"``
        uses the coefficients produced by differentiating the energy along
        the regularized equations: the ``delta1`` Fisher term carries a
        factor ``lam`` and the ``delta1`` Hessian term a factor
        ``hbar**2 / 4`` instead of ``hbar**2 / 2``.

    Returns
    -------
    (energy_terms, dissipation_terms) : tuple of dict
    """
    if convention not in ("paper", "exact"):
        raise ValueError(f"unknown convention {convention!r}")
    g = state.grid
    p = params
    rho = checked_density(state.rho, p.density_floor)
    u = state.u
    s = p.s
    gs2 = g.integrate(_grad_sqrt2(g, rho))
    kin = g.integrate(rho * g.norm2(u))
    E = {
        "kinetic": 0.5 * kin,
        "quantum": 0.5 * p.hbar**2 * gs2,
        "pressure": p.lam * g.integrate(enthalpy(rho, p.density_floor)),
        "cold": p.eta1 / (p.alpha + 1.0) * g.integrate(rho ** (-p.alpha)) if p.eta1 else 0.0,
        "capillary": 0.5 * p.eta2 * g.integrate(g.norm2(g.gradient(g.laplacian_power(rho, s))))
        if p.eta2 else 0.0,
    }
    exact = convention == "exact"
    fisher_coef = 4.0 * p.delta1 * (p.lam if exact else 1.0)
    hess_coef = p.delta1 * p.hbar**2 * (0.25 if exact else 0.5)
    D = {
        "drag": p.mu * kin,
        "viscous": p.nu * g.integrate(rho * g.norm2(g.sym_grad(u))) if p.nu else 0.0,
        "hyperviscous": p.delta2 * g.integrate(g.norm2(g.laplacian(u))) if p.delta2 else 0.0,
        "hyperdiffusive": p.delta1 * p.eta2 * g.integrate(g.laplacian_power(rho, s + 1) ** 2)
        if p.delta1 * p.eta2 else 0.0,
        "fisher": fisher_coef * gs2,
        "cold": 4.0 * p.delta1 * p.eta1 / p.alpha * g.integrate(_grad_rho_pow2(g, rho, p.alpha))
        if p.delta1 * p.eta1 else 0.0,
        "linear_drag": p.r0 * g.integrate(g.norm2(u)),
        "cubic_drag": p.r1 * g.integrate(rho * g.norm2(u) ** 2),
        "hessian": hess_coef * g.integrate(_hess_log2(g, rho)) if p.delta1 else 0.0,
    }
    return {k: float(v) for k, v in E.items()}, {k: float(v) for k, v in D.items()}


def energy_reg(state: FluidState, params: Params, convention: str = "paper"):
    r"""Energy and dissipation of the regularized NSLK system.

    .. math::

        E_{reg} = E_{NSLK} + \frac{\eta_1}{\alpha+1}\int\rho^{-\alpha}
            + \frac{\eta_2}{2}\int|\nabla\Delta^s\rho|^2

    and :math:`D_{reg}` adds the ``delta``, ``eta`` and drag contributions
    to :math:`D_{NSLK}`; see :func:`energy_reg_terms`.
    """
    E, D = energy_reg_terms(state, params, convention)
    return math.fsum(E.values()), math.fsum(D.values())


def bd_entropy_reg_terms(state: FluidState, params: Params):
    r"""Term-by-term regularized BD entropy and dissipation.

    The velocity shift is :math:`\nu\nabla\log\rho` and the pressure constant
    :math:`\lambda - \mu\nu`; the entropy carries :math:`-r_0\int\log\rho`.
    """
    g = state.grid
    p = params
    rho = checked_density(state.rho, p.density_floor)
    u = state.u
    s = p.s
    logr = np.log(rho)
    gs2 = g.integrate(_grad_sqrt2(g, rho))
    hl2 = g.integrate(_hess_log2(g, rho))
    E = {
        "kinetic": 0.5 * g.integrate(rho * g.norm2(u + p.nu * g.gradient(logr))),
        "quantum": 0.5 * p.hbar**2 * gs2,
        "pressure": p.lambda_prime_bd * g.integrate(enthalpy(rho, p.density_floor)),
        "cold": p.eta1 / (p.alpha + 1.0) * g.integrate(rho ** (-p.alpha)) if p.eta1 else 0.0,
        "capillary": 0.5 * p.eta2 * g.integrate(g.norm2(g.gradient(g.laplacian_power(rho, s))))
        if p.eta2 else 0.0,
        "log": -p.r0 * g.integrate(logr),
    }
    D = {
        "drag": p.mu * g.integrate(rho * g.norm2(u)),
        "vorticity": p.nu * g.integrate(rho * g.norm2(g.antisym_grad(u))) if p.nu else 0.0,
        "hessian": (p.nu * p.hbar**2 + p.delta1 * p.nu**2 + 0.5 * p.delta1 * p.hbar**2) * hl2,
        "fisher": 4.0 * (p.nu + p.delta1) * gs2,
        "cold": (p.eta1 * p.nu * p.alpha / 4.0 + 0.4 * p.delta1 * p.eta1)
        * g.integrate(_grad_rho_pow2(g, rho, p.alpha)) if p.eta1 else 0.0,
        "hyperdiffusive": p.eta2 * (p.nu + p.delta1) * g.integrate(g.laplacian_power(rho, s + 1) ** 2)
        if p.eta2 else 0.0,
        "hyperviscous": p.delta2 * g.integrate(g.norm2(g.laplacian(u))) if p.delta2 else 0.0,
        "linear_drag": p.r0 * g.integrate(g.norm2(u)),
        "cubic_drag": p.r1 * g.integrate(rho * g.norm2(u) ** 2),
    }
    return {k: float(v) for k, v in E.items()}, {k: float(v) for k, v in D.items()}


def bd_entropy_reg(state: FluidState, params: Params):
    """Regularized BD entropy and dissipation; see :func:`bd_entropy_reg_terms`."""
    E, D = bd_entropy_reg_terms(state, params)
    return math.fsum(E.values()), math.fsum(D.values())


def aug_energy(aug: AugmentedState, params: Params):
    r"""Energy and dissipation of the augmented system.

    .. math::

        \mathcal E = \int \tfrac12\rho|w|^2 + \tfrac12\rho|\bar v|^2 + \lambda' H(\rho), \\
        \mathcal D = \frac{\nu}{2}\int \rho|\nabla w|^2 + \rho|\nabla\bar v|^2
            + \frac{4\lambda'}{\hbar_\nu^2}\rho|\bar v|^2 + \mu\int\rho|w|^2,

    with :math:`\lambda' = \lambda - \mu\nu/2`.
    """
    params.require_augmented()
    g = aug.grid
    p = params
    rho = checked_density(aug.rho, p.density_floor)
    lp = p.lambda_prime
    w2 = g.integrate(rho * g.norm2(aug.w))
    v2 = g.integrate(rho * g.norm2(aug.vbar))
    E = 0.5 * w2 + 0.5 * v2 + lp * g.integrate(enthalpy(rho, p.density_floor))
    D = p.mu * w2
    if p.nu:
        D += 0.5 * p.nu * (g.integrate(rho * g.norm2(g.jacobian(aug.w)))
                           + g.integrate(rho * g.norm2(g.jacobian(aug.vbar)))
                           + 4.0 * lp / p.hbar_nu2 * v2)
    return float(E), float(D)


# -- strong references and error fields -------------------------------------------


@dataclass(frozen=True, eq=False)
class StrongReference:
    """Smooth reference fields at one time.

    ``W`` and ``Vbar`` follow the mode used to build the reference: for
    ``"elk"`` ``W = U`` and ``Vbar = (hbar/2) grad log R``; for ``"nslk"``
    ``W = U + (nu/2) grad log R`` and ``Vbar = (hbar_nu/2) grad log R``.
    ``Escript`` is the error field (its viscous variant in ``"nslk"`` mode).
    """

    grid: TorusGrid
    R: np.ndarray
    U: np.ndarray
    W: np.ndarray
    Vbar: np.ndarray
    Escript: Optional[np.ndarray] = None
    time: float = 0.0
    mode: str = "elk"

    @property
    def mass(self) -> float:
        return float(self.grid.integrate(self.R))


def make_reference(grid: TorusGrid, R, U, params: Params, dUdt=None, time: float = 0.0,
                   mode: str = "elk") -> StrongReference:
    """Assemble a :class:`StrongReference` including its error field.

    ``dUdt`` defaults to zero (steady velocity).
    """
    if mode not in ("elk", "nslk"):
        raise ValueError(f"mode must be 'elk' or 'nslk', got {mode!r}")
    R = checked_density(np.asarray(R, float), params.density_floor)
    U = np.asarray(U, float)
    glog = grid.gradient(np.log(R))
    if mode == "elk":
        W, Vbar = U, 0.5 * params.hbar * glog
    else:
        W, Vbar = U + 0.5 * params.nu * glog, 0.5 * params.hbar_nu * glog
    ref = StrongReference(grid, R, U, W, Vbar, None, float(time), mode)
    if dUdt is None:
        dUdt = np.zeros_like(U)
    E = error_field(ref, params, dUdt, "elk" if mode == "elk" else "nslk_nu")
    return replace(ref, Escript=E)


def error_field(ref: StrongReference, params: Params, dUdt: np.ndarray, mode: str = "elk"):
    r"""Residual of the reference momentum equation.

    .. math::

        \mathcal E(R, U) = R(\partial_t U + (U\cdot\nabla)U) + \lambda\nabla R
            + \mu R U - \frac{\hbar^2}{4}\mathrm{Div}(R\nabla^2\log R)

    and, for ``mode="nslk_nu"``, :math:`\mathcal E^\nu = \mathcal E
    - \nu\,\mathrm{Div}(R\,\mathbb{D}U)`.
    """
    if mode not in ("elk", "nslk_nu"):
        raise ValueError(f"mode must be 'elk' or 'nslk_nu', got {mode!r}")
    g = ref.grid
    p = params
    R = checked_density(ref.R, p.density_floor)
    U = ref.U
    E = R * (dUdt + g.matvec(g.jacobian(U), U)) + p.lam * g.gradient(R) + p.mu * R * U
    E = E - bohm_force(g, R, p.hbar)
    if mode == "nslk_nu" and p.nu:
        E = E - p.nu * g.divergence_tensor(R * g.sym_grad(U))
    return E


def bohm_force(grid: TorusGrid, rho: np.ndarray, hbar: float, form: str = "log"):
    r"""Quantum force in divergence form or in Bohm-potential form.

    ``form="log"`` returns :math:`\frac{\hbar^2}{4}\mathrm{Div}(\rho\nabla^2\log\rho)`;
    ``form="sqrt"`` returns :math:`\frac{\hbar^2}{2}\rho\nabla(\Delta\sqrt\rho/\sqrt\rho)`.
    The two agree for smooth positive densities.
    """
    if form == "log":
        return 0.25 * hbar**2 * grid.divergence_tensor(rho * grid.hessian(np.log(rho)))
    if form == "sqrt":
        sq = np.sqrt(rho)
        return 0.5 * hbar**2 * rho * grid.gradient(grid.laplacian(sq) / sq)
    raise ValueError(f"unknown form {form!r}")


# -- relative entropies -----------------------------------------------------------


def _check_mass(g: TorusGrid, rho, R, rtol=MASS_RTOL):
    m, M = g.integrate(rho), g.integrate(R)
    if abs(m - M) > rtol * abs(M):
        raise MassMismatchError(f"masses differ: {m:.12g} vs {M:.12g}")


def rel_entropy_elk(state: FluidState, ref: StrongReference, params: Params,
                    accumulator: float = 0.0, vbar: np.ndarray | None = None):
    r"""Relative entropy of the ELK system.

    .. math::

        \frac12\int\rho(|\bar v - \bar V|^2 + |u - U|^2) + \lambda\int H(\rho|R)
            + \mu\int_0^t\int\rho|u - U|^2.

    ``accumulator`` holds the time integral of :func:`elk_drag_rate`;
    ``vbar`` defaults to ``(hbar/2) grad log rho``.

    Returns
    -------
    (instant, total) : tuple of float
    """
    g = state.grid
    p = params
    _check_mass(g, state.rho, ref.R)
    rho = checked_density(state.rho, p.density_floor)
    if vbar is None:
        vbar = 0.5 * p.hbar * g.gradient(np.log(rho))
    inst = 0.5 * g.integrate(rho * (g.norm2(vbar - ref.Vbar) + g.norm2(state.u - ref.U))) \
        + p.lam * g.integrate(relative_enthalpy(rho, ref.R, p.density_floor))
    return float(inst), float(inst + p.mu * accumulator)


def elk_drag_rate(state: FluidState, ref: StrongReference) -> float:
    """``integrate rho |u - U|^2``, the integrand of the ELK drag accumulator."""
    g = state.grid
    return float(g.integrate(state.rho * g.norm2(state.u - ref.U)))


def rel_entropy_nslk(aug: AugmentedState, ref: StrongReference, params: Params,
                     accumulators=(0.0, 0.0)):
    r"""Relative entropy of the augmented NSLK system.

    .. math::

        \frac12\int\rho(|\bar v - \bar V|^2 + |w - W|^2) + \lambda'\int H(\rho|R)
        + \frac{\nu}{2}\int_0^t\int\rho(|\nabla\bar v - \nabla\bar V|^2
            + |\nabla w - \nabla W|^2) + \mu\int_0^t\int\rho|w - W|^2.

    ``accumulators = (gradient, drag)`` are the time integrals of the two
    rates returned by :func:`nslk_rates`.
    """
    g = aug.grid
    p = params
    _check_mass(g, aug.rho, ref.R)
    rho = checked_density(aug.rho, p.density_floor)
    inst = 0.5 * g.integrate(rho * (g.norm2(aug.vbar - ref.Vbar) + g.norm2(aug.w - ref.W))) \
        + p.lambda_prime * g.integrate(relative_enthalpy(rho, ref.R, p.density_floor))
    acc_grad, acc_drag = accumulators
    return float(inst), float(inst + 0.5 * p.nu * acc_grad + p.mu * acc_drag)


def nslk_rates(aug: AugmentedState, ref: StrongReference):
    """Integrands ``(gradient, drag)`` of the augmented relative-entropy accumulators."""
    g = aug.grid
    rho = aug.rho
    grad = g.integrate(rho * (g.norm2(g.jacobian(aug.vbar - ref.Vbar))
                              + g.norm2(g.jacobian(aug.w - ref.W))))
    drag = g.integrate(rho * g.norm2(aug.w - ref.W))
    return float(grad), float(drag)


def b_rate(state: FluidState, ref: StrongReference, params: Params) -> float:
    r"""Integrand of the ``b`` accumulator, :math:`\int(\rho/R)|\mathcal E\cdot(U - u)|`."""
    g = state.grid
    R = checked_density(ref.R, params.density_floor)
    if ref.Escript is None:
        raise ValueError("reference has no error field")
    return float(g.integrate(state.rho / R * np.abs(g.dot(ref.Escript, ref.U - state.u))))


def b_accumulate(state: FluidState, ref: StrongReference, params: Params, prev: float,
                 dt: float, prev_rate: float | None = None) -> float:
    """Advance ``b`` over one step of length ``dt`` by the trapezoidal rule.

    ``prev_rate`` is the integrand at the start of the step; when omitted
    the integrand is taken constant over the step.
    """
    r = b_rate(state, ref, params)
    r0 = r if prev_rate is None else prev_rate
    return prev + 0.5 * dt * (r0 + r)


class TimeIntegral:
    """Trapezoidal accumulator for ``int_0^t f(s) ds`` sampled at step ends."""

    def __init__(self, t0: float = 0.0, value: float = 0.0):
        self.t = t0
        self.value = value
        self.rate = None

    def advance(self, t: float, rate: float) -> float:
        if self.rate is not None:
            self.value += 0.5 * (t - self.t) * (self.rate + rate)
        self.t, self.rate = t, rate
        return self.value


# -- inequalities -----------------------------------------------------------------


def csiszar_kullback_gap(grid: TorusGrid, rho, R, floor: float = 1e-8) -> float:
    r"""Slack in the Csiszar-Kullback inequality.

    .. math:: 2\|\rho\|_{L^1}\int\rho\log(\rho/R) - \|\rho - R\|_{L^1}^2 \ge 0.
    """
    _check_mass(grid, rho, R)
    rho = checked_density(rho, floor)
    R = checked_density(R, floor)
    l1 = grid.integrate(np.abs(rho))
    kl = grid.integrate(rho * np.log(rho / R))
    return float(2.0 * l1 * kl - grid.integrate(np.abs(rho - R)) ** 2)


def bohm_inequality_ratio(grid: TorusGrid, rho, floor: float = 1e-8) -> float:
    r"""Ratio :math:`\int\rho|\nabla^2\log\rho|^2 / \int|\nabla^2\sqrt\rho|^2`."""
    rho = checked_density(rho, floor)
    den = grid.integrate(grid.norm2(grid.hessian(np.sqrt(rho))))
    if den < 1e-14:
        raise DegenerateError(f"denominator {den:.2e} vanishes")
    return float(grid.integrate(_hess_log2(grid, rho)) / den)


# -- reports ----------------------------------------------------------------------


@dataclass
class EntropyReport:
    """Diagnostics at one report time; ``None`` marks an absent value."""

    time: float
    mass: float
    energy_nslk: Optional[float] = None
    dissipation_nslk: Optional[float] = None
    bd_entropy: Optional[float] = None
    bd_dissipation: Optional[float] = None
    energy_reg: Optional[float] = None
    dissipation_reg: Optional[float] = None
    bd_entropy_reg: Optional[float] = None
    aug_energy: Optional[float] = None
    aug_dissipation: Optional[float] = None
    rel_entropy_instant: Optional[float] = None
    rel_entropy_total: Optional[float] = None
    b_accumulator: Optional[float] = None
    ck_gap: Optional[float] = None
    bohm_ratio: Optional[float] = None

    def as_row(self) -> list:
        return ["" if v is None else repr(float(v)) for v in asdict(self).values()]


REPORT_COLUMNS = ["time", "mass", "E", "D", "BDE", "BDD", "Ereg", "Dreg", "BDEreg",
                  "augE", "augD", "relE_inst", "relE_total", "b", "ck_gap", "bohm_ratio"]
_COLUMN_FIELDS = dict(zip(REPORT_COLUMNS, (f.name for f in fields(EntropyReport))))


def write_reports(path, reports) -> None:
    """Write report rows to ``path`` as CSV with the fixed column header."""
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(REPORT_COLUMNS)
        for r in reports:
            w.writerow(r.as_row())


def read_reports(path) -> list[EntropyReport]:
    """Inverse of :func:`write_reports`."""
    out = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            kw = {_COLUMN_FIELDS[k]: (float(v) if v != "" else None) for k, v in row.items()}
            out.append(EntropyReport(**kw))
    return out
