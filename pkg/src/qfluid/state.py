r"""Physical parameters, state containers and the Madelung bridge.

Hydrodynamic states carry the density :math:`\rho` and velocity :math:`u`;
augmented states carry :math:`(\rho, w, \bar v)` with

.. math::

    w = u + \frac{\nu}{2}\nabla\log\rho, \qquad
    \bar v = \frac{\hbar_\nu}{2}\nabla\log\rho, \qquad
    \hbar_\nu = \sqrt{\hbar^2 - \nu^2}.

The Madelung transform maps a wave function :math:`\psi = \sqrt\rho\,
e^{iS/\hbar}` to :math:`\rho = |\psi|^2`, :math:`\rho u = \hbar\,
\mathrm{Im}(\bar\psi\nabla\psi)`.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import NotGradientError, ParamError, VacuumError, WindingError
from .grid import TorusGrid

__all__ = [
    "Params",
    "FluidState",
    "AugmentedState",
    "WaveFunction",
    "checked_density",
    "madelung",
    "inverse_madelung",
    "augment",
    "deaugment",
]

DENSITY_FLOOR = 1e-8

_WEIGHTS = ("delta1", "delta2", "eta1", "eta2", "r0", "r1")


@dataclass(frozen=True)
class Params:
    """Physical and regularization constants.

    ``lam`` is the pressure constant (``"lambda"`` in dictionaries), ``mu``
    the drag, ``hbar`` the Planck-like constant and ``nu`` the viscosity.
    The six regularization weights lie in ``[0, 1)``.
    """

    lam: float = 1.0
    mu: float = 1.0
    hbar: float = 1.0
    nu: float = 0.0
    delta1: float = 0.0
    delta2: float = 0.0
    eta1: float = 0.0
    eta2: float = 0.0
    r0: float = 0.0
    r1: float = 0.0
    alpha: float = 2.0
    s: int = 1
    density_floor: float = DENSITY_FLOOR

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not np.isfinite(v):
                raise ParamError(f"{f.name} must be finite, got {v}")
        if self.mu < 0:
            raise ParamError(f"mu must be >= 0, got {self.mu}")
        if self.hbar <= 0:
            raise ParamError(f"hbar must be > 0, got {self.hbar}")
        if self.nu < 0:
            raise ParamError(f"nu must be >= 0, got {self.nu}")
        for name in _WEIGHTS:
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ParamError(f"{name} must lie in [0, 1), got {v}")
        if self.alpha <= 0:
            raise ParamError(f"alpha must be > 0, got {self.alpha}")
        if int(self.s) != self.s or self.s < 1:
            raise ParamError(f"s must be an integer >= 1, got {self.s}")
        object.__setattr__(self, "s", int(self.s))
        if self.density_floor <= 0:
            raise ParamError(f"density_floor must be > 0, got {self.density_floor}")

    @property
    def lambda_prime(self) -> float:
        """Pressure constant of the augmented system, ``lam - mu*nu/2``."""
        return self.lam - 0.5 * self.mu * self.nu

    @property
    def lambda_prime_bd(self) -> float:
        """Pressure constant of the first-order BD entropy, ``lam - mu*nu``."""
        return self.lam - self.mu * self.nu

    @property
    def hbar_nu2(self) -> float:
        return self.hbar**2 - self.nu**2

    @property
    def hbar_nu(self) -> float:
        if self.hbar_nu2 <= 0:
            raise ParamError(
                f"augmented dynamics need hbar^2 - nu^2 > 0, got {self.hbar_nu2:g}"
            )
        return math.sqrt(self.hbar_nu2)

    @property
    def has_regularization(self) -> bool:
        return any(getattr(self, n) != 0 for n in _WEIGHTS)

    def require_augmented(self):
        """Raise :class:`ParamError` unless ``lambda' > 0`` and ``hbar_nu^2 > 0``."""
        if self.hbar_nu2 <= 0:
            raise ParamError(
                f"augmented dynamics need hbar^2 - nu^2 > 0, got {self.hbar_nu2:g}"
            )
        if self.lambda_prime <= 0:
            raise ParamError(
                "augmented dynamics need lambda' = lambda - mu*nu/2 > 0, "
                f"got {self.lambda_prime:g}; reduce nu or mu"
            )

    def replace(self, **kw) -> "Params":
        d = asdict(self)
        d.update(kw)
        return Params(**d)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["lambda"] = d.pop("lam")
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "Params":
        d = dict(d)
        if "lambda" in d:
            d["lam"] = d.pop("lambda")
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise ParamError(f"unknown parameter(s): {sorted(extra)}")
        return cls(**d)


def _frozen(a, dtype=float) -> np.ndarray:
    a = np.array(a, dtype=dtype)
    a.flags.writeable = False
    return a


def _check_finite(name, a):
    if not np.all(np.isfinite(a)):
        raise ValueError(f"{name} contains non-finite values")


def checked_density(rho: np.ndarray, floor: float) -> np.ndarray:
    """Return ``rho`` clamped at ``floor``.

    Raises :class:`VacuumError` when the pre-clamp minimum is below
    ``floor / 10`` or the field is not finite.
    """
    m = np.min(rho)
    if not np.isfinite(m) or m < floor / 10.0:
        raise VacuumError(f"density minimum {m:.3e} below floor/10 = {floor / 10:.1e}")
    return np.maximum(rho, floor)


@dataclass(frozen=True, eq=False)
class FluidState:
    """Density and velocity on a grid at one time."""

    grid: TorusGrid
    rho: np.ndarray
    u: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        rho = _frozen(self.rho)
        u = _frozen(self.u)
        if rho.shape != self.grid.shape:
            raise ValueError(f"rho has shape {rho.shape}, grid wants {self.grid.shape}")
        if u.shape != (self.grid.dim,) + self.grid.shape:
            raise ValueError(f"u has shape {u.shape}")
        _check_finite("rho", rho)
        _check_finite("u", u)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "time", float(self.time))

    @property
    def mass(self) -> float:
        return float(self.grid.integrate(self.rho))

    @property
    def momentum(self) -> np.ndarray:
        return self.rho * self.u


@dataclass(frozen=True, eq=False)
class AugmentedState:
    """Augmented unknowns ``(rho, w, vbar)`` at one time."""

    grid: TorusGrid
    rho: np.ndarray
    w: np.ndarray
    vbar: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        vshape = (self.grid.dim,) + self.grid.shape
        arrays = {"rho": self.rho, "w": self.w, "vbar": self.vbar}
        for name, a in arrays.items():
            a = _frozen(a)
            want = self.grid.shape if name == "rho" else vshape
            if a.shape != want:
                raise ValueError(f"{name} has shape {a.shape}, expected {want}")
            _check_finite(name, a)
            object.__setattr__(self, name, a)
        object.__setattr__(self, "time", float(self.time))

    @property
    def mass(self) -> float:
        return float(self.grid.integrate(self.rho))

    def gradient_defect(self) -> float:
        """Max-norm of the antisymmetric gradient of ``vbar``."""
        return float(np.max(np.abs(self.grid.antisym_grad(self.vbar))))


@dataclass(frozen=True, eq=False)
class WaveFunction:
    """Complex wave function on a grid."""

    grid: TorusGrid
    psi: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        psi = _frozen(self.psi, complex)
        if psi.shape != self.grid.shape:
            raise ValueError(f"psi has shape {psi.shape}")
        _check_finite("psi", psi)
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "time", float(self.time))

    @property
    def norm2(self) -> float:
        """``integrate |psi|^2``."""
        return float(self.grid.integrate(np.abs(self.psi) ** 2))


def madelung(wave: WaveFunction, params: Params) -> FluidState:
    """Hydrodynamic image ``(|psi|^2, hbar Im(conj(psi) grad psi) / |psi|^2)``."""
    g = wave.grid
    rho = checked_density(np.abs(wave.psi) ** 2, params.density_floor)
    current = params.hbar * np.imag(np.conj(wave.psi) * g.gradient(wave.psi))
    return FluidState(g, rho, current / rho, wave.time)


def inverse_madelung(state: FluidState, params: Params, curl_tol: float = 1e-6,
                     winding_tol: float = 1e-8) -> WaveFunction:
    """Wave function ``sqrt(rho) exp(iS/hbar)`` with ``grad S = u``, mean ``S = 0``.

    Raises
    ------
    NotGradientError
        If the antisymmetric gradient of ``u`` exceeds ``curl_tol``.
    WindingError
        If ``u`` has nonzero circulation along some axis.
    """
    g = state.grid
    rho = checked_density(state.rho, params.density_floor)
    u = state.u
    if g.dim > 1:
        curl = float(np.max(np.abs(g.antisym_grad(u))))
        if curl > curl_tol:
            raise NotGradientError(f"velocity is not a gradient (curl {curl:.2e})")
    # for a gradient field the circulation along axis i is 2*pi*mean(u_i)
    scale = 1.0 + float(np.max(np.abs(u)))
    for i in range(g.dim):
        circ = g.length * float(g.mean(u[i]))
        if abs(circ) > winding_tol * scale:
            raise WindingError(f"nonzero circulation {circ:.3e} along axis {i}")
    S = g.inverse_laplacian(g.divergence(u))
    psi = np.sqrt(rho) * np.exp(1j * S / params.hbar)
    return WaveFunction(g, psi, state.time)


def augment(state: FluidState, params: Params) -> AugmentedState:
    """``w = u + (nu/2) grad log rho`` and ``vbar = (hbar_nu/2) grad log rho``."""
    g = state.grid
    rho = checked_density(state.rho, params.density_floor)
    glog = g.gradient(np.log(rho))
    w = state.u + 0.5 * params.nu * glog
    vbar = 0.5 * params.hbar_nu * glog
    return AugmentedState(g, state.rho, w, vbar, state.time)


def deaugment(aug: AugmentedState, params: Params) -> FluidState:
    """Recover ``u = w - (nu/2) grad log rho``."""
    g = aug.grid
    rho = checked_density(aug.rho, params.density_floor)
    u = aug.w - 0.5 * params.nu * g.gradient(np.log(rho))
    return FluidState(g, aug.rho, u, aug.time)
