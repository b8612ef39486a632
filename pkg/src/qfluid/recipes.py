"""Named initial-data recipes.

Every recipe returns a :class:`~qfluid.state.FluidState`; use
:func:`~qfluid.state.inverse_madelung` or :func:`~qfluid.state.augment` to
move to the other representations.  Random recipes draw band-limited Fourier
series from a seeded generator and exponentiate the density, so they are
positive and reproducible.
"""
from __future__ import annotations

import numpy as np

from .errors import ParamError
from .grid import TorusGrid
from .state import FluidState, Params, WaveFunction, madelung

__all__ = ["RECIPES", "make_initial", "random_field", "random_density", "random_potential_flow"]


def random_field(grid: TorusGrid, rng, kmax: int = 4, amp: float = 1.0) -> np.ndarray:
    """Zero-mean band-limited scalar with max-norm ``amp``."""
    f = grid.project(rng.standard_normal(grid.shape), kmax)
    f = f - grid.mean(f)
    peak = np.max(np.abs(f))
    return amp * f / peak if peak > 0 else f


def random_density(grid: TorusGrid, seed: int, kmax: int = 4, amp: float = 0.3,
                   mean: float = 1.0) -> np.ndarray:
    """``exp(f)`` rescaled to the given mean, ``f`` band-limited with ``|f| <= amp``."""
    rng = np.random.default_rng(seed)
    rho = np.exp(random_field(grid, rng, kmax, amp))
    return mean * rho / grid.mean(rho)


def random_potential_flow(grid: TorusGrid, seed: int, kmax: int = 4, amp: float = 0.1):
    """Gradient of a band-limited potential, scaled to max-norm ``amp``."""
    rng = np.random.default_rng(seed)
    u = grid.gradient(random_field(grid, rng, kmax))
    peak = np.max(np.sqrt(grid.norm2(u)))
    return amp * u / peak if peak > 0 else u


def _equilibrium(g, p, rho0=1.0):
    return FluidState(g, np.full(g.shape, float(rho0)), g.zeros_vector())


def _uniform_flow(g, p, rho0=1.0, velocity=(0.1,)):
    c = np.resize(np.asarray(velocity, float), g.dim).reshape((g.dim,) + (1,) * g.dim)
    return FluidState(g, np.full(g.shape, float(rho0)), np.broadcast_to(c, (g.dim,) + g.shape))


def _cosine(g, p, rho0=1.0, amp=0.1, uamp=0.1, k=1, axis=0):
    x = g.x[axis]
    u = g.zeros_vector()
    u[axis] = uamp * np.sin(k * x)
    return FluidState(g, rho0 + amp * np.cos(k * x), u)


def _madelung_wave(g, p, rho0=1.0, amp=0.3, phase=1.0, k=1, axis=0):
    # psi = (rho0 + amp cos kx) e^{i phase sin(kx) / hbar}, as used by the Strang study
    x = g.x[axis]
    psi = (rho0 + amp * np.cos(k * x)) * np.exp(1j * phase * np.sin(k * x) / p.hbar)
    return madelung(WaveFunction(g, psi), p)


def _random(g, p, seed=0, amp=0.3, uamp=0.1, kmax=4):
    return FluidState(g, random_density(g, seed, kmax, amp),
                      random_potential_flow(g, seed + 1, kmax, uamp))


RECIPES = {
    "equilibrium": _equilibrium,
    "uniform_flow": _uniform_flow,
    "cosine": _cosine,
    "madelung_wave": _madelung_wave,
    "random": _random,
}


def make_initial(name: str, grid: TorusGrid, params: Params, **kw) -> FluidState:
    """Build the named recipe; keyword arguments are the recipe's parameters."""
    if name not in RECIPES:
        raise ParamError(f"unknown initial-data recipe {name!r}; choose from {sorted(RECIPES)}")
    try:
        return RECIPES[name](grid, params, **kw)
    except TypeError as e:
        raise ParamError(f"bad parameters for recipe {name!r}: {e}") from None
