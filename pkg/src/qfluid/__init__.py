"""Pseudo-spectral laboratory for isothermal quantum fluids with drag.

Modules
-------
grid
    Periodic grid, FFT derivatives and dealiasing.
state
    Parameters, state containers and the Madelung bridge.
functionals
    Energies, BD entropies, relative entropies and their dissipations.
solver
    Time integration of the regularized and augmented systems.
oracle
    Split-step Schrodinger-Langevin solver used as an independent reference.
certify
    Manufactured references, Gronwall certificates and the viscosity sweep.
recipes, io, cli
    Initial data, snapshot files and the command-line front end.
"""
from .errors import (BlowupError, ConfigError, DegenerateError, GridMismatchError,
                     MassMismatchError, MissingDataError, NotGradientError, ParamError,
                     QFluidError, VacuumError, WindingError)
from .grid import TorusGrid
from .solver import SolverConfig, Trajectory, run
from .state import (AugmentedState, FluidState, Params, WaveFunction, augment, deaugment,
                    inverse_madelung, madelung)

__version__ = "0.1.0"

__all__ = [
    "TorusGrid",
    "Params",
    "FluidState",
    "AugmentedState",
    "WaveFunction",
    "madelung",
    "inverse_madelung",
    "augment",
    "deaugment",
    "SolverConfig",
    "Trajectory",
    "run",
    "QFluidError",
    "ParamError",
    "VacuumError",
    "NotGradientError",
    "WindingError",
    "MassMismatchError",
    "DegenerateError",
    "BlowupError",
    "GridMismatchError",
    "MissingDataError",
    "ConfigError",
]
