"""Pseudospectral solver for nonlocal wave equations with vector-valued unknowns.

Solves u_tt - a*Lap(u) + A*u = Lap[g*f(u)] on periodic boxes, where a, g
are scalar convolution kernels, A is an N x N matrix kernel, and f is a
pointwise nonlinearity.  All kernels enter through their Fourier symbols.
"""

from .config import ConfigError, RunConfig, load_config, parse_config
from .energy import (
    ConservationMonitor,
    EnergyBreakdown,
    EnergyError,
    energy_total,
    global_existence_check,
)
from .grid import (
    Field,
    Grid,
    GridError,
    State,
    forward_transform,
    inverse_transform,
    l2_norm,
    sobolev_norm,
    sup_norm,
    to_physical,
    to_spectral,
    zero_field,
)
from .propagator import QuadratureSpec, linear_homogeneous_solve
from .runner import RunArtifacts, run_scenario
from .snapshot import SnapshotError, read_snapshot, write_snapshot
from .solver import (
    NonlinearitySpec,
    RunStatus,
    SolverConfig,
    SolverError,
    power_nonlinearity,
    solve_ivp,
    zero_nonlinearity,
)
from .symbols import (
    SymbolError,
    SymbolSpec,
    build_symbol_table,
    expression_symbols,
    preset_symbols,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConservationMonitor",
    "EnergyBreakdown",
    "EnergyError",
    "Field",
    "Grid",
    "GridError",
    "NonlinearitySpec",
    "QuadratureSpec",
    "RunArtifacts",
    "RunConfig",
    "RunStatus",
    "SnapshotError",
    "SolverConfig",
    "SolverError",
    "State",
    "SymbolError",
    "SymbolSpec",
    "build_symbol_table",
    "energy_total",
    "expression_symbols",
    "forward_transform",
    "global_existence_check",
    "inverse_transform",
    "l2_norm",
    "linear_homogeneous_solve",
    "load_config",
    "parse_config",
    "power_nonlinearity",
    "preset_symbols",
    "read_snapshot",
    "run_scenario",
    "sobolev_norm",
    "solve_ivp",
    "sup_norm",
    "to_physical",
    "to_spectral",
    "write_snapshot",
    "zero_field",
    "zero_nonlinearity",
    "__version__",
]
