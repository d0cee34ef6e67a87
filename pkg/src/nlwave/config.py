"""Run configuration: JSON documents validated into ready-to-run pieces.

A document is a single JSON object with blocks grid, symbols,
nonlinearity, initial_data, solver, output, checks, all optional, all
keys checked (a typo gets a did-you-mean hint).  Parsing is eager: the
symbol spec, nonlinearity, and solver settings are constructed and
validated here so a bad document never reaches the solver.  The shipped
config_schema.json documents every key and default.
"""

from __future__ import annotations

import difflib
import json
from dataclasses import dataclass

from .grid import Grid, GridError
from .propagator import PropagatorError, QuadratureSpec
from .solver import (
    NonlinearitySpec,
    SolverConfig,
    SolverError,
    power_nonlinearity,
    zero_nonlinearity,
)
from .symbols import SymbolError, SymbolSpec, expression_symbols, preset_symbols

SCHEMA_VERSION = 1

SYMBOL_PRESETS = ("classical", "bessel-a", "thm51-diagonal")
NONLINEARITY_PRESETS = ("power", "none")
PROFILES = ("gaussian", "plane-wave", "random-smooth")
CHECK_NAMES = ("kernel-decay", "derivative-bound", "global-existence")


class ConfigError(ValueError):
    """Malformed document, unknown key, or invalid field value."""


_REQUIRED = object()


def _fail(path: str, msg: str):
    raise ConfigError(f"{path}: {msg}")


def _block(doc: dict, name: str) -> dict:
    block = doc.get(name, {})
    if not isinstance(block, dict):
        _fail(name, f"expected an object, got {type(block).__name__}")
    return block


def _check_keys(block: dict, path: str, allowed: tuple[str, ...]) -> None:
    for key in block:
        if key not in allowed:
            where = f"{path}.{key}" if path else key
            hint = difflib.get_close_matches(key, allowed, n=1, cutoff=0.6)
            suffix = f" (did you mean {hint[0]!r}?)" if hint else ""
            raise ConfigError(f"unknown key {where!r}{suffix}")


def _get(block: dict, path: str, key: str, kind, default=_REQUIRED):
    if key not in block:
        if default is _REQUIRED:
            _fail(f"{path}.{key}", "required field is missing")
        return default
    val = block[key]
    if kind is float:
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            _fail(f"{path}.{key}", f"expected a number, got {val!r}")
        return float(val)
    if kind is int:
        if isinstance(val, bool) or not isinstance(val, int):
            _fail(f"{path}.{key}", f"expected an integer, got {val!r}")
        return val
    if not isinstance(val, kind):
        _fail(f"{path}.{key}", f"expected {kind.__name__}, got {val!r}")
    return val


@dataclass(frozen=True)
class InitialData:
    """Named data profile; delta scales the data size."""

    profile: str
    delta: float
    seed: int = 0
    mode: tuple[int, ...] = (1,)
    width: float | None = None
    component: int = 0


@dataclass(frozen=True)
class OutputSpec:
    directory: str
    csv_cadence: int
    snapshot_cadence: int


@dataclass(frozen=True)
class ChecksSpec:
    run: tuple[str, ...]
    M_bound: float
    k: float
    sigma_max: float


@dataclass(frozen=True)
class RunConfig:
    grid: Grid
    symbols: SymbolSpec
    nonlinearity: NonlinearitySpec
    initial: InitialData
    solver: SolverConfig
    t_final: float
    output: OutputSpec
    checks: ChecksSpec
    kernel_r: float
    kernel_C_g: float


def _parse_grid(doc: dict) -> Grid:
    block = _block(doc, "grid")
    _check_keys(block, "grid", ("n", "L", "M", "N"))
    n = _get(block, "grid", "n", int, 1)
    L = _get(block, "grid", "L", float, 3.141592653589793)
    M = _get(block, "grid", "M", int, 64)
    N = _get(block, "grid", "N", int, 1)
    if n not in (1, 2):
        _fail("grid.n", f"must be 1 or 2, got {n}")
    if L <= 0:
        _fail("grid.L", f"must be positive, got {L}")
    if M < 4 or M & (M - 1):
        _fail("grid.M", f"must be a power of two >= 4, got {M}")
    if N < 1:
        _fail("grid.N", f"must be at least 1, got {N}")
    try:
        return Grid(n=n, L=L, M=M, N=N)
    except GridError as e:  # pragma: no cover - guarded above
        raise ConfigError(f"grid: {e}") from e


def _parse_symbols(doc: dict, N: int, n: int) -> tuple[SymbolSpec, float, float]:
    block = _block(doc, "symbols")
    _check_keys(
        block,
        "symbols",
        ("preset", "a", "g", "A_diag", "A_matrix", "m", "r", "C_g", "sigma", "c"),
    )
    m = _get(block, "symbols", "m", float, 1.0)
    r = _get(block, "symbols", "r", float, 2.0)
    C_g = _get(block, "symbols", "C_g", float, 1.0)
    sigma = _get(block, "symbols", "sigma", float, 1.0)
    c = block.get("c")
    if c is not None:
        if not isinstance(c, list) or not all(
            isinstance(x, (int, float)) and not isinstance(x, bool) for x in c
        ):
            _fail("symbols.c", f"expected a list of numbers, got {c!r}")
        c = [float(x) for x in c]
    if r < 0:
        _fail("symbols.r", f"must be nonnegative, got {r}")
    if C_g <= 0:
        _fail("symbols.C_g", f"must be positive, got {C_g}")

    expr_keys = [k for k in ("a", "g", "A_diag", "A_matrix") if k in block]
    if "preset" in block or not expr_keys:
        if expr_keys:
            _fail("symbols", f"preset excludes expression keys {expr_keys}")
        name = _get(block, "symbols", "preset", str, "classical")
        if name not in SYMBOL_PRESETS:
            _fail(
                "symbols.preset",
                f"unknown preset {name!r}; choose from {', '.join(SYMBOL_PRESETS)}",
            )
        try:
            spec = preset_symbols(name, N=N, m=m, r=r, sigma=sigma, c=c)
        except SymbolError as e:
            raise ConfigError(f"symbols: {e}") from e
        return spec, r, C_g

    if "a" not in block or "g" not in block:
        _fail("symbols", "needs either a preset or expressions for a, g, and A")
    if ("A_diag" in block) == ("A_matrix" in block):
        _fail("symbols", "expressions need exactly one of A_diag or A_matrix")
    a = _get(block, "symbols", "a", str)
    g = _get(block, "symbols", "g", str)
    try:
        spec = expression_symbols(
            N, n, a, g, A_diag=block.get("A_diag"), A_matrix=block.get("A_matrix")
        )
    except SymbolError as e:
        raise ConfigError(f"symbols: {e}") from e
    return spec, r, C_g


def _parse_nonlinearity(doc: dict, N: int) -> NonlinearitySpec:
    block = _block(doc, "nonlinearity")
    _check_keys(block, "nonlinearity", ("preset", "coefficient", "exponent"))
    name = _get(block, "nonlinearity", "preset", str, "none")
    if name not in NONLINEARITY_PRESETS:
        _fail(
            "nonlinearity.preset",
            f"unknown preset {name!r}; choose from {', '.join(NONLINEARITY_PRESETS)}",
        )
    if name == "none":
        for key in ("coefficient", "exponent"):
            if key in block:
                _fail(f"nonlinearity.{key}", 'not allowed with preset "none"')
        return zero_nonlinearity(N)
    c = _get(block, "nonlinearity", "coefficient", float, 1.0)
    m = _get(block, "nonlinearity", "exponent", int, 2)
    try:
        return power_nonlinearity(N, c=c, m=m)
    except SolverError as e:
        raise ConfigError(f"nonlinearity.exponent: {e}") from e


def _parse_initial(doc: dict, grid: Grid) -> InitialData:
    block = _block(doc, "initial_data")
    _check_keys(
        block, "initial_data", ("profile", "delta", "seed", "mode", "width", "component")
    )
    profile = _get(block, "initial_data", "profile", str, "gaussian")
    if profile not in PROFILES:
        hint = difflib.get_close_matches(profile, PROFILES, n=1, cutoff=0.6)
        suffix = f" (did you mean {hint[0]!r}?)" if hint else ""
        _fail("initial_data.profile", f"unknown profile {profile!r}{suffix}")
    delta = _get(block, "initial_data", "delta", float, 0.01)
    if delta < 0:
        _fail("initial_data.delta", f"must be nonnegative, got {delta}")
    seed = _get(block, "initial_data", "seed", int, 0)
    component = _get(block, "initial_data", "component", int, 0)
    if not 0 <= component < grid.N:
        _fail("initial_data.component", f"must be in [0, {grid.N}), got {component}")
    mode = block.get("mode", [1] * grid.n)
    if (
        not isinstance(mode, list)
        or len(mode) != grid.n
        or not all(isinstance(k, int) and not isinstance(k, bool) for k in mode)
    ):
        _fail("initial_data.mode", f"expected a list of {grid.n} integers, got {mode!r}")
    if any(abs(k) >= grid.M // 2 for k in mode):
        _fail("initial_data.mode", f"mode {mode} is outside the grid's resolved band")
    width = None
    if block.get("width") is not None:
        width = _get(block, "initial_data", "width", float)
        if width <= 0:
            _fail("initial_data.width", f"must be positive, got {width}")
    return InitialData(
        profile=profile,
        delta=delta,
        seed=seed,
        mode=tuple(mode),
        width=width,
        component=component,
    )


def _parse_solver(doc: dict) -> tuple[SolverConfig, float]:
    block = _block(doc, "solver")
    _check_keys(
        block,
        "solver",
        (
            "s",
            "picard_tol",
            "max_picard_iters",
            "quadrature",
            "nodes",
            "C0",
            "C1",
            "blowup_threshold",
            "window_override",
            "t_final",
        ),
    )
    rule = _get(block, "solver", "quadrature", str, "trapezoid")
    if rule not in ("trapezoid", "simpson"):
        _fail("solver.quadrature", f"must be trapezoid or simpson, got {rule!r}")
    nodes = _get(block, "solver", "nodes", int, 9)
    try:
        quad = QuadratureSpec(rule, nodes)
    except PropagatorError as e:
        raise ConfigError(f"solver.nodes: {e}") from e
    override = None
    if block.get("window_override") is not None:
        override = _get(block, "solver", "window_override", float)
    t_final = _get(block, "solver", "t_final", float, 1.0)
    if t_final <= 0:
        _fail("solver.t_final", f"must be positive, got {t_final}")
    try:
        cfg = SolverConfig(
            s=_get(block, "solver", "s", float, 2.0),
            picard_tol=_get(block, "solver", "picard_tol", float, 1e-10),
            max_picard_iters=_get(block, "solver", "max_picard_iters", int, 50),
            quad=quad,
            C0=_get(block, "solver", "C0", float, 1.0),
            C1=_get(block, "solver", "C1", float, 1.0),
            blowup_threshold=_get(block, "solver", "blowup_threshold", float, 1e6),
            window_override=override,
        )
    except SolverError as e:
        raise ConfigError(f"solver: {e}") from e
    return cfg, t_final


def _parse_output(doc: dict) -> OutputSpec:
    block = _block(doc, "output")
    _check_keys(block, "output", ("directory", "csv_cadence", "snapshot_cadence"))
    directory = _get(block, "output", "directory", str, "out")
    csv_cadence = _get(block, "output", "csv_cadence", int, 1)
    snap_cadence = _get(block, "output", "snapshot_cadence", int, 10)
    if csv_cadence < 1:
        _fail("output.csv_cadence", f"must be at least 1, got {csv_cadence}")
    if snap_cadence < 1:
        _fail("output.snapshot_cadence", f"must be at least 1, got {snap_cadence}")
    return OutputSpec(directory, csv_cadence, snap_cadence)


def _parse_checks(doc: dict) -> ChecksSpec:
    block = _block(doc, "checks")
    _check_keys(block, "checks", ("run", "M_bound", "k", "sigma_max"))
    run = block.get("run", list(CHECK_NAMES))
    if not isinstance(run, list) or not all(isinstance(x, str) for x in run):
        _fail("checks.run", f"expected a list of check names, got {run!r}")
    for name in run:
        if name not in CHECK_NAMES:
            hint = difflib.get_close_matches(name, CHECK_NAMES, n=1, cutoff=0.6)
            suffix = f" (did you mean {hint[0]!r}?)" if hint else ""
            _fail("checks.run", f"unknown check {name!r}{suffix}")
    M_bound = _get(block, "checks", "M_bound", float, 10.0)
    k = _get(block, "checks", "k", float, 0.5)
    sigma_max = _get(block, "checks", "sigma_max", float, 5.0)
    if M_bound <= 0:
        _fail("checks.M_bound", f"must be positive, got {M_bound}")
    if k <= 0:
        _fail("checks.k", f"must be positive, got {k}")
    if sigma_max <= 0:
        _fail("checks.sigma_max", f"must be positive, got {sigma_max}")
    return ChecksSpec(tuple(run), M_bound, k, sigma_max)


_TOP_KEYS = (
    "schema_version",
    "grid",
    "symbols",
    "nonlinearity",
    "initial_data",
    "solver",
    "output",
    "checks",
)


def parse_config(document: str) -> RunConfig:
    """Validate a JSON document into a RunConfig with defaults filled."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as e:
        raise ConfigError(f"invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from e
    if not isinstance(doc, dict):
        raise ConfigError(f"expected a JSON object at top level, got {type(doc).__name__}")
    _check_keys(doc, "", _TOP_KEYS)
    version = _get(doc, "", "schema_version", int, SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        _fail("schema_version", f"this build reads version {SCHEMA_VERSION}, got {version}")

    grid = _parse_grid(doc)
    symbols, kernel_r, kernel_C_g = _parse_symbols(doc, grid.N, grid.n)
    nonlinearity = _parse_nonlinearity(doc, grid.N)
    initial = _parse_initial(doc, grid)
    solver, t_final = _parse_solver(doc)
    output = _parse_output(doc)
    checks = _parse_checks(doc)
    return RunConfig(
        grid=grid,
        symbols=symbols,
        nonlinearity=nonlinearity,
        initial=initial,
        solver=solver,
        t_final=t_final,
        output=output,
        checks=checks,
        kernel_r=kernel_r,
        kernel_C_g=kernel_C_g,
    )


def load_config(path) -> RunConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise ConfigError(f"cannot read config {path}: {e}") from e
    return parse_config(text)
