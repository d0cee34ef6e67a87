"""Run orchestration: hypothesis checks, the solve loop, output files.

A scenario writes three kinds of artifact into its output directory:
checks.txt (key: value lines, one pass/fail per requested hypothesis),
series.csv (one row per recorded window, full-precision floats), and
state_NNNNNN.nlwv snapshots keyed by window index.  Floats go through
repr so identical configs reproduce identical bytes.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig
from .energy import ConservationMonitor, MonitorRecord, global_existence_check
from .grid import PHYSICAL, SPECTRAL, Field, Grid, State, to_physical, zero_field
from .snapshot import write_snapshot
from .solver import RunStatus, WindowReport, YNorms, solve_ivp, y_norms
from .symbols import (
    SymbolTable,
    build_symbol_table,
    check_kernel_decay,
    check_symbol_derivative_bound,
)

CSV_COLUMNS = (
    "t",
    "E_total",
    "E_corrected",
    "E_kinetic",
    "E_disp_a",
    "E_disp_A",
    "E_zero_mode",
    "E_potential",
    "E_correction",
    "sup_u",
    "hs_u",
    "sup_ut",
    "hs_ut",
    "picard_iters",
    "contraction_ratio",
    "window_T",
)


def gaussian_state(grid: Grid, delta: float, width: float | None, component: int) -> State:
    """A periodic bump of height delta centered mid-domain, at rest."""
    w = width if width is not None else grid.L / 4.0
    profile = np.ones((grid.M,) * grid.n)
    for axis in range(grid.n):
        shape = [1] * grid.n
        shape[axis] = grid.M
        profile = profile * np.exp(
            -((grid.x - grid.L) ** 2) / (2.0 * w**2)
        ).reshape(shape)
    vals = grid.zero_values()
    vals[..., component] = delta * profile
    return State(
        Field(grid, vals, PHYSICAL, 0.0, real=True),
        zero_field(grid, PHYSICAL),
    )


def plane_wave_state(grid: Grid, table: SymbolTable, delta: float, mode, component: int) -> State:
    """A traveling cosine: u = delta cos(k.x), u_t matched through eta.

    With that pairing the linear evolution is a pure phase drift, so the
    norms of a linear run stay constant in time.
    """
    idx = tuple(int(k) % grid.M for k in mode)
    neg = tuple(int(-k) % grid.M for k in mode)
    e = np.zeros(grid.N, dtype=np.complex128)
    e[component] = 1.0

    u_vals = grid.zero_values()
    u_vals[idx] += 0.5 * delta * e
    u_vals[neg] += 0.5 * delta * e

    def eta_matrix(at):
        Q = table.Q[at]
        return (Q * table.eta[at]) @ Q.conj().T

    v_vals = grid.zero_values()
    v_vals[idx] += -1j * (eta_matrix(idx) @ u_vals[idx])
    v_vals[neg] += 1j * (eta_matrix(neg) @ u_vals[neg])

    u = to_physical(Field(grid, u_vals, SPECTRAL, 0.0))
    v = to_physical(Field(grid, v_vals, SPECTRAL, 0.0))
    if np.max(np.abs(u.values.imag)) == 0.0:
        u = Field(grid, u.values, PHYSICAL, 0.0, real=True)
    if np.max(np.abs(v.values.imag)) == 0.0:
        v = Field(grid, v.values, PHYSICAL, 0.0, real=True)
    return State(u, v)


def random_smooth_state(grid: Grid, delta: float, seed: int, s: float) -> State:
    """Seeded random data, band-limited to |k| <= M/4 with smooth decay.

    Spectra fall off like (1+|xi|^2)^{-(s+1)/2}, keeping the draw inside
    the working Sobolev class; the pair is rescaled so the combined
    sup + H^s size of (u, u_t) is exactly delta.
    """
    rng = np.random.default_rng(seed)
    k_sq = sum(np.square(np.meshgrid(*([grid.k_axis] * grid.n), indexing="ij")))
    band = k_sq <= (grid.M / 4.0) ** 2
    decay = (1.0 + grid.xi_sq) ** (-(s + 1.0) / 2.0)

    def draw():
        vals = grid.zero_values()
        for j in range(grid.N):
            z = rng.standard_normal((grid.M,) * grid.n) + 1j * rng.standard_normal(
                (grid.M,) * grid.n
            )
            vals[..., j] = np.where(band, z * decay, 0.0)
        phys = to_physical(Field(grid, vals, SPECTRAL, 0.0))
        return Field(grid, phys.values.real.astype(np.complex128), PHYSICAL, 0.0, real=True)

    state = State(draw(), draw())
    total = y_norms(state, s).total
    if total == 0.0 or delta == 0.0:
        return State(zero_field(grid, PHYSICAL), zero_field(grid, PHYSICAL))
    scale = delta / total
    return State(
        state.u.with_values(scale * state.u.values),
        state.v.with_values(scale * state.v.values),
    )


def initial_state(cfg: RunConfig, table: SymbolTable) -> State:
    init = cfg.initial
    if init.profile == "gaussian":
        return gaussian_state(cfg.grid, init.delta, init.width, init.component)
    if init.profile == "plane-wave":
        return plane_wave_state(cfg.grid, table, init.delta, init.mode, init.component)
    return random_smooth_state(cfg.grid, init.delta, init.seed, cfg.solver.s)


def _pf(passed: bool) -> str:
    return "pass" if passed else "fail"


def hypothesis_report(cfg: RunConfig, table: SymbolTable) -> tuple[str, bool]:
    """Run the requested hypothesis checks; plain key: value lines."""
    lines = []
    all_passed = True
    for name in cfg.checks.run:
        if name == "kernel-decay":
            rep = check_kernel_decay(table, cfg.kernel_r, cfg.kernel_C_g)
            lines.append(f"kernel-decay: {_pf(rep.passed)}")
            lines.append(f"kernel-decay.max_ratio: {rep.max_ratio!r}")
            lines.append(f"kernel-decay.violations: {len(rep.violations)}")
        elif name == "derivative-bound":
            rep = check_symbol_derivative_bound(table, cfg.checks.M_bound)
            lines.append(f"derivative-bound: {_pf(rep.passed)}")
            lines.append(f"derivative-bound.max_ratio: {rep.max_ratio!r}")
            lines.append(f"derivative-bound.skipped: {len(rep.skipped)}")
        else:
            rep = global_existence_check(cfg.nonlinearity, cfg.checks.k, cfg.checks.sigma_max)
            lines.append(f"global-existence: {_pf(rep.passed)}")
            lines.append(f"global-existence.worst_margin: {rep.worst_margin!r}")
            lines.append(f"global-existence.worst_sigma: {rep.worst_sigma!r}")
        all_passed = all_passed and rep.passed
    lines.append(f"overall: {_pf(all_passed)}")
    return "\n".join(lines) + "\n", all_passed


def _csv_row(
    state: State, norms: YNorms, report: WindowReport | None, record: MonitorRecord
) -> str:
    bd = record.breakdown
    floats = (
        state.t,
        bd.uncorrected_total,
        record.corrected_total,
        bd.kinetic,
        bd.dispersive_a,
        bd.dispersive_A,
        bd.zero_mode,
        bd.potential,
        bd.correction,
        norms.sup_u,
        norms.hs_u,
        norms.sup_ut,
        norms.hs_ut,
    )
    iters = report.iters if report is not None else 0
    ratio = report.last_ratio if report is not None else 0.0
    window_T = report.T if report is not None else 0.0
    cells = [repr(float(x)) for x in floats]
    cells.append(str(iters))
    cells.append(repr(float(ratio)))
    cells.append(repr(float(window_T)))
    return ",".join(cells) + "\n"


@dataclass(frozen=True)
class RunArtifacts:
    """Where a scenario left its outputs, plus the solve outcome."""

    status: RunStatus
    csv_path: Path
    checks_path: Path
    snapshot_paths: tuple[Path, ...]
    checks_passed: bool
    monitor: ConservationMonitor


def run_scenario(cfg: RunConfig, out_dir=None, until: float | None = None) -> RunArtifacts:
    """Checks first, then the windowed solve with all outputs attached."""
    out = Path(out_dir if out_dir is not None else cfg.output.directory)
    out.mkdir(parents=True, exist_ok=True)

    table = build_symbol_table(cfg.grid, cfg.symbols)
    checks_text, checks_passed = hypothesis_report(cfg, table)
    checks_path = out / "checks.txt"
    checks_path.write_text(checks_text, encoding="utf-8")

    state0 = initial_state(cfg, table)
    t_final = until if until is not None else cfg.t_final
    monitor = ConservationMonitor(table, cfg.nonlinearity, cfg.solver.quad)
    csv_path = out / "series.csv"
    snapshot_paths: list[Path] = []
    last_seen = {"args": None, "row_w": -1, "snap_w": -1}

    def snap(state: State, w: int) -> None:
        path = out / f"state_{w:06d}.nlwv"
        write_snapshot(path, state)
        snapshot_paths.append(path)
        last_seen["snap_w"] = w

    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(",".join(CSV_COLUMNS) + "\n")

        def sink(state: State, norms: YNorms, report: WindowReport | None) -> None:
            monitor(state, norms, report)
            w = len(monitor.records) - 1
            last_seen["args"] = (state, norms, report)
            if w % cfg.output.csv_cadence == 0:
                fh.write(_csv_row(state, norms, report, monitor.records[-1]))
                fh.flush()
                last_seen["row_w"] = w
            if w % cfg.output.snapshot_cadence == 0:
                snap(state, w)

        status = solve_ivp(state0, t_final, cfg.nonlinearity, table, cfg.solver, sink=sink)

        # the cadence may have skipped the last window; emit it regardless
        w = len(monitor.records) - 1
        if last_seen["row_w"] < w:
            state, norms, report = last_seen["args"]
            fh.write(_csv_row(state, norms, report, monitor.records[-1]))
        if last_seen["snap_w"] < w:
            snap(last_seen["args"][0], w)

    return RunArtifacts(
        status=status,
        csv_path=csv_path,
        checks_path=checks_path,
        snapshot_paths=tuple(snapshot_paths),
        checks_passed=checks_passed,
        monitor=monitor,
    )
