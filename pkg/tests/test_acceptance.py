"""End-to-end property suite: one test per shipped guarantee.

Each test states its tolerance inline.  Everything runs at desk scale
(n in {1, 2}, M <= 256, N <= 8) in seconds.
"""

import json
import warnings

import numpy as np
import pytest

from nlwave.config import parse_config
from nlwave.energy import ConservationMonitor, global_existence_check
from nlwave.grid import (
    PHYSICAL,
    SPECTRAL,
    Field,
    Grid,
    State,
    l2_norm,
    to_physical,
    to_spectral,
    zero_field,
)
from nlwave.propagator import (
    QuadratureSpec,
    duhamel_forced_solve,
    linear_estimate_diagnostic,
    linear_homogeneous_solve,
    propagator_cache,
    quadrature_weights,
)
from nlwave.runner import plane_wave_state, random_smooth_state, run_scenario
from nlwave.solver import (
    NonlinearitySpec,
    SolverConfig,
    nonlinear_rhs,
    picard_window,
    power_nonlinearity,
    solve_ivp,
    window_length,
    y_norms,
    zero_nonlinearity,
)
from nlwave.symbols import (
    EtaZeroWarning,
    build_symbol_table,
    check_kernel_decay,
    check_symbol_derivative_bound,
    expression_symbols,
    preset_symbols,
)


def random_field(grid, seed, real=False):
    rng = np.random.default_rng(seed)
    vals = rng.standard_normal(grid.shape) + 1j * rng.standard_normal(grid.shape)
    if real:
        vals = vals.real.astype(np.complex128)
    return Field(grid, vals, PHYSICAL, 0.0, real=real)


def classical_table(M=32, N=1, m=1.0, r=2.0, L=np.pi, n=1):
    grid = Grid(n=n, L=L, M=M, N=N)
    return grid, build_symbol_table(grid, preset_symbols("classical", N=N, m=m, r=r))


def test_transform_contract():
    """Roundtrip and Parseval agree to 1e-12 relative on randomized grids."""
    cases = [(1, 256, 1), (1, 64, 8), (1, 128, 3), (2, 16, 2), (2, 64, 1), (2, 32, 5)]
    for seed, (n, M, N) in enumerate(cases):
        grid = Grid(n=n, L=1.0 + 0.5 * seed, M=M, N=N)
        f = random_field(grid, seed)
        spec = to_spectral(f)
        back = to_physical(spec)
        scale = np.max(np.abs(f.values))
        assert np.max(np.abs(back.values - f.values)) <= 1e-12 * scale
        assert abs(l2_norm(f) - l2_norm(spec)) <= 1e-12 * l2_norm(f)


def test_propagator_identities():
    """cos^2 + eta^2 S^2 = 1, group property, and reversibility to 1e-12."""
    grid, table = classical_table(M=64, N=3, m=1.3)
    for t in (0.4, 2.7):
        cache = propagator_cache(table, t)
        ident = cache.cos_val**2 + table.eta**2 * cache.sinc_val**2
        assert np.max(np.abs(ident - 1.0)) <= 1e-12

    state = State(random_field(grid, 1), random_field(grid, 2))
    one_hop = linear_homogeneous_solve(linear_homogeneous_solve(state, 0.7, table), 0.5, table)
    direct = linear_homogeneous_solve(state, 1.2, table)
    scale = max(np.max(np.abs(direct.u.values)), np.max(np.abs(direct.v.values)))
    assert np.max(np.abs(one_hop.u.values - direct.u.values)) <= 1e-12 * scale
    assert np.max(np.abs(one_hop.v.values - direct.v.values)) <= 1e-12 * scale

    there = linear_homogeneous_solve(state, 0.9, table)
    back = linear_homogeneous_solve(there, -0.9, table)
    u0, v0 = to_spectral(state.u), to_spectral(state.v)
    scale = np.max(np.abs(u0.values))
    assert np.max(np.abs(back.u.values - u0.values)) <= 1e-12 * scale
    assert np.max(np.abs(back.v.values - v0.values)) <= 1e-12 * scale


def _constant_forcing_errors(table, grid, dt, rule, node_counts, h_amp):
    """Max of u/v-row relative errors against the unit-eta closed forms."""
    idx = (1,)
    target_u = (1.0 - np.cos(dt)) * h_amp
    target_v = np.sin(dt) * h_amp

    def forcing(tau):
        vals = grid.zero_values()
        vals[idx + (0,)] = h_amp
        return Field(grid, vals, SPECTRAL, tau)

    state0 = State(zero_field(grid, SPECTRAL), zero_field(grid, SPECTRAL))
    errs = []
    for P in node_counts:
        got = duhamel_forced_solve(state0, forcing, dt, table, QuadratureSpec(rule, P))
        eu = abs(got.u.values[idx + (0,)] - target_u) / abs(target_u)
        ev = abs(got.v.values[idx + (0,)] - target_v) / abs(target_v)
        errs.append(max(eu, ev))
    return errs


def test_duhamel_oracle():
    """Constant forcing hits the closed forms; quadrature order within 0.3."""
    grid = Grid(n=1, L=np.pi, M=8, N=1)
    unit = build_symbol_table(grid, expression_symbols(1, 1, "0.0", "1.0", A_diag=["1.0"]))
    plans = {"trapezoid": (2.0, (5, 9, 17)), "simpson": (4.0, (3, 5, 9))}
    for rule, (nominal, counts) in plans.items():
        for dt in (0.1, 0.05, 0.025):
            errs = _constant_forcing_errors(unit, grid, dt, rule, counts, h_amp=0.8)
            hs = [dt / (P - 1) for P in counts]
            slope = np.polyfit(np.log(hs), np.log(errs), 1)[0]
            assert abs(slope - nominal) <= 0.3, (rule, dt, slope)
            assert errs[-1] <= 1e-4

    # degenerate mode: the quadratures integrate the linear-in-time
    # integrand exactly, so h dt^2/2 and h dt come out to roundoff
    with pytest.warns(EtaZeroWarning):
        flat = build_symbol_table(grid, expression_symbols(1, 1, "0.0", "1.0", A_diag=["0.0"]))

    def zero_mode_forcing(tau):
        vals = grid.zero_values()
        vals[0, 0] = 0.8
        return Field(grid, vals, SPECTRAL, tau)

    state0 = State(zero_field(grid, SPECTRAL), zero_field(grid, SPECTRAL))
    for rule in ("trapezoid", "simpson"):
        got = duhamel_forced_solve(state0, zero_mode_forcing, 0.1, flat, QuadratureSpec(rule, 9))
        assert abs(got.u.values[0, 0] - 0.8 * 0.1**2 / 2) <= 1e-12 * abs(0.8 * 0.1**2 / 2)
        assert abs(got.v.values[0, 0] - 0.8 * 0.1) <= 1e-12 * abs(0.8 * 0.1)


def _linear_drift(table, grid, seed):
    quad = QuadratureSpec("trapezoid", 9)
    cfg = SolverConfig(quad=quad, window_override=0.25)
    f_spec = zero_nonlinearity(grid.N)
    monitor = ConservationMonitor(table, f_spec, quad)
    state0 = random_smooth_state(grid, 0.5, seed, 2.0)
    status = solve_ivp(state0, 10.0, f_spec, table, cfg, sink=monitor)
    assert status.outcome == "completed"
    return monitor.max_relative_drift


def test_linear_energy_conservation():
    """Total-energy drift <= 1e-10 over t in [0, 10] with no nonlinearity."""
    grid, table = classical_table(M=32)
    assert _linear_drift(table, grid, seed=5) <= 1e-10

    grid4 = Grid(n=1, L=np.pi, M=32, N=4)
    table4 = build_symbol_table(grid4, preset_symbols("thm51-diagonal", N=4, sigma=1.0))
    assert _linear_drift(table4, grid4, seed=6) <= 1e-10


def test_nonlinear_corrected_energy():
    """Corrected drift falls at order 2 +- 0.5 per window halving and is
    <= 1e-6 relative at window 1e-3 with simpson."""
    grid = Grid(n=1, L=np.pi, M=32, N=1)
    table = build_symbol_table(grid, preset_symbols("bessel-a", N=1, m=1.0, r=2.0))
    f_spec = power_nonlinearity(1, c=1.0, m=2)
    vals = (0.05 * (1.0 + np.cos(grid.x)))[:, None].astype(np.complex128)
    state0 = State(Field(grid, vals, PHYSICAL, 0.0, real=True), zero_field(grid, PHYSICAL))

    def drift(rule, nodes, W):
        quad = QuadratureSpec(rule, nodes)
        monitor = ConservationMonitor(table, f_spec, quad)
        status = solve_ivp(
            state0, 1.0, f_spec, table, SolverConfig(quad=quad, window_override=W), sink=monitor
        )
        assert status.outcome == "completed"
        return monitor.max_relative_drift

    drifts = [drift("trapezoid", 9, W) for W in (0.1, 0.05, 0.025)]
    for coarse, fine in zip(drifts, drifts[1:]):
        order = np.log2(coarse / fine)
        assert abs(order - 2.0) <= 0.5, drifts
    assert drift("simpson", 9, 1e-3) <= 1e-6


def test_picard_contraction():
    """Window ratios <= 1/2 and fixed-point residual <= 10 picard_tol."""
    grid, table = classical_table(M=32)
    f_spec = power_nonlinearity(1, c=1.0, m=2)
    config = SolverConfig(keep_node_values=True)
    state = random_smooth_state(grid, 1e-3, 12, config.s)

    for _ in range(3):
        T = window_length(y_norms(state, config.s).total, f_spec, config)
        new_state, report = picard_window(state, T, f_spec, table, config)
        assert report.converged
        assert all(r <= 0.5 for r in report.ratios), report.ratios

        # residual of the converged iterate against one more application
        # of the integral map, measured in the working norm per node
        P = config.quad.nodes
        h = T / (P - 1)
        W = quadrature_weights(config.quad, h)
        offsets = np.linspace(0.0, T, P)
        shaped = offsets.reshape((P,) + (1,) * table.eta.ndim)
        arg = table.eta * shaped
        cos_tab = np.cos(arg)
        sinc_tab = shaped * np.sinc(arg / np.pi)
        wu0 = table.to_eigen(to_spectral(state.u).values)
        wv0 = table.to_eigen(to_spectral(state.v).values)
        F = [
            table.to_eigen(
                nonlinear_rhs(
                    Field(grid, report.node_values_u[j], SPECTRAL, report.node_times[j]),
                    f_spec,
                    table,
                ).values
            )
            for j in range(P)
        ]
        data_scale = y_norms(state, config.s).total
        for i in range(P):
            expect = cos_tab[i] * wu0 + sinc_tab[i] * wv0
            for j in range(P):
                sgn = 1.0 if i >= j else -1.0
                expect = expect + W[i, j] * sgn * sinc_tab[abs(i - j)] * F[j]
            defect = Field(
                grid, table.from_eigen(report.node_values_u[i] - expect), SPECTRAL, 0.0
            )
            residual = y_norms(State(defect, defect.copy()), config.s).total / 2.0
            assert residual <= 10.0 * config.picard_tol * data_scale
        state = new_state


def test_zero_nonlinearity_reduction():
    """solve_ivp with f = 0 matches the linear solver to 1e-10."""
    grid, table = classical_table(M=32, N=2, m=1.4)
    state0 = random_smooth_state(grid, 0.5, 3, 2.0)
    observed = []
    status = solve_ivp(
        state0,
        2.0,
        zero_nonlinearity(2),
        table,
        SolverConfig(window_override=0.125),
        sink=lambda st, n, r: observed.append(st),
    )
    assert status.outcome == "completed"
    assert len(observed) == 17
    for st in observed:
        ref = linear_homogeneous_solve(state0, st.t, table)
        ru, rv = to_physical(ref.u).values, to_physical(ref.v).values
        scale = max(np.max(np.abs(ru)), np.max(np.abs(rv)), 1e-300)
        assert np.max(np.abs(to_physical(st.u).values - ru)) <= 1e-10 * scale
        assert np.max(np.abs(to_physical(st.v).values - rv)) <= 1e-10 * scale


def test_small_data_boundedness():
    """delta = 1e-3 to t = 50 completes with norms <= 3x initial."""
    grid, table = classical_table(M=32)
    f_spec = power_nonlinearity(1, c=1.0, m=2)
    state0 = plane_wave_state(grid, table, 1e-3, (1,), 0)
    initial = y_norms(state0, 2.0).total
    peak = [initial]

    def sink(state, norms, report):
        peak[0] = max(peak[0], norms.total)

    status = solve_ivp(state0, 50.0, f_spec, table, SolverConfig(), sink=sink)
    assert status.outcome == "completed"
    assert status.t_reached == pytest.approx(50.0, abs=1e-9)
    assert peak[0] <= 3.0 * initial


def test_blowup_detector():
    """T_max lands within one window of the first recorded crossing."""
    grid, table = classical_table(M=32)
    f_spec = power_nonlinearity(1, c=1.0, m=2)
    vals = grid.zero_values()
    vals[..., 0] = 0.4 * np.exp(-((grid.x - grid.L) ** 2) / (2 * (grid.L / 4) ** 2))
    state0 = State(Field(grid, vals, PHYSICAL, 0.0, real=True), zero_field(grid, PHYSICAL))

    series = []
    reference = solve_ivp(
        state0,
        3.0,
        f_spec,
        table,
        SolverConfig(blowup_threshold=1e9),
        sink=lambda st, n, r: series.append((st.t, n.total, r.T if r else 0.0)),
    )
    assert reference.outcome == "completed"
    totals = np.array([x[1] for x in series])
    assert totals.max() > 1.2 * totals[0]

    B_max = 0.5 * (totals[0] + totals.max())
    crossing = next(i for i in range(len(series)) if series[i][1] > B_max)
    t_cross, _, window_T = series[crossing]

    detected = solve_ivp(state0, 3.0, f_spec, table, SolverConfig(blowup_threshold=B_max))
    assert detected.outcome == "blowup_detected"
    assert detected.T_max is not None
    assert abs(detected.T_max - t_cross) <= window_T


def test_hypothesis_checks():
    """Kernel decay, derivative bound, and potential coercivity verdicts."""
    grid = Grid(n=1, L=np.pi, M=16, N=1)

    def table_with_g(expr):
        return build_symbol_table(grid, expression_symbols(1, 1, "1.0", expr, A_diag=["1.0"]))

    equality = check_kernel_decay(table_with_g("(1.0 + xi_sq) ** -1.0"), r=2.0, C_g=1.0)
    assert equality.passed
    assert equality.max_ratio == pytest.approx(1.0, abs=1e-12)

    flat = check_kernel_decay(table_with_g("1.0"), r=2.0, C_g=1.0)
    assert not flat.passed
    assert len(flat.violations) == grid.M - 1

    # steeper kernel: ratio is 1 at the zero mode, strictly below 1 elsewhere
    steep = table_with_g("(1.0 + xi_sq) ** -2.0")
    strong = check_kernel_decay(steep, r=2.0, C_g=1.0)
    assert strong.passed
    assert not strong.violations
    off_zero = grid.xi_sq > 0
    ratios = steep.g[off_zero] * (1.0 + grid.xi_sq[off_zero])
    assert np.max(ratios) < 1.0

    # closed form |2 xi| / sqrt(1 + xi^2), maximized at the edge mode
    quad_table = build_symbol_table(
        grid, expression_symbols(1, 1, "0.0", "1.0", A_diag=["1.0 + xi_sq"])
    )
    rep = check_symbol_derivative_bound(quad_table, M_bound=2.1)
    assert rep.passed
    xi_edge = np.max(np.abs(grid.xi_axes[0]))
    closed = 2.0 * xi_edge / np.sqrt(1.0 + xi_edge**2)
    assert rep.max_ratio == pytest.approx(closed, rel=0.05)

    defocusing = power_nonlinearity(1, c=1.0, m=3)
    assert global_existence_check(defocusing, k=0.1, sigma_max=5.0).passed

    restoring = NonlinearitySpec(
        N=1,
        f=lambda v: -v,
        potential_G=lambda v: -np.sum(v**2, axis=-1) / 2.0,
        fbar=lambda s: 1.0,
        name="restoring",
    )
    assert global_existence_check(restoring, k=0.5, sigma_max=4.0).passed
    assert not global_existence_check(restoring, k=0.49, sigma_max=4.0).passed

    focusing = power_nonlinearity(1, c=-1.0, m=3)
    assert not global_existence_check(focusing, k=1.0, sigma_max=10.0).passed


def _band_limited_on(M, seed, kmax=16, s=2.0):
    """The same band-limited function sampled on an M-point grid."""
    grid = Grid(n=1, L=np.pi, M=M, N=1)
    base = Grid(n=1, L=np.pi, M=64, N=1)
    rng = np.random.default_rng(seed)
    fields = []
    for _ in range(2):
        z = rng.standard_normal(64) + 1j * rng.standard_normal(64)
        z = np.where(np.abs(base.k_axis) <= kmax, z * (1 + base.xi_sq) ** (-(s + 1) / 2), 0)
        vals = np.zeros((M, 1), np.complex128)
        for i, k in enumerate(base.k_axis):
            if z[i] != 0.0:
                vals[int(k) % M, 0] = z[i]
        phys = to_physical(Field(grid, vals, SPECTRAL, 0.0))
        fields.append(Field(grid, phys.values.real.astype(np.complex128), PHYSICAL, 0.0, real=True))
    return grid, State(fields[0], fields[1])


def test_estimate_diagnostic_stability():
    """The realized estimate ratio moves < 10% when M doubles 64 -> 128."""
    ratios = {}
    for M in (64, 128):
        grid, state = _band_limited_on(M, seed=21)
        table = build_symbol_table(grid, preset_symbols("classical", N=1))
        ratios[M] = linear_estimate_diagnostic(state, None, 1.0, table).ratio
    assert abs(ratios[128] - ratios[64]) < 0.10 * ratios[64]


def test_determinism():
    """Identical config + seed produce byte-identical CSV output."""
    cfg = parse_config(
        json.dumps(
            {
                "grid": {"M": 32},
                "symbols": {"preset": "classical"},
                "nonlinearity": {"preset": "power", "exponent": 2},
                "initial_data": {"profile": "random-smooth", "delta": 0.05, "seed": 99},
                "solver": {"t_final": 0.3, "window_override": 0.05},
            }
        )
    )
    import tempfile
    from pathlib import Path

    with tempfile.TemporaryDirectory() as tmp:
        a = run_scenario(cfg, out_dir=Path(tmp) / "a")
        b = run_scenario(cfg, out_dir=Path(tmp) / "b")
        assert a.status.outcome == "completed"
        assert a.csv_path.read_bytes() == b.csv_path.read_bytes()
