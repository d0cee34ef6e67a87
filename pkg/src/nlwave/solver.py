"""Nonlinear solve by contraction mapping on short time windows.

The forced problem is recast as the fixed-point equation

    u(tau) = C(tau) phi + S(tau) psi + int_0^tau S(tau - sig) R(u(sig)) dsig

with R(u) = -|xi|^2 g_hat f_hat(u), solved per window by Picard iteration
on uniform quadrature nodes.  The window length comes from two explicit
contraction bounds driven by the data norm M and the derivative envelope
fbar of the nonlinearity; the continuation loop chains windows until the
requested final time, a blow-up threshold crossing, or a stall.

The working norm throughout is Y(w) = sup_norm(w) + sobolev_norm(w, s).
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .grid import Field, State, forward_transform, sobolev_norm, sup_norm, to_physical, to_spectral
from .propagator import QuadratureSpec, duhamel_node_integrals, quadrature_weights
from .symbols import SymbolTable

COMPLETED = "completed"
BLOWUP = "blowup_detected"
STALLED = "picard_stalled"


class SolverError(ValueError):
    """Invalid nonlinearity or solver configuration."""


@dataclass(frozen=True)
class NonlinearitySpec:
    """Pointwise fiber nonlinearity f with optional potential and envelope.

    f maps value arrays of shape (..., N) to the same shape.  potential_G
    is the scalar potential with gradient f (required for energy runs).
    fbar(sigma) bounds the derivative norms of f over |u| <= sigma; when
    omitted, fbar_eval falls back to a sampled lower-bound estimate.
    alpha is the leading-order exponent near zero (report-only).
    """

    N: int
    f: object
    potential_G: object = None
    fbar: object = None
    alpha: float = 1.0
    name: str = "custom"

    def __post_init__(self) -> None:
        zero = np.zeros((self.N,), dtype=np.complex128)
        f0 = np.abs(np.asarray(self.f(zero))).max()
        if f0 > 1e-14:
            raise SolverError(f"nonlinearity must vanish at 0, got |f(0)| = {f0:.3e}")
        if self.fbar is not None:
            sig = np.linspace(0.0, 5.0, 21)
            vals = [float(self.fbar(s)) for s in sig]
            if any(b < a - 1e-12 for a, b in zip(vals, vals[1:])):
                raise SolverError("fbar must be nondecreasing")

    @property
    def fbar_is_estimate(self) -> bool:
        return self.fbar is None


def zero_nonlinearity(N: int) -> NonlinearitySpec:
    return NonlinearitySpec(
        N=N,
        f=lambda v: np.zeros_like(v),
        potential_G=lambda v: np.zeros(np.shape(v)[:-1]),
        fbar=lambda sigma: 0.0,
        alpha=0.0,
        name="none",
    )


def power_nonlinearity(N: int, c: float = 1.0, m: int = 2) -> NonlinearitySpec:
    """Componentwise f_j(u) = c u_j^m with closed-form potential and envelope."""
    if m not in (2, 3):
        raise SolverError(f"power nonlinearity supports exponents 2 and 3, got {m}")

    def f(v):
        return c * v**m

    def potential_G(v):
        return c * np.sum(v ** (m + 1), axis=-1) / (m + 1)

    def fbar(sigma):
        # max over derivative orders k = 1..m of |c| m!/(m-k)! sigma^(m-k)
        fact = 1.0
        best = 0.0
        for k in range(1, m + 1):
            fact *= m - k + 1
            best = max(best, abs(c) * fact * sigma ** (m - k))
        return best

    return NonlinearitySpec(
        N=N, f=f, potential_G=potential_G, fbar=fbar, alpha=m - 1, name=f"power{m}"
    )


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the window solver; defaults follow the module contract."""

    s: float = 2.0
    picard_tol: float = 1e-10
    max_picard_iters: int = 50
    quad: QuadratureSpec = field(default_factory=lambda: QuadratureSpec("trapezoid", 9))
    C0: float = 1.0
    C1: float = 1.0
    blowup_threshold: float = 1e6
    window_override: float | None = None
    keep_node_values: bool = False

    def __post_init__(self) -> None:
        if self.picard_tol <= 0:
            raise SolverError(f"picard_tol must be positive, got {self.picard_tol}")
        if self.max_picard_iters < 1:
            raise SolverError("max_picard_iters must be >= 1")
        if self.quad.nodes < 3:
            raise SolverError(f"window solver needs >= 3 quadrature nodes, got {self.quad.nodes}")
        if self.blowup_threshold <= 0:
            raise SolverError(f"blowup_threshold must be positive, got {self.blowup_threshold}")
        if self.window_override is not None and self.window_override <= 0:
            raise SolverError("window_override must be positive when set")


@dataclass(frozen=True)
class YNorms:
    """sup + H^s norms of u and u_t; total drives windows and blow-up."""

    sup_u: float
    hs_u: float
    sup_ut: float
    hs_ut: float

    @property
    def total(self) -> float:
        return self.sup_u + self.hs_u + self.sup_ut + self.hs_ut


def y_norms(state: State, s: float) -> YNorms:
    return YNorms(
        sup_u=sup_norm(state.u),
        hs_u=sobolev_norm(state.u, s),
        sup_ut=sup_norm(state.v),
        hs_ut=sobolev_norm(state.v, s),
    )


@dataclass(frozen=True)
class WindowReport:
    """What happened inside one Picard window.

    f_zero_history and v_zero_history carry the fiber-space zero modes of
    f(u) and of u_t at the window nodes; the energy monitor integrates
    their pairing to account for the work the potential does on the mean
    field (whose own evolution is purely linear, the forcing multiplier
    vanishing at xi = 0).
    """

    t_start: float
    T: float
    iters: int
    ratios: tuple
    converged: bool
    stalled: bool
    residual_estimate: float
    node_times: np.ndarray | None = None
    f_zero_history: np.ndarray | None = None
    v_zero_history: np.ndarray | None = None
    node_values_u: np.ndarray | None = None

    @property
    def last_ratio(self) -> float:
        return self.ratios[-1] if self.ratios else 0.0


@dataclass(frozen=True)
class RunStatus:
    """Outcome of a continuation run."""

    outcome: str
    t_reached: float
    windows: tuple
    T_max: float | None = None
    final_norm: float | None = None


def nonlinear_rhs(u: Field, f_spec: NonlinearitySpec, table: SymbolTable) -> Field:
    """Spectral forcing -|xi|^2 g_hat(xi) f_hat(u)(xi); zero mode exactly 0."""
    grid = table.grid
    if not grid.compatible(u.grid):
        raise SolverError("field grid does not match symbol table grid")
    up = to_physical(u)
    fu = np.asarray(f_spec.f(up.values), dtype=np.complex128)
    if not np.all(np.isfinite(fu.view(np.float64))):
        raise SolverError(f"nonlinearity produced non-finite values at t = {u.t}")
    still_real = bool(up.real) and float(np.abs(fu.imag).max()) == 0.0
    fhat = forward_transform(Field(grid, fu, t=u.t, real=still_real))
    mult = -(grid.xi_sq * table.g)
    return fhat.with_values(fhat.values * mult[..., None])


def fbar_eval(f_spec: NonlinearitySpec, sigma: float) -> float:
    """Envelope of derivative norms of f over |u| <= sigma.

    Uses the spec's closed form when present; otherwise a deterministic
    sampled finite-difference estimate (a lower bound on the true envelope).
    """
    if sigma < 0:
        raise SolverError(f"fbar needs sigma >= 0, got {sigma}")
    if f_spec.fbar is not None:
        return float(f_spec.fbar(sigma))
    N = f_spec.N
    rng = np.random.default_rng(0)
    dirs = rng.standard_normal((16, N))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = np.linspace(0.0, sigma, 64)
    pts = (radii[:, None, None] * dirs[None, :, :]).reshape(-1, N)
    h = 1e-3 * max(sigma, 1.0)
    f = lambda x: np.asarray(f_spec.f(x.astype(np.complex128)))
    fp2, fp1 = f(pts + 2 * h * np.tile(dirs, (64, 1))), f(pts + h * np.tile(dirs, (64, 1)))
    fm1, fm2 = f(pts - h * np.tile(dirs, (64, 1))), f(pts - 2 * h * np.tile(dirs, (64, 1)))
    f0 = f(pts)
    d1 = np.abs((fp1 - fm1) / (2 * h)).max(axis=-1)
    d2 = np.abs((fp1 - 2 * f0 + fm1) / h**2).max(axis=-1)
    d3 = np.abs((fp2 - 2 * fp1 + 2 * fm1 - fm2) / (2 * h**3)).max(axis=-1)
    return float(np.max([d1.max(), d2.max(), d3.max()]))


def window_length(M_norm: float, f_spec: NonlinearitySpec, config: SolverConfig) -> float:
    """Contraction window from the two explicit bounds (or the override)."""
    if config.window_override is not None:
        return config.window_override
    if M_norm < 0:
        raise SolverError(f"window_length needs a nonnegative norm, got {M_norm}")
    Mp = M_norm + 1.0
    fb = fbar_eval(f_spec, Mp)
    bound_a = 1.0 / (Mp * (1.0 + 2.0 * config.C0 * Mp * fb))
    bound_b = 0.5 / (1.0 + config.C1 * Mp**2 * fb)
    return min(bound_a, bound_b)


def _node_field(grid, table, eigen_values, t, proto: Field) -> Field:
    return replace(proto, values=table.from_eigen(eigen_values), rep="spectral", t=t)


def _y_norm_values(grid, table, eigen_values, proto: Field, s: float) -> float:
    f = _node_field(grid, table, eigen_values, proto.t, proto)
    return sup_norm(f) + sobolev_norm(f, s)


def picard_window(
    state: State, T: float, f_spec: NonlinearitySpec, table: SymbolTable, config: SolverConfig
):
    """Fixed-point solve on [t, t+T]; returns (end State, WindowReport).

    Iterates from the homogeneous evolution, adding the Duhamel integral
    of the previous iterate's nonlinear forcing, until the max-over-nodes
    Y-norm increment drops below picard_tol relative.  Divergence (ratio
    >= 1 three times running) or iteration exhaustion marks the window
    stalled; the returned state is then the last iterate, unreliable.
    """
    if T <= 0:
        raise SolverError(f"window length must be positive, got {T}")
    grid = table.grid
    if not grid.compatible(state.grid):
        raise SolverError("state grid does not match symbol table grid")
    u0 = to_spectral(state.u)
    v0 = to_spectral(state.v)
    if not np.all(np.isfinite(u0.values.view(np.float64))) or not np.all(
        np.isfinite(v0.values.view(np.float64))
    ):
        raise SolverError(f"non-finite state at t = {state.t}")

    P = config.quad.nodes
    offsets = np.linspace(0.0, T, P)
    h = T / (P - 1)
    W = quadrature_weights(config.quad, h)
    shaped = offsets.reshape((P,) + (1,) * table.eta.ndim)
    arg = table.eta * shaped
    cos_tab = np.cos(arg)
    sinc_tab = shaped * np.sinc(arg / np.pi)

    wu0 = table.to_eigen(u0.values)
    wv0 = table.to_eigen(v0.values)
    hom_u = cos_tab * wu0 + sinc_tab * wv0

    u_nodes = hom_u.copy()
    ratios: list[float] = []
    prev_inc = None
    rel_inc = np.inf
    converged = False
    rising = 0
    iters = 0
    F = np.empty_like(u_nodes)
    dv = np.zeros_like(u_nodes[0])
    for iters in range(1, config.max_picard_iters + 1):
        for j in range(P):
            fj = nonlinear_rhs(
                _node_field(grid, table, u_nodes[j], state.t + offsets[j], u0), f_spec, table
            )
            F[j] = table.to_eigen(fj.values)
        du, dv_all = duhamel_node_integrals(F, W, cos_tab, sinc_tab)
        new_nodes = hom_u + du
        dv = dv_all[P - 1]
        inc = max(
            _y_norm_values(grid, table, new_nodes[j] - u_nodes[j], u0, config.s)
            for j in range(P)
        )
        ref = max(
            _y_norm_values(grid, table, new_nodes[j], u0, config.s) for j in range(P)
        )
        u_nodes = new_nodes
        if prev_inc is not None and prev_inc > 0:
            ratio = inc / prev_inc
            ratios.append(ratio)
            rising = rising + 1 if ratio >= 1.0 else 0
        prev_inc = inc
        rel_inc = inc / max(ref, 1e-300)
        if rel_inc < config.picard_tol:
            converged = True
            break
        if rising >= 3:
            break

    stalled = not converged
    t1 = state.t + T
    end_u = _node_field(grid, table, u_nodes[P - 1], t1, u0)
    wv_end = cos_tab[P - 1] * wv0 - table.lam * sinc_tab[P - 1] * wu0 + dv
    end_v = _node_field(grid, table, wv_end, t1, v0)

    # zero-mode histories for the energy monitor: u_t's zero mode evolves
    # homogeneously (the forcing vanishes there), f(u)'s zero mode is the
    # grid mean of f at the converged iterate
    zero = (0,) * grid.n
    Q0 = table.Q[zero]
    f_zero = np.empty((P, grid.N), dtype=np.complex128)
    v_zero = np.empty((P, grid.N), dtype=np.complex128)
    for j in range(P):
        uj = to_physical(_node_field(grid, table, u_nodes[j], state.t + offsets[j], u0))
        f_zero[j] = np.asarray(f_spec.f(uj.values)).reshape(-1, grid.N).mean(axis=0)
        v_zero[j] = Q0 @ (
            cos_tab[j][zero] * wv0[zero] - table.lam[zero] * sinc_tab[j][zero] * wu0[zero]
        )

    report = WindowReport(
        t_start=state.t,
        T=T,
        iters=iters,
        ratios=tuple(ratios),
        converged=converged,
        stalled=stalled,
        residual_estimate=rel_inc,
        node_times=state.t + offsets,
        f_zero_history=f_zero,
        v_zero_history=v_zero,
        node_values_u=(
            np.stack([table.from_eigen(u_nodes[j]) for j in range(P)])
            if config.keep_node_values
            else None
        ),
    )
    return State(end_u, end_v), report


def solve_ivp(
    state0: State,
    t_final: float,
    f_spec: NonlinearitySpec,
    table: SymbolTable,
    config: SolverConfig,
    sink=None,
) -> RunStatus:
    """Continuation of Picard windows from state0.t to t_final.

    sink, when given, is called as sink(state, norms, report) once with
    the initial state (report None) and once after every window.  Stops
    early with blowup_detected when the Y-norm total crosses the
    threshold (T_max = the crossing window's end time) or with
    picard_stalled when a window fails to contract.
    """
    state = state0
    norms = y_norms(state, config.s)
    if sink is not None:
        sink(state, norms, None)
    if norms.total > config.blowup_threshold:
        return RunStatus(BLOWUP, state.t, (), T_max=state.t, final_norm=norms.total)
    windows: list[WindowReport] = []
    eps = 1e-12 * max(1.0, abs(t_final))
    while t_final - state.t > eps:
        T = min(window_length(norms.total, f_spec, config), t_final - state.t)
        new_state, report = picard_window(state, T, f_spec, table, config)
        windows.append(report)
        if report.stalled:
            return RunStatus(
                STALLED, state.t, tuple(windows), final_norm=norms.total
            )
        state = new_state
        norms = y_norms(state, config.s)
        if sink is not None:
            sink(state, norms, report)
        if norms.total > config.blowup_threshold:
            return RunStatus(
                BLOWUP, state.t, tuple(windows), T_max=state.t, final_norm=norms.total
            )
    return RunStatus(COMPLETED, state.t, tuple(windows), final_norm=norms.total)
