"""Exact linear propagators and the Duhamel integral.

Per mode the homogeneous problem u_tt + eta^2 u = 0 is solved exactly by
the cosine/sine pair

    C(xi, t) = cos(eta t),    S(xi, t) = t sinc(eta t) = sin(eta t)/eta,

applied in the Hermitian eigenbasis of eta^2.  The two-row evolution

    u(t+dt) = C u + S v,    v(t+dt) = -eta^2 S u + C v

is exact (no time discretization error) and forms a group in dt.  Forced
problems add the variation-of-constants integral int S(dt - tau) F(tau)
dtau, approximated by composite trapezoid or Simpson quadrature on
uniform nodes within the step.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grid import Field, State, sobolev_norm, sup_norm, to_spectral
from .symbols import SymbolTable


class PropagatorError(ValueError):
    """Grid mismatch or invalid quadrature specification."""


@dataclass(frozen=True)
class QuadratureSpec:
    """Uniform-node quadrature rule for the Duhamel integral.

    rule is "trapezoid" (nodes >= 2, order 2) or "simpson" (odd nodes
    >= 3, order 4).
    """

    rule: str = "trapezoid"
    nodes: int = 9

    def __post_init__(self) -> None:
        if self.rule not in ("trapezoid", "simpson"):
            raise PropagatorError(f"unknown quadrature rule {self.rule!r}")
        if self.rule == "trapezoid" and self.nodes < 2:
            raise PropagatorError(f"trapezoid needs >= 2 nodes, got {self.nodes}")
        if self.rule == "simpson" and (self.nodes < 3 or self.nodes % 2 == 0):
            raise PropagatorError(f"simpson needs an odd node count >= 3, got {self.nodes}")

    @property
    def order(self) -> int:
        return 2 if self.rule == "trapezoid" else 4


def quadrature_weights(quad: QuadratureSpec, h: float) -> np.ndarray:
    """Per-node integration weights W with int_0^{ih} p = sum_j W[i,j] p(jh).

    Row i integrates from node 0 to node i.  Trapezoid rows are composite
    trapezoid.  Simpson rows use composite Simpson for even i; odd i >= 3
    closes with a 3/8 rule on the last three panels; i = 1 uses the
    quadratic three-point rule (h/12)(5, 8, -1), which reads one node past
    the target (handled downstream via the parity of C and S in t).
    """
    P = quad.nodes
    W = np.zeros((P, P))
    if quad.rule == "trapezoid":
        for i in range(1, P):
            W[i, : i + 1] = h
            W[i, 0] = W[i, i] = h / 2.0
        return W
    for i in range(1, P):
        if i == 1:
            W[1, :3] = np.array([5.0, 8.0, -1.0]) * (h / 12.0)
        elif i % 2 == 0:
            W[i, : i + 1] = _composite_simpson_row(i, h)
        else:
            W[i, : i - 2] += _composite_simpson_row(i - 3, h)[: i - 2]
            W[i, i - 3 : i + 1] += np.array([1.0, 3.0, 3.0, 1.0]) * (3.0 * h / 8.0)
    return W


def _composite_simpson_row(i: int, h: float) -> np.ndarray:
    # composite Simpson over i panels (i even, possibly 0)
    row = np.zeros(i + 1)
    if i == 0:
        return row
    row[0] = row[i] = 1.0
    row[1:i:2] = 4.0
    row[2:i:2] = 2.0
    return row * (h / 3.0)


@dataclass(frozen=True, eq=False)
class PropagatorCache:
    """cos(eta t) and t sinc(eta t) per mode and eigendirection at one t."""

    table: SymbolTable
    t: float
    cos_val: np.ndarray
    sinc_val: np.ndarray


def propagator_cache(table: SymbolTable, t: float) -> PropagatorCache:
    eta = table.eta
    cos_val = np.cos(eta * t)
    sinc_val = t * np.sinc(eta * t / np.pi)
    return PropagatorCache(table=table, t=t, cos_val=cos_val, sinc_val=sinc_val)


def _check_grid(table: SymbolTable, f: Field) -> None:
    if not table.grid.compatible(f.grid):
        raise PropagatorError("field grid does not match symbol table grid")


def _eigen_multiply(table: SymbolTable, f: Field, factor: np.ndarray) -> Field:
    sp = to_spectral(f)
    w = table.to_eigen(sp.values)
    return replace(sp, values=table.from_eigen(factor * w))


def cosine_apply(table: SymbolTable, t: float, f: Field) -> Field:
    """Multiply by cos(eta t) per mode in the eigenbasis."""
    _check_grid(table, f)
    return _eigen_multiply(table, f, np.cos(table.eta * t))


def sine_apply(table: SymbolTable, t: float, f: Field) -> Field:
    """Multiply by t sinc(eta t) = sin(eta t)/eta per mode; eta = 0 gives t."""
    _check_grid(table, f)
    return _eigen_multiply(table, f, t * np.sinc(table.eta * t / np.pi))


def linear_homogeneous_solve(state: State, dt: float, table: SymbolTable) -> State:
    """Advance (u, v) by dt under the homogeneous flow; exact per mode.

    dt may be negative; the evolution is a group.
    """
    _check_grid(table, state.u)
    u = to_spectral(state.u)
    v = to_spectral(state.v)
    wu = table.to_eigen(u.values)
    wv = table.to_eigen(v.values)
    c = np.cos(table.eta * dt)
    s = dt * np.sinc(table.eta * dt / np.pi)
    new_u = table.from_eigen(c * wu + s * wv)
    new_v = table.from_eigen(c * wv - table.lam * s * wu)
    t1 = state.t + dt
    return State(
        replace(u, values=new_u, t=t1),
        replace(v, values=new_v, t=t1),
    )


def _offset_tables(table: SymbolTable, h: float, P: int):
    # cos and t-sinc factors at offsets m*h, m = 0..P-1; S is odd and C
    # even in t, so negative offsets need only a sign flip on S
    eta = table.eta
    m = np.arange(P).reshape((P,) + (1,) * eta.ndim)
    arg = eta * (m * h)
    return np.cos(arg), (m * h) * np.sinc(arg / np.pi)


def duhamel_node_integrals(
    F: np.ndarray, W: np.ndarray, cos_tab: np.ndarray, sinc_tab: np.ndarray
):
    """Quadrature of the Duhamel integrals at every node of a window.

    F holds eigenbasis forcing samples, shape (P,) + modes + (N,).  Returns
    (du, dv) of the same shape with

        du[i] = sum_j W[i, j] S((i-j) h) F[j]
        dv[i] = sum_j W[i, j] C((i-j) h) F[j].
    """
    P = W.shape[0]
    du = np.zeros_like(F)
    dv = np.zeros_like(F)
    for i in range(P):
        for j in range(P):
            w = W[i, j]
            if w == 0.0:
                continue
            m = i - j
            sgn = 1.0 if m >= 0 else -1.0
            du[i] += (w * sgn) * sinc_tab[abs(m)] * F[j]
            dv[i] += w * cos_tab[abs(m)] * F[j]
    return du, dv


def duhamel_forced_solve(
    state: State, forcing, dt: float, table: SymbolTable, quad: QuadratureSpec
) -> State:
    """Advance by dt under the flow with a known forcing history.

    forcing(tau) must return a spectral Field for any tau in [t, t+dt];
    it enters through int S(t+dt-tau) forcing(tau) dtau on the u row and
    the matching C integral on the v row.
    """
    _check_grid(table, state.u)
    if dt == 0.0:
        return state.copy()
    hom = linear_homogeneous_solve(state, dt, table)
    P = quad.nodes
    h = dt / (P - 1)
    W = quadrature_weights(quad, h)
    F = np.empty((P,) + table.grid.shape, dtype=np.complex128)
    for j in range(P):
        fj = forcing(state.t + j * h)
        _check_grid(table, fj)
        F[j] = table.to_eigen(to_spectral(fj).values)
    cos_tab, sinc_tab = _offset_tables(table, h, P)
    du, dv = duhamel_node_integrals(F, W, cos_tab, sinc_tab)
    new_u = hom.u.values + table.from_eigen(du[P - 1])
    new_v = hom.v.values + table.from_eigen(dv[P - 1])
    return State(hom.u.with_values(new_u), hom.v.with_values(new_v))


@dataclass(frozen=True)
class EstimateReport:
    """Realized size of the linear evolution against its data.

    lhs collects sup and H^s norms of the eta-weighted solution and of
    its time derivative at the final time; rhs collects the same norms
    of the initial data plus the time integral of the forcing norms.
    The ratio has no pass/fail threshold (the underlying constants are
    not constructive); it is recorded for cross-resolution comparison.
    """

    lhs: float
    rhs: float
    ratio: float
    components: dict


def _eta_weighted(table: SymbolTable, f: Field) -> Field:
    return _eigen_multiply(table, f, table.eta.astype(np.complex128))


def _y_norm(f: Field, s: float) -> float:
    return sup_norm(f) + sobolev_norm(f, s)


def linear_estimate_diagnostic(
    state0: State,
    forcing,
    t: float,
    table: SymbolTable,
    s: float = 2.0,
    quad: QuadratureSpec | None = None,
) -> EstimateReport:
    """Measure solution norms against data norms for a linear run.

    forcing may be None (homogeneous run) or a spectral sampler as in
    duhamel_forced_solve; the run covers [state0.t, state0.t + t] in one
    quadrature window.
    """
    quad = quad or QuadratureSpec("simpson", 65)
    if forcing is None:
        final = linear_homogeneous_solve(state0, t, table)
        forcing_integral = 0.0
    else:
        final = duhamel_forced_solve(state0, forcing, t, table, quad)
        taus = state0.t + np.linspace(0.0, t, quad.nodes)
        norms = np.array([_y_norm(forcing(tau), s) for tau in taus])
        forcing_integral = float(np.trapezoid(norms, taus))
    lhs_u = _y_norm(_eta_weighted(table, final.u), s)
    lhs_v = _y_norm(final.v, s)
    rhs_u = _y_norm(_eta_weighted(table, state0.u), s)
    rhs_v = _y_norm(state0.v, s)
    lhs = lhs_u + lhs_v
    rhs = rhs_u + rhs_v + forcing_integral
    ratio = lhs / rhs if rhs > 0 else 0.0
    return EstimateReport(
        lhs=lhs,
        rhs=rhs,
        ratio=ratio,
        components={
            "solution_u_weighted": lhs_u,
            "solution_v": lhs_v,
            "data_u_weighted": rhs_u,
            "data_v": rhs_v,
            "forcing_integral": forcing_integral,
        },
    )
