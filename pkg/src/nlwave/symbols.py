"""Operator symbols and the dispersion generator eta.

The equation's three convolution kernels enter only through their Fourier
symbols: a scalar a_hat(xi) >= 0, a scalar g_hat(xi) > 0, and an N x N
Hermitian positive-semidefinite matrix A_hat(xi).  Per mode we form the
Hermitian matrix

    H(xi) = a_hat(xi) |xi|^2 I + A_hat(xi)

and take its eigendecomposition H = Q diag(lambda) Q*; the generator is
eta(xi) = H^{1/2} with eigenvalues sqrt(lambda).  Zero eigenvalues are
allowed (the propagator treats them by the sinc limit) but recorded.

Symbols come from named presets or from restricted arithmetic expressions
in xi_sq = |xi|^2 and the components xi1, xi2.
"""

from __future__ import annotations

import ast
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .grid import Grid

HERMITIAN_RTOL = 1e-10
EIG_CLAMP_RTOL = 1e-12


class SymbolError(ValueError):
    """Symbol samples violate the required structure."""


class EtaZeroWarning(UserWarning):
    """The generator has zero eigenvalues at some modes (handled, but noted)."""


@dataclass(frozen=True)
class SymbolSpec:
    """Closed-form symbols, vectorized over a lattice of xi samples.

    a_fn and g_fn map (xi_sq, xi_axes) to a real array of the lattice
    shape; A_fn maps to lattice shape + (N, N).  xi_axes is a tuple of
    per-axis component arrays broadcastable to the lattice shape.
    """

    N: int
    a_fn: object
    g_fn: object
    A_fn: object
    name: str = "custom"
    params: dict = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class SymbolTable:
    """Per-mode symbol samples and the eigendecomposition of eta^2.

    Arrays are indexed by FFT-ordered mode lattice: a, g of shape (M,)*n;
    A, Q of shape (M,)*n + (N, N); lam, eta of shape (M,)*n + (N,).
    """

    grid: Grid
    spec: SymbolSpec
    a: np.ndarray
    g: np.ndarray
    A: np.ndarray
    Q: np.ndarray
    lam: np.ndarray
    eta: np.ndarray
    zero_eta_count: int

    @property
    def eta_max(self) -> float:
        return float(self.eta.max())

    def to_eigen(self, values: np.ndarray) -> np.ndarray:
        """Rotate fiber vectors into the per-mode eigenbasis: Q* v."""
        return np.einsum("...ji,...j->...i", self.Q.conj(), values)

    def from_eigen(self, values: np.ndarray) -> np.ndarray:
        """Rotate eigenbasis coordinates back: Q w."""
        return np.einsum("...ij,...j->...i", self.Q, values)

    def quadratic_form(self, values: np.ndarray) -> np.ndarray:
        """<H(xi) v, v> per mode, H = a|xi|^2 I + A (real, >= 0)."""
        w = self.to_eigen(values)
        return np.sum(self.lam * np.abs(w) ** 2, axis=-1)


def _mode_label(grid: Grid, k) -> str:
    idx = (k,) if isinstance(k, (int, np.integer)) else tuple(k)
    kvec = tuple(int(grid.k_axis[i]) for i in idx)
    return f"mode {kvec} (storage index {idx})"


def build_symbol_table(grid: Grid, spec: SymbolSpec) -> SymbolTable:
    """Sample the symbols on the grid's mode lattice and factor eta^2.

    Raises SymbolError for N mismatch, nonpositive g_hat, negative a_hat,
    non-Hermitian A_hat samples, or eigenvalues below the clamp tolerance.
    Zero eta eigenvalues produce an EtaZeroWarning, not an error.
    """
    if spec.N != grid.N:
        raise SymbolError(f"symbol fiber dimension {spec.N} does not match grid N={grid.N}")
    xi_axes = grid.xi_axes
    xi_sq = grid.xi_sq
    a, g, A = _sample(spec, xi_sq, xi_axes, grid)
    if np.any(a < 0):
        k = np.unravel_index(int(np.argmin(a)), a.shape)
        raise SymbolError(f"a_hat sample {a[k]:.3e} < 0 at {_mode_label(grid, k)}")
    if np.any(g <= 0):
        k = np.unravel_index(int(np.argmin(g)), g.shape)
        raise SymbolError(f"g_hat sample {g[k]:.3e} <= 0 at {_mode_label(grid, k)}")

    asym = np.abs(A - np.conj(np.swapaxes(A, -1, -2))).max(axis=(-2, -1))
    scale = np.abs(A).max(axis=(-2, -1))
    bad = asym > HERMITIAN_RTOL * np.maximum(scale, 1e-300)
    if np.any(bad):
        k = np.unravel_index(int(np.argmax(asym / np.maximum(scale, 1e-300))), asym.shape)
        raise SymbolError(f"A_hat sample is not Hermitian at {_mode_label(grid, k)}")
    A = 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))

    H = A + (a * xi_sq)[..., None, None] * np.eye(grid.N)
    lam, Q = np.linalg.eigh(H)
    rad = np.abs(lam).max(axis=-1, keepdims=True)
    floor = -EIG_CLAMP_RTOL * rad
    if np.any(lam < floor):
        flat = np.argmin(lam - floor)
        k = np.unravel_index(int(flat) // grid.N, a.shape)
        raise SymbolError(
            f"eta^2 eigenvalue {lam.min():.3e} below clamp tolerance at {_mode_label(grid, k)}"
        )
    lam = np.where(lam < 0, 0.0, lam)
    eta = np.sqrt(lam)
    zero_count = int(np.count_nonzero(eta == 0.0))
    if zero_count:
        warnings.warn(
            f"eta has zero eigenvalues at {zero_count} mode entries; "
            "propagators use the sinc limit there",
            EtaZeroWarning,
            stacklevel=2,
        )
    return SymbolTable(
        grid=grid, spec=spec, a=a, g=g, A=A, Q=Q, lam=lam, eta=eta, zero_eta_count=zero_count
    )


def _sample(spec: SymbolSpec, xi_sq, xi_axes, grid: Grid):
    a = np.broadcast_to(np.asarray(spec.a_fn(xi_sq, xi_axes), dtype=np.float64), xi_sq.shape)
    g = np.broadcast_to(np.asarray(spec.g_fn(xi_sq, xi_axes), dtype=np.float64), xi_sq.shape)
    A = np.asarray(spec.A_fn(xi_sq, xi_axes), dtype=np.complex128)
    A = np.broadcast_to(A, xi_sq.shape + (grid.N, grid.N))
    return np.array(a), np.array(g), np.array(A)


def eta_apply(table: SymbolTable, k, w: np.ndarray, p: float) -> np.ndarray:
    """Apply eta(xi_k)^p to one fiber vector: Q diag(eta^p) Q* w.

    k is the storage index into the FFT-ordered lattice (int in 1D, pair
    in 2D).  Negative powers require a strictly positive spectrum at k.
    """
    idx = (k,) if isinstance(k, (int, np.integer)) else tuple(k)
    eta_k = table.eta[idx]
    if p < 0 and np.any(eta_k == 0.0):
        raise SymbolError(f"eta^{p} is singular at {_mode_label(table.grid, idx)}")
    with np.errstate(divide="ignore", invalid="ignore"):
        powers = np.where(eta_k == 0.0, 0.0 if p > 0 else 1.0, eta_k**p)
    Q = table.Q[idx]
    w = np.asarray(w, dtype=np.complex128)
    return Q @ (powers * (Q.conj().T @ w))


@dataclass(frozen=True)
class CheckReport:
    """Outcome of a sampled hypothesis check."""

    name: str
    passed: bool
    max_ratio: float
    violations: tuple = ()
    skipped: tuple = ()
    detail: str = ""


def check_kernel_decay(table: SymbolTable, r: float, C_g: float) -> CheckReport:
    """Check g_hat(xi) <= C_g (1+|xi|^2)^{-r/2} at every sampled mode."""
    if r < 0 or C_g <= 0:
        raise SymbolError(f"decay check needs r >= 0 and C_g > 0, got r={r}, C_g={C_g}")
    grid = table.grid
    bound = C_g * (1.0 + grid.xi_sq) ** (-r / 2.0)
    ratio = table.g / bound
    # equality must pass; allow roundoff headroom on the comparison
    bad = ratio > 1.0 + 1e-12
    violations = tuple(
        (tuple(int(grid.k_axis[i]) for i in idx), float(ratio[idx]))
        for idx in zip(*np.nonzero(bad))
    )
    return CheckReport(
        name="kernel-decay",
        passed=not violations,
        max_ratio=float(ratio.max()),
        violations=violations[:64],
        detail=f"r={r}, C_g={C_g}, {len(violations)} violating modes",
    )


def check_symbol_derivative_bound(table: SymbolTable, M_bound: float) -> CheckReport:
    """Check ||[D A_hat](xi) eta^{-1}(xi)|| <= M_bound over sampled modes.

    First derivatives per axis are approximated by centered differences
    of the closed-form symbol, with step equal to one mode spacing.
    Modes where eta has a zero eigenvalue are skipped and listed.
    """
    grid = table.grid
    spec = table.spec
    h = np.pi / grid.L
    xi_axes = grid.xi_axes

    singular = np.any(table.eta == 0.0, axis=-1)
    with np.errstate(divide="ignore"):
        inv_eta = np.where(table.eta == 0.0, 0.0, 1.0 / table.eta)
    # eta^{-1} = Q diag(1/eta) Q* at the regular modes
    eta_inv = np.einsum("...ij,...j,...kj->...ik", table.Q, inv_eta, table.Q.conj())

    max_ratio = 0.0
    for ax in range(grid.n):
        plus = [np.array(x, dtype=np.float64) for x in xi_axes]
        minus = [np.array(x, dtype=np.float64) for x in xi_axes]
        plus[ax] = plus[ax] + h
        minus[ax] = minus[ax] - h
        sq_plus = sum(np.broadcast_to(x, grid.xi_sq.shape) ** 2 for x in plus)
        sq_minus = sum(np.broadcast_to(x, grid.xi_sq.shape) ** 2 for x in minus)
        _, _, A_plus = _sample(spec, sq_plus, tuple(plus), grid)
        _, _, A_minus = _sample(spec, sq_minus, tuple(minus), grid)
        diff = (A_plus - A_minus) / (2.0 * h)
        op = np.linalg.matrix_norm(diff @ eta_inv, ord=2)
        op = np.where(singular, 0.0, op)
        max_ratio = max(max_ratio, float(op.max()))

    skipped = tuple(
        tuple(int(grid.k_axis[i]) for i in idx) for idx in zip(*np.nonzero(singular))
    )
    return CheckReport(
        name="symbol-derivative-bound",
        passed=max_ratio <= M_bound,
        max_ratio=max_ratio,
        skipped=skipped[:64],
        detail=f"M_bound={M_bound}, {len(skipped)} singular modes skipped",
    )


# ---------------------------------------------------------------------------
# Expression symbols

_ALLOWED_FUNCS = {
    "sqrt": np.sqrt,
    "exp": np.exp,
    "log": np.log,
    "cos": np.cos,
    "sin": np.sin,
    "tanh": np.tanh,
    "abs": np.abs,
}
_ALLOWED_CONSTS = {"pi": math.pi, "e": math.e}
_ALLOWED_NODES = (
    ast.Expression,
    ast.BinOp,
    ast.UnaryOp,
    ast.Add,
    ast.Sub,
    ast.Mult,
    ast.Div,
    ast.Pow,
    ast.USub,
    ast.UAdd,
    ast.Call,
    ast.Name,
    ast.Load,
    ast.Constant,
)


def parse_symbol_expression(expr: str, n: int):
    """Compile an arithmetic expression in xi_sq, xi1[, xi2] to a sampler.

    Only +, -, *, /, **, the functions sqrt/exp/log/cos/sin/tanh/abs, and
    the constants pi, e are allowed.  Returns f(xi_sq, xi_axes) -> array.
    """
    var_names = {"xi_sq"} | {f"xi{i + 1}" for i in range(n)}
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise SymbolError(f"cannot parse symbol expression {expr!r}: {exc}") from None
    for node in ast.walk(tree):
        if not isinstance(node, _ALLOWED_NODES):
            raise SymbolError(
                f"disallowed syntax {type(node).__name__!r} in symbol expression {expr!r}"
            )
        if isinstance(node, ast.Name):
            name = node.id
            if name not in var_names and name not in _ALLOWED_FUNCS and name not in _ALLOWED_CONSTS:
                raise SymbolError(f"unknown name {name!r} in symbol expression {expr!r}")
        if isinstance(node, ast.Call):
            if not isinstance(node.func, ast.Name) or node.func.id not in _ALLOWED_FUNCS:
                raise SymbolError(f"disallowed call in symbol expression {expr!r}")
            if node.keywords or len(node.args) != 1:
                raise SymbolError(f"symbol functions take one argument, in {expr!r}")
        if isinstance(node, ast.Constant) and not isinstance(node.value, (int, float)):
            raise SymbolError(f"non-numeric constant in symbol expression {expr!r}")
    code = compile(tree, "<symbol>", "eval")

    def sampler(xi_sq, xi_axes):
        shape = np.shape(xi_sq)
        env = dict(_ALLOWED_FUNCS)
        env.update(_ALLOWED_CONSTS)
        env["xi_sq"] = np.asarray(xi_sq, dtype=np.float64)
        for i, comp in enumerate(xi_axes):
            env[f"xi{i + 1}"] = np.broadcast_to(np.asarray(comp, dtype=np.float64), shape)
        out = eval(code, {"__builtins__": {}}, env)
        return np.broadcast_to(np.asarray(out, dtype=np.float64), shape)

    return sampler


def expression_symbols(
    N: int,
    n: int,
    a: str,
    g: str,
    A_diag: list[str] | None = None,
    A_matrix: list[list[str]] | None = None,
) -> SymbolSpec:
    """Build a SymbolSpec from expression strings.

    Give A either as a list of N diagonal-entry expressions or as a full
    N x N nested list; entries are expressions in xi_sq, xi1[, xi2].
    """
    if (A_diag is None) == (A_matrix is None):
        raise SymbolError("give exactly one of A_diag or A_matrix")
    a_fn = parse_symbol_expression(a, n)
    g_fn = parse_symbol_expression(g, n)
    if A_diag is not None:
        if len(A_diag) != N:
            raise SymbolError(f"A_diag needs {N} entries, got {len(A_diag)}")
        entry_fns = [parse_symbol_expression(s, n) for s in A_diag]

        def A_fn(xi_sq, xi_axes):
            shape = np.shape(xi_sq)
            out = np.zeros(shape + (N, N), dtype=np.complex128)
            for j, fn in enumerate(entry_fns):
                out[..., j, j] = fn(xi_sq, xi_axes)
            return out

    else:
        if len(A_matrix) != N or any(len(row) != N for row in A_matrix):
            raise SymbolError(f"A_matrix must be {N}x{N}")
        entry_fns = [[parse_symbol_expression(s, n) for s in row] for row in A_matrix]

        def A_fn(xi_sq, xi_axes):
            shape = np.shape(xi_sq)
            out = np.zeros(shape + (N, N), dtype=np.complex128)
            for i in range(N):
                for j in range(N):
                    out[..., i, j] = entry_fns[i][j](xi_sq, xi_axes)
            return out

    return SymbolSpec(N=N, a_fn=a_fn, g_fn=g_fn, A_fn=A_fn, name="expression")


# ---------------------------------------------------------------------------
# Presets

PRESET_NAMES = ("classical", "bessel-a", "thm51-diagonal")


def preset_symbols(
    name: str,
    N: int,
    m: float = 1.0,
    r: float = 2.0,
    sigma: float = 1.0,
    c: list[float] | None = None,
) -> SymbolSpec:
    """Named symbol families selectable from the config.

    classical:      a_hat = 1, A_hat = m^2 I, g_hat = (1+|xi|^2)^{-r/2}
    bessel-a:       classical with a_hat = (1+|xi|^2)^{-1}
    thm51-diagonal: classical a_hat/g_hat with
                    A_hat = diag(c_j 2^{sigma j} (1+|xi|^2)^{-1}), j = 1..N
    """

    def g_fn(xi_sq, xi_axes):
        return (1.0 + xi_sq) ** (-r / 2.0)

    def const_A(value_diag):
        def A_fn(xi_sq, xi_axes):
            out = np.zeros(np.shape(xi_sq) + (N, N), dtype=np.complex128)
            for j, val in enumerate(value_diag):
                out[..., j, j] = val
            return out

        return A_fn

    if name == "classical":
        return SymbolSpec(
            N=N,
            a_fn=lambda xi_sq, xi_axes: np.ones_like(xi_sq),
            g_fn=g_fn,
            A_fn=const_A([m**2] * N),
            name=name,
            params={"m": m, "r": r},
        )
    if name == "bessel-a":
        return SymbolSpec(
            N=N,
            a_fn=lambda xi_sq, xi_axes: (1.0 + xi_sq) ** -1.0,
            g_fn=g_fn,
            A_fn=const_A([m**2] * N),
            name=name,
            params={"m": m, "r": r},
        )
    if name == "thm51-diagonal":
        cs = [1.0] * N if c is None else list(c)
        if len(cs) != N:
            raise SymbolError(f"thm51-diagonal needs {N} coefficients c_j, got {len(cs)}")
        if any(cj < 0 for cj in cs):
            raise SymbolError("thm51-diagonal coefficients c_j must be nonnegative")
        weights = [cj * 2.0 ** (sigma * (j + 1)) for j, cj in enumerate(cs)]

        def A_fn(xi_sq, xi_axes):
            out = np.zeros(np.shape(xi_sq) + (N, N), dtype=np.complex128)
            decay = (1.0 + xi_sq) ** -1.0
            for j, w in enumerate(weights):
                out[..., j, j] = w * decay
            return out

        return SymbolSpec(
            N=N,
            a_fn=lambda xi_sq, xi_axes: np.ones_like(xi_sq),
            g_fn=g_fn,
            A_fn=A_fn,
            name=name,
            params={"r": r, "sigma": sigma, "c": tuple(cs)},
        )
    raise SymbolError(f"unknown symbol preset {name!r}; available: {', '.join(PRESET_NAMES)}")
