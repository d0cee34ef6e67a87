"""Periodic grid, Fourier transform convention, and norms.

The computational domain is the box [0, 2L)^n with M uniform samples per
axis and fiber dimension N (unknowns take values in C^N at every grid
point).  The discrete transform convention used throughout the package is

    u_hat_k = (1/M^n) sum_j u_j exp(-i xi_k . x_j),      xi_k = (pi/L) k,

with k running over the integer lattice {-M/2, ..., M/2-1}^n in FFT
storage order.  Under this convention Parseval reads

    sum_j |u_j|^2 (dx)^n  =  sum_k |u_hat_k|^2 (2L)^n.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

PHYSICAL = "physical"
SPECTRAL = "spectral"


class GridError(ValueError):
    """Inconsistent grid parameters or mismatched grids/representations."""


def _is_power_of_two(m: int) -> bool:
    return m >= 1 and (m & (m - 1)) == 0


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform periodic grid on [0, 2L)^n with C^N fiber.

    Attributes
    ----------
    n : spatial dimension, 1 or 2
    L : half-period per axis; the box is [0, 2L)^n
    M : samples per axis (power of two, >= 4)
    N : fiber dimension (>= 1)
    """

    n: int
    L: float
    M: int
    N: int

    def __post_init__(self) -> None:
        if self.n not in (1, 2):
            raise GridError(f"spatial dimension n must be 1 or 2, got {self.n}")
        if not (self.L > 0):
            raise GridError(f"box half-period L must be positive, got {self.L}")
        if self.M < 4 or not _is_power_of_two(self.M):
            raise GridError(f"M must be a power of two >= 4, got {self.M}")
        if self.N < 1:
            raise GridError(f"fiber dimension N must be >= 1, got {self.N}")

    @property
    def dx(self) -> float:
        return 2.0 * self.L / self.M

    @property
    def volume(self) -> float:
        """Box volume (2L)^n."""
        return (2.0 * self.L) ** self.n

    @property
    def shape(self) -> tuple[int, ...]:
        """Shape of a field's value array: (M,)*n + (N,)."""
        return (self.M,) * self.n + (self.N,)

    @property
    def spatial_axes(self) -> tuple[int, ...]:
        return tuple(range(self.n))

    @property
    def x(self) -> np.ndarray:
        """Sample coordinates per axis, shape (M,)."""
        return np.arange(self.M) * self.dx

    @property
    def k_axis(self) -> np.ndarray:
        """Integer mode numbers along one axis, FFT order."""
        return np.fft.fftfreq(self.M, d=1.0 / self.M).astype(np.int64)

    @property
    def xi_axes(self) -> tuple[np.ndarray, ...]:
        """Dual variable xi = (pi/L) k per axis, each broadcast to (M,)*n."""
        xi1 = (np.pi / self.L) * self.k_axis
        if self.n == 1:
            return (xi1,)
        return (xi1[:, None] * np.ones((1, self.M)), np.ones((self.M, 1)) * xi1[None, :])

    @property
    def xi_sq(self) -> np.ndarray:
        """|xi_k|^2 over the mode lattice, shape (M,)*n."""
        xi1 = (np.pi / self.L) * self.k_axis
        if self.n == 1:
            return xi1**2
        return xi1[:, None] ** 2 + xi1[None, :] ** 2

    def zero_values(self) -> np.ndarray:
        return np.zeros(self.shape, dtype=np.complex128)

    def compatible(self, other: "Grid") -> bool:
        return (
            self.n == other.n
            and self.M == other.M
            and self.N == other.N
            and np.isclose(self.L, other.L, rtol=1e-14, atol=0.0)
        )


@dataclass(eq=False)
class Field:
    """A fiber-valued field on a Grid, in physical or spectral representation.

    values has shape (M,)*n + (N,), complex128.  ``real`` flags a field
    that represents real-valued physical data; inverse transforms then
    discard the O(eps) imaginary dust and conjugate symmetry of the
    spectral coefficients is a checkable invariant.
    """

    grid: Grid
    values: np.ndarray
    rep: str = PHYSICAL
    t: float = 0.0
    real: bool = False

    def __post_init__(self) -> None:
        self.values = np.asarray(self.values, dtype=np.complex128)
        if self.values.shape != self.grid.shape:
            raise GridError(
                f"field values shape {self.values.shape} does not match grid shape {self.grid.shape}"
            )
        if self.rep not in (PHYSICAL, SPECTRAL):
            raise GridError(f"unknown representation {self.rep!r}")

    def copy(self) -> "Field":
        return replace(self, values=self.values.copy())

    def with_values(self, values: np.ndarray) -> "Field":
        return replace(self, values=values)


@dataclass(eq=False)
class State:
    """The pair (u, u_t) at a common time stamp."""

    u: Field
    v: Field

    def __post_init__(self) -> None:
        if not self.u.grid.compatible(self.v.grid):
            raise GridError("u and v live on different grids")
        if self.u.t != self.v.t:
            raise GridError(f"u and v carry different time stamps: {self.u.t} vs {self.v.t}")

    @property
    def grid(self) -> Grid:
        return self.u.grid

    @property
    def t(self) -> float:
        return self.u.t

    def copy(self) -> "State":
        return State(self.u.copy(), self.v.copy())


def zero_field(grid: Grid, rep: str = PHYSICAL, t: float = 0.0, real: bool = False) -> Field:
    return Field(grid, grid.zero_values(), rep=rep, t=t, real=real)


def forward_transform(f: Field) -> Field:
    """Physical -> spectral under the package convention (1/M^n forward factor)."""
    if f.rep != PHYSICAL:
        raise GridError("forward_transform expects a physical-representation field")
    g = f.grid
    vhat = np.fft.fftn(f.values, axes=g.spatial_axes) / (g.M**g.n)
    return replace(f, values=vhat, rep=SPECTRAL)


def inverse_transform(f: Field) -> Field:
    """Spectral -> physical; re-realizes fields flagged real."""
    if f.rep != SPECTRAL:
        raise GridError("inverse_transform expects a spectral-representation field")
    g = f.grid
    v = np.fft.ifftn(f.values * (g.M**g.n), axes=g.spatial_axes)
    if f.real:
        v = v.real.astype(np.complex128)
    return replace(f, values=v, rep=PHYSICAL)


def to_spectral(f: Field) -> Field:
    return f if f.rep == SPECTRAL else forward_transform(f)


def to_physical(f: Field) -> Field:
    return f if f.rep == PHYSICAL else inverse_transform(f)


def fiber_norms(values: np.ndarray) -> np.ndarray:
    """Pointwise fiber (Euclidean C^N) norm; collapses the trailing axis."""
    return np.sqrt(np.sum(np.abs(values) ** 2, axis=-1))


def sup_norm(f: Field) -> float:
    """max over grid points of the fiber norm (discrete L-infinity norm)."""
    p = to_physical(f)
    return float(fiber_norms(p.values).max())


def sobolev_norm(f: Field, s: float = 0.0) -> float:
    """H^s norm via the multiplier (1+|xi|^2)^(s/2); s=0 is the L^2 norm."""
    g = f.grid
    sp = to_spectral(f)
    w = (1.0 + g.xi_sq) ** s
    total = np.sum(w * np.sum(np.abs(sp.values) ** 2, axis=-1))
    return float(np.sqrt(total * g.volume))


def l2_norm(f: Field) -> float:
    return sobolev_norm(f, 0.0)


def conjugate_symmetry_defect(f: Field) -> float:
    """Relative defect of u_hat(-xi) = conj(u_hat(xi)); 0 for real fields."""
    sp = to_spectral(f)
    v = sp.values
    refl = v
    for ax in f.grid.spatial_axes:
        refl = np.roll(np.flip(refl, axis=ax), 1, axis=ax)
    scale = np.abs(v).max()
    if scale == 0.0:
        return 0.0
    return float(np.abs(refl.conj() - v).max() / scale)
