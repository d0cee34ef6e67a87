"""Grid and transform tests.

The transform convention is pinned by a brute-force DFT oracle and by
hand-computable single-mode and closed-form norm cases before any
invariant (roundtrip, Parseval) is exercised.
"""

import numpy as np
import pytest

from nlwave.grid import (
    Field,
    Grid,
    GridError,
    State,
    conjugate_symmetry_defect,
    forward_transform,
    inverse_transform,
    l2_norm,
    sobolev_norm,
    sup_norm,
    zero_field,
)


def brute_force_dft(grid, values):
    """O(M^2n) reference: u_hat_k = (1/M^n) sum_j u_j exp(-i xi_k x_j)."""
    M, n, N = grid.M, grid.n, grid.N
    k1 = np.fft.fftfreq(M, d=1.0 / M).astype(int)
    x1 = np.arange(M) * grid.dx
    out = np.zeros(grid.shape, dtype=np.complex128)
    if n == 1:
        for ik, k in enumerate(k1):
            xi = (np.pi / grid.L) * k
            phase = np.exp(-1j * xi * x1)
            out[ik] = phase @ values.reshape(M, N) / M
    else:
        for ik, ka in enumerate(k1):
            for jk, kb in enumerate(k1):
                xia = (np.pi / grid.L) * ka
                xib = (np.pi / grid.L) * kb
                phase = np.exp(-1j * (xia * x1[:, None] + xib * x1[None, :]))
                out[ik, jk] = np.tensordot(phase, values, axes=([0, 1], [0, 1])) / M**2
    return out


def random_field(grid, rng, real=False):
    vals = rng.standard_normal(grid.shape) + (0 if real else 1j * rng.standard_normal(grid.shape))
    return Field(grid, vals.astype(np.complex128), real=real)


class TestGridConstruction:
    def test_derived_quantities(self):
        g = Grid(n=1, L=np.pi, M=8, N=2)
        assert g.dx == pytest.approx(2 * np.pi / 8)
        assert g.volume == pytest.approx(2 * np.pi)
        assert g.shape == (8, 2)
        assert list(g.k_axis) == [0, 1, 2, 3, -4, -3, -2, -1]

    def test_xi_lattice_2d(self):
        g = Grid(n=2, L=2.0, M=4, N=1)
        assert g.xi_sq.shape == (4, 4)
        # mode (1, -2): |xi|^2 = (pi/2)^2 (1 + 4)
        assert g.xi_sq[1, 2] == pytest.approx((np.pi / 2) ** 2 * 5)

    @pytest.mark.parametrize(
        "kwargs",
        [
            dict(n=3, L=1.0, M=8, N=1),
            dict(n=1, L=0.0, M=8, N=1),
            dict(n=1, L=1.0, M=6, N=1),
            dict(n=1, L=1.0, M=2, N=1),
            dict(n=1, L=1.0, M=8, N=0),
        ],
    )
    def test_rejects_bad_parameters(self, kwargs):
        with pytest.raises(GridError):
            Grid(**kwargs)

    def test_field_shape_check(self):
        g = Grid(n=1, L=1.0, M=8, N=2)
        with pytest.raises(GridError):
            Field(g, np.zeros((8, 3)))

    def test_state_requires_matching_stamps(self):
        g = Grid(n=1, L=1.0, M=8, N=1)
        u = zero_field(g, t=0.0)
        v = zero_field(g, t=1.0)
        with pytest.raises(GridError):
            State(u, v)


class TestTransformConvention:
    @pytest.mark.parametrize("n,M,N", [(1, 8, 1), (1, 16, 3), (2, 8, 2)])
    def test_matches_brute_force_dft(self, n, M, N):
        rng = np.random.default_rng(20260814 + 10 * n + M + N)
        g = Grid(n=n, L=1.7, M=M, N=N)
        f = random_field(g, rng)
        fast = forward_transform(f).values
        slow = brute_force_dft(g, f.values)
        assert np.abs(fast - slow).max() < 1e-12

    def test_single_mode_coefficient(self):
        # u(x) = exp(i (pi/L) x) must give u_hat_1 = 1, all else 0
        g = Grid(n=1, L=np.pi, M=16, N=1)
        u = np.exp(1j * (np.pi / g.L) * g.x)[:, None]
        uhat = forward_transform(Field(g, u)).values
        expected = np.zeros(g.shape, dtype=complex)
        expected[1, 0] = 1.0
        assert np.abs(uhat - expected).max() < 1e-13

    def test_constant_mode(self):
        g = Grid(n=2, L=1.5, M=8, N=2)
        u = np.full(g.shape, 2.5 - 1.0j)
        uhat = forward_transform(Field(g, u)).values
        assert uhat[0, 0, 0] == pytest.approx(2.5 - 1.0j)
        assert uhat[0, 0, 1] == pytest.approx(2.5 - 1.0j)
        rest = uhat.copy()
        rest[0, 0, :] = 0
        assert np.abs(rest).max() < 1e-14

    @pytest.mark.parametrize("n,M,N", [(1, 32, 1), (1, 64, 4), (2, 16, 2), (2, 32, 1)])
    def test_roundtrip(self, n, M, N):
        rng = np.random.default_rng(7 + n + M + N)
        g = Grid(n=n, L=2.2, M=M, N=N)
        f = random_field(g, rng)
        back = inverse_transform(forward_transform(f))
        rel = np.abs(back.values - f.values).max() / np.abs(f.values).max()
        assert rel < 1e-12

    def test_linearity(self):
        rng = np.random.default_rng(99)
        g = Grid(n=1, L=1.0, M=32, N=2)
        f1, f2 = random_field(g, rng), random_field(g, rng)
        a, b = 1.3 - 0.4j, -2.1 + 0.7j
        lhs = forward_transform(Field(g, a * f1.values + b * f2.values)).values
        rhs = a * forward_transform(f1).values + b * forward_transform(f2).values
        assert np.abs(lhs - rhs).max() < 1e-12

    @pytest.mark.parametrize("n", [1, 2])
    def test_real_field_conjugate_symmetry(self, n):
        rng = np.random.default_rng(123 + n)
        g = Grid(n=n, L=3.0, M=16, N=2)
        f = random_field(g, rng, real=True)
        assert conjugate_symmetry_defect(f) < 1e-13

    def test_rep_guards(self):
        g = Grid(n=1, L=1.0, M=8, N=1)
        f = zero_field(g)
        with pytest.raises(GridError):
            inverse_transform(f)
        with pytest.raises(GridError):
            forward_transform(forward_transform(f))


class TestNorms:
    def test_sin_l2_norm_closed_form(self):
        # ||sin(x)||_L2 over [0, 2pi) is sqrt(pi)
        g = Grid(n=1, L=np.pi, M=64, N=1)
        f = Field(g, np.sin(g.x)[:, None].astype(complex), real=True)
        assert l2_norm(f) == pytest.approx(np.sqrt(np.pi), rel=1e-12)

    def test_sin_h1_norm_closed_form(self):
        # For u = sin(x): |u_hat_{+-1}| = 1/2, multiplier (1+1) each,
        # so ||u||_{H^1}^2 = 2pi * (2 * 1/4 * 2) = 2pi
        g = Grid(n=1, L=np.pi, M=64, N=1)
        f = Field(g, np.sin(g.x)[:, None].astype(complex), real=True)
        assert sobolev_norm(f, 1.0) == pytest.approx(np.sqrt(2 * np.pi), rel=1e-12)

    def test_constant_l2_norm(self):
        g = Grid(n=2, L=1.25, M=8, N=3)
        c = 0.7 - 0.2j
        f = Field(g, np.full(g.shape, c))
        assert l2_norm(f) == pytest.approx(abs(c) * np.sqrt(3) * g.volume**0.5, rel=1e-12)

    @pytest.mark.parametrize("n,M,N", [(1, 64, 1), (1, 32, 3), (2, 16, 2)])
    def test_parseval(self, n, M, N):
        rng = np.random.default_rng(55 + n * M * N)
        g = Grid(n=n, L=1.9, M=M, N=N)
        f = random_field(g, rng)
        phys = np.sqrt(np.sum(np.abs(f.values) ** 2) * g.dx**g.n)
        assert l2_norm(f) == pytest.approx(phys, rel=1e-12)
        # and s=0 Sobolev agrees with itself computed from either rep
        assert sobolev_norm(forward_transform(f), 0.0) == pytest.approx(phys, rel=1e-12)

    def test_sup_norm_uses_fiber_norm(self):
        g = Grid(n=1, L=1.0, M=8, N=2)
        vals = np.zeros(g.shape, dtype=complex)
        vals[3] = [3.0, 4.0]
        assert sup_norm(Field(g, vals)) == pytest.approx(5.0)

    def test_sup_norm_from_spectral(self):
        rng = np.random.default_rng(2)
        g = Grid(n=1, L=1.0, M=32, N=1)
        f = random_field(g, rng)
        assert sup_norm(forward_transform(f)) == pytest.approx(sup_norm(f), rel=1e-12)
