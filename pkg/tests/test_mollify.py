import numpy as np
import pytest

from eulerlab.errors import ConfigurationError, GridMismatchError
from eulerlab.grid_fields import (
    divergence,
    gradient,
    leray_project,
    lp_norm,
    make_grid,
    max_norm,
)
from eulerlab.mollify import make_kernel, mollify

from _utils import direct_convolution, random_band_limited_scalar, random_band_limited_velocity


class TestMakeKernel:
    def test_unit_mass(self):
        grid = make_grid(2, 256)
        k = make_kernel(grid, 0.1)
        assert abs(k.mass() - 1.0) <= 1e-12

    def test_under_resolved_rejected(self):
        grid = make_grid(2, 64)
        with pytest.raises(ConfigurationError, match="n >="):
            make_kernel(grid, 0.01)

    def test_compact_support_exact(self):
        grid = make_grid(2, 128)
        eps = 0.125
        k = make_kernel(grid, eps)
        r2 = np.zeros(grid.shape)
        for off in grid.offsets():
            r2 = r2 + np.broadcast_to(off * off, grid.shape)
        outside = r2 >= eps * eps
        assert np.all(k.values.values[outside] == 0.0)

    def test_nonnegative(self):
        grid = make_grid(2, 128)
        k = make_kernel(grid, 0.2)
        assert np.all(k.values.values >= 0.0)

    def test_epsilon_bounds(self):
        grid = make_grid(2, 64)
        with pytest.raises(ConfigurationError):
            make_kernel(grid, 0.75)
        # marginal kernels (between 2 and 4 cells) exist but are flagged
        marginal = make_kernel(grid, 2.5 * grid.spacing)
        assert not marginal.fully_resolved
        assert make_kernel(grid, 0.25).fully_resolved


class TestMollify:
    def test_constant_preserved(self):
        grid = make_grid(2, 64)
        f = grid.sample_scalar(lambda x, y: 3.0 + 0.0 * x)
        k = make_kernel(grid, 0.2)
        out = mollify(f, k)
        assert np.max(np.abs(out.values - 3.0)) <= 1e-12

    def test_commutes_with_gradient(self):
        grid = make_grid(2, 64)
        f = random_band_limited_scalar(grid, 10, seed=3)
        k = make_kernel(grid, 0.15)
        a = gradient(mollify(f, k))
        b = mollify(gradient(f), k)
        for ca, cb in zip(a.components, b.components):
            assert np.max(np.abs(ca.values - cb.values)) <= 1e-12 * max(1.0, max_norm(a))

    def test_matches_direct_convolution(self):
        grid = make_grid(2, 64)
        f = grid.sample_scalar(lambda x, y: np.sin(np.pi * x))
        k = make_kernel(grid, 0.2)
        out = mollify(f, k)
        oracle = direct_convolution(f.values, k)
        assert np.max(np.abs(out.values - oracle)) <= 1e-8
        # the mode is damped, not annihilated
        assert 0.1 < max_norm(out) < 1.0

    def test_grid_mismatch(self):
        f = make_grid(2, 64).sample_scalar(lambda x, y: 0.0 * x)
        k = make_kernel(make_grid(2, 128), 0.2)
        with pytest.raises(GridMismatchError):
            mollify(f, k)

    def test_preserves_divfree_flag_and_property(self):
        grid = make_grid(2, 64)
        u = random_band_limited_velocity(grid, 12, seed=5, divfree=True)
        k = make_kernel(grid, 0.1)
        out = mollify(u, k)
        assert out.divergence_free
        assert max_norm(divergence(out)) <= 1e-10 * max(1.0, max_norm(out))


class TestMollifyProperties:
    def test_l2_contraction(self):
        grid = make_grid(2, 64)
        k = make_kernel(grid, 0.2)
        for seed in (1, 2, 3):
            f = random_band_limited_scalar(grid, 20, seed=seed)
            assert lp_norm(mollify(f, k), 2.0) <= lp_norm(f, 2.0) * (1.0 + 1e-12)

    def test_approach_monotone_on_dyadic_sequence(self):
        grid = make_grid(2, 64)
        f = random_band_limited_scalar(grid, 2, seed=11)
        errs = []
        for eps in (0.5, 0.25, 0.125, 0.0625):
            k = make_kernel(grid, eps)
            diff = mollify(f, k).values - f.values
            errs.append(float(np.sqrt(np.sum(diff**2) * grid.cell_volume)))
        for big, small in zip(errs, errs[1:]):
            assert small <= big + 1e-10

    def test_commutes_with_leray(self):
        grid = make_grid(2, 64)
        u = random_band_limited_velocity(grid, 12, seed=7)
        k = make_kernel(grid, 0.1)
        a = mollify(leray_project(u), k)
        b = leray_project(mollify(u, k))
        scale = max(1.0, max_norm(a))
        for ca, cb in zip(a.components, b.components):
            assert np.max(np.abs(ca.values - cb.values)) <= 1e-12 * scale
