import numpy as np
import pytest

from eulerlab.besov import fit_regularity_exponent
from eulerlab.errors import ConfigurationError
from eulerlab.grid_fields import (
    divergence,
    gradient_tensor,
    lp_norm,
    make_grid,
    max_norm,
)
from eulerlab.synth import (
    SynthSpec,
    field_from_spec,
    lacunary_field,
    random_divfree,
    rigid_rotation_gradient,
    shear_flow,
    taylor_green,
    taylor_green_pressure,
)


class TestSynthSpec:
    def test_rejects_unknown_kind(self):
        with pytest.raises(ConfigurationError):
            SynthSpec("vortex_sheet")

    def test_lacunary_needs_alpha(self):
        with pytest.raises(ConfigurationError):
            SynthSpec("lacunary", j_max=4)


class TestLacunary:
    def test_deterministic(self):
        grid = make_grid(2, 128)
        spec = SynthSpec("lacunary", alpha=0.5, j_max=5, seed=42)
        a = lacunary_field(spec, grid)
        b = lacunary_field(spec, grid)
        for ca, cb in zip(a.components, b.components):
            assert np.array_equal(ca.values, cb.values)

    def test_divergence_free(self):
        grid = make_grid(2, 128)
        u = lacunary_field(SynthSpec("lacunary", alpha=0.6, j_max=5, seed=1), grid)
        assert u.divergence_free
        assert max_norm(divergence(u)) <= 1e-10 * max_norm(u)

    def test_band_limit_enforced(self):
        grid = make_grid(2, 64)  # dealias_kmax = 21
        with pytest.raises(ConfigurationError, match="dealiased band"):
            lacunary_field(SynthSpec("lacunary", alpha=0.5, j_max=5, seed=0), grid)

    def test_round_trip_exponent(self):
        grid = make_grid(2, 256)
        u = lacunary_field(SynthSpec("lacunary", alpha=0.5, j_max=6, seed=42), grid)
        assert fit_regularity_exponent(u, 3.0) == pytest.approx(0.5, abs=0.05)

    def test_single_octave_is_smooth(self):
        grid = make_grid(2, 256)
        u = lacunary_field(SynthSpec("lacunary", alpha=0.5, j_max=1, seed=3), grid)
        assert fit_regularity_exponent(u, 3.0) >= 0.9


class TestTaylorGreen:
    def test_divergence(self):
        grid = make_grid(2, 256)
        u = taylor_green(grid, 1.0)
        assert max_norm(divergence(u)) <= 1e-12

    def test_kinetic_energy(self):
        # 0.5 * int |u|^2 = 0.5 * (1 + 1) * amplitude^2 per the product-mode
        # quadrature (int sin^2 = int cos^2 = 1 on [-1,1]).
        grid = make_grid(2, 256)
        u = taylor_green(grid, 1.0)
        assert 0.5 * lp_norm(u, 2.0) ** 2 == pytest.approx(1.0, abs=1e-12)

    def test_zero_amplitude(self):
        grid = make_grid(2, 64)
        u = taylor_green(grid, 0.0)
        assert max_norm(u) == 0.0

    def test_pressure_sampled(self):
        grid = make_grid(2, 64)
        p = taylor_green_pressure(grid, 2.0)
        assert p.values[0, 0] == pytest.approx(0.25 * 4.0 * 2.0, abs=1e-12)


class TestShearFlow:
    def test_divergence_exact(self):
        grid = make_grid(2, 128)
        profile = grid.sample_scalar(lambda x, y: np.sin(np.pi * y))
        u = shear_flow(grid, profile)
        assert max_norm(divergence(u)) <= 1e-12

    def test_rejects_x1_dependence(self):
        grid = make_grid(2, 64)
        profile = grid.sample_scalar(lambda x, y: np.sin(np.pi * x))
        with pytest.raises(ConfigurationError, match="x2 only"):
            shear_flow(grid, profile)

    def test_constant_profile_has_zero_gradient(self):
        grid = make_grid(2, 64)
        profile = grid.sample_scalar(lambda x, y: 2.0 + 0.0 * x)
        u = shear_flow(grid, profile)
        T = gradient_tensor(u)
        assert np.max(np.abs(T)) <= 1e-12


class TestRandomDivfree:
    def test_deterministic(self):
        grid = make_grid(2, 128)
        a = random_divfree(grid, 3.0, seed=9)
        b = random_divfree(grid, 3.0, seed=9)
        for ca, cb in zip(a.components, b.components):
            assert np.array_equal(ca.values, cb.values)

    def test_divergence_free(self):
        grid = make_grid(2, 128)
        u = random_divfree(grid, 2.0, seed=5)
        assert max_norm(divergence(u)) <= 1e-10 * max_norm(u)

    def test_steep_slope_is_regular(self):
        grid = make_grid(2, 256)
        u = random_divfree(grid, 3.0, seed=4)
        assert fit_regularity_exponent(u, 2.0) >= 0.8

    def test_amplitude_normalization(self):
        grid = make_grid(2, 128)
        u = random_divfree(grid, 2.5, seed=6, amplitude=0.5)
        assert u.max_speed() == pytest.approx(0.5, rel=1e-12)


class TestRotationGradient:
    def test_constant_antisymmetric(self):
        grid = make_grid(2, 32)
        W = rigid_rotation_gradient(grid, rate=2.0)
        assert W.shape == (2, 2) + grid.shape
        assert np.all(W[0, 0] == 0.0) and np.all(W[1, 1] == 0.0)
        assert np.all(W[0, 1] == -2.0) and np.all(W[1, 0] == 2.0)


class TestFieldFromSpec:
    def test_dispatch(self):
        grid = make_grid(2, 64)
        for kind, kw in (
            ("taylor_green", {}),
            ("shear", {}),
            ("constant", {}),
            ("lacunary", {"alpha": 0.5, "j_max": 3}),
            ("random_divfree", {"slope": 3.0}),
        ):
            u = field_from_spec(SynthSpec(kind, seed=1, **kw), grid)
            assert u.grid == grid
