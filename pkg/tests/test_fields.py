import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from pydantic import ValidationError as PydanticValidationError

from nslorentz.errors import RankError, UnsupportedSpecError, ValidationError
from nslorentz.fields import (
    Field,
    GaussianVortex,
    Grid,
    RandomSolenoidal,
    TaylorGreen,
    divergence,
    forward,
    generate_initial_data,
    gradient,
    inverse,
    leray_project,
    max_divergence,
    taylor_green_field,
)


class TestGrid:
    def test_spacing_and_measure(self):
        g = Grid(n=3, N=16, L=2.0)
        assert g.h == pytest.approx(0.125)
        assert g.cell_measure == pytest.approx(0.125**3)
        assert g.volume == pytest.approx(8.0)
        assert g.shape == (16, 16, 16)
        assert g.spectral_shape == (16, 16, 9)

    @pytest.mark.parametrize("bad", [{"N": 12}, {"N": 2}, {"L": 0.0}, {"n": 5}, {"extra": 1}])
    def test_rejects_invalid(self, bad):
        kw = {"n": 2, "N": 16, "L": 1.0, **bad}
        with pytest.raises(PydanticValidationError):
            Grid(**kw)

    def test_wavevectors_are_read_only(self):
        xi = Grid(n=2, N=8, L=2 * math.pi).wavevectors()
        with pytest.raises(ValueError):
            xi[0][0, 0] = 1.0

    def test_nyquist_mask_counts(self):
        g = Grid(n=2, N=8, L=1.0)
        m = g.nyquist_mask()
        # rows with kx = -4 plus the last rfft column
        assert m.sum() == 8 + 5 - 1


class TestSpectralRoundTrip:
    @given(seed=st.integers(0, 2**31 - 1))
    @settings(max_examples=20, deadline=None)
    def test_forward_inverse(self, seed):
        g = Grid(n=2, N=16, L=3.0)
        f = Field(g, 1, np.random.default_rng(seed).standard_normal((2, 16, 16)))
        sf = forward(f)
        assert sf.hermitian_defect() < 1e-12
        assert np.max(np.abs(inverse(sf).values - f.values)) < 1e-12

    def test_single_mode_gradient(self):
        g = Grid(n=2, N=32, L=2 * math.pi)
        x, y = g.mesh()
        grad = gradient(Field(g, 0, np.sin(2 * x) * np.cos(y))).values
        assert np.max(np.abs(grad[0] - 2 * np.cos(2 * x) * np.cos(y))) < 1e-12
        assert np.max(np.abs(grad[1] + np.sin(2 * x) * np.sin(y))) < 1e-12


class TestLeray:
    @given(seed=st.integers(0, 2**31 - 1), n=st.sampled_from([2, 3]))
    @settings(max_examples=15, deadline=None)
    def test_projection_is_solenoidal_and_idempotent(self, seed, n):
        g = Grid(n=n, N=8 if n == 3 else 16, L=2.0)
        f = Field(g, 1, np.random.default_rng(seed).standard_normal((n,) + g.shape))
        pf = leray_project(f)
        assert max_divergence(pf) < 1e-12
        assert np.max(np.abs(leray_project(pf).values - pf.values)) < 1e-12

    def test_gradient_field_is_annihilated(self):
        g = Grid(n=2, N=32, L=2 * math.pi)
        x, y = g.mesh()
        # periodic gradient with no Nyquist content
        phi = Field(g, 0, np.sin(x) * np.cos(3 * y) + np.cos(2 * x))
        assert np.max(np.abs(leray_project(gradient(phi)).values)) < 1e-12

    def test_constant_mode_kept(self):
        g = Grid(n=2, N=8, L=1.0)
        f = Field(g, 1, np.stack([np.full(g.shape, 2.0), np.full(g.shape, -1.0)]))
        assert np.allclose(leray_project(f).values, f.values, atol=1e-14)

    def test_rank_checked(self):
        g = Grid(n=2, N=8, L=1.0)
        with pytest.raises(RankError):
            divergence(Field(g, 0, np.zeros(g.shape)))


class TestFieldArithmetic:
    def test_values_read_only(self, grid32):
        f = Field.zeros(grid32)
        with pytest.raises(ValueError):
            f.values[0, 0, 0] = 1.0

    def test_linear_ops(self, grid32):
        rng = np.random.default_rng(0)
        a = Field(grid32, 1, rng.standard_normal((2, 32, 32)))
        b = Field(grid32, 1, rng.standard_normal((2, 32, 32)))
        assert np.allclose((a + b - b).values, a.values)
        assert (a * 2.0).sup_norm() == pytest.approx(2 * a.sup_norm())

    def test_shape_validation(self, grid32):
        with pytest.raises(ValidationError):
            Field(grid32, 1, np.zeros((3, 32, 32)))
        with pytest.raises(ValidationError):
            Field(grid32, 0, np.full((32, 32), np.nan))


class TestInitialData:
    def test_taylor_green_decay(self):
        g = Grid(n=2, N=16, L=2 * math.pi)
        f0, f1 = taylor_green_field(g), taylor_green_field(g, t=0.3)
        assert np.allclose(f1.values, math.exp(-0.6) * f0.values)
        assert f0.sup_norm() == pytest.approx(1.0)

    @pytest.mark.parametrize("spec", [TaylorGreen(), GaussianVortex(width=0.7), RandomSolenoidal(seed=4)])
    def test_divergence_free(self, spec):
        g = Grid(n=2, N=32, L=2 * math.pi)
        f = generate_initial_data(spec, g)
        assert max_divergence(f) < 1e-10 * (1 + f.sup_norm())

    def test_random_is_seeded(self):
        g = Grid(n=3, N=8, L=1.0)
        a = generate_initial_data(RandomSolenoidal(seed=9, amplitude=0.5), g)
        b = generate_initial_data(RandomSolenoidal(seed=9, amplitude=0.5), g)
        assert np.array_equal(a.values, b.values)
        assert a.sup_norm() == pytest.approx(0.5)

    def test_random_stays_in_dealiased_band(self):
        g = Grid(n=2, N=32, L=1.0)
        f = generate_initial_data(RandomSolenoidal(seed=1), g)
        k = np.sqrt(sum(kk**2 for kk in g.integer_wavevectors()))
        coeffs = np.abs(forward(f).coeffs)
        assert coeffs[:, k > 32 // 6].max() < 1e-12

    def test_taylor_green_needs_two_dimensions(self):
        with pytest.raises(UnsupportedSpecError):
            taylor_green_field(Grid(n=3, N=8, L=1.0))
