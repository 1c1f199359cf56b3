"""
Tests for the pseudospectral core.

Validates:
- Grid construction and validation
- Unitary transforms and Parseval
- Field immutability and reality tags
- Multipliers, derivatives and weighted norms
- Shifts, reflections and radial symmetrization
- Seeded random fields
"""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from hnls.errors import FieldError, GridError, SymbolError
from hnls.numerics.operator_symbols import Laplacian
from hnls.numerics.spectral_core import (
    Field,
    GridSpec,
    apply_multiplier,
    boundary_amplitude,
    dealias,
    derivative,
    dual_norm_hp,
    inner_product_hp,
    inner_product_l2,
    make_grid,
    norm_hp,
    radial_defect,
    random_smooth_field,
    reflect,
    shift_and_phase,
    sobolev_norm,
    spectral_tail,
    symmetrize_radial,
    to_fourier,
    to_physical,
    transform,
)


def _gaussian(grid, center=0.0):
    r_sq = sum((x - center) ** 2 for x in grid.x)
    return Field.from_physical(grid, np.exp(-r_sq), real=True)


class TestGridSpec:
    """Test suite for the periodic lattice."""

    def test_basic_geometry(self):
        grid = make_grid(2, 32, 4.0)
        assert grid.shape == (32, 32)
        assert grid.size == 1024
        assert grid.dx == pytest.approx(0.125)
        assert grid.dv == pytest.approx(0.125 ** 2)
        assert grid.dxi == pytest.approx(2 * math.pi / 4.0)

    def test_origin_sits_at_index_n_over_2(self):
        grid = make_grid(1, 64, 10.0)
        assert grid.axis[grid.n // 2] == 0.0
        assert grid.axis[0] == -5.0

    def test_wavenumbers_fft_order(self):
        grid = make_grid(1, 16, 2 * math.pi)
        assert grid.xi_axis[0] == 0.0
        assert grid.xi_axis[1] == pytest.approx(1.0)
        assert grid.xi_axis[8] == pytest.approx(-8.0)
        assert list(grid.k_axis[:3]) == [0, 1, 2]

    def test_rejects_non_power_of_two(self):
        with pytest.raises(GridError, match="power of two"):
            make_grid(1, 48, 1.0)

    def test_rejects_bad_dimension(self):
        with pytest.raises(GridError, match="dimension"):
            make_grid(4, 16, 1.0)

    def test_rejects_nonpositive_box(self):
        with pytest.raises(GridError, match="positive"):
            make_grid(1, 16, 0.0)

    def test_hashable(self):
        assert make_grid(1, 16, 1.0) == GridSpec(1, 16, 1.0)
        assert len({make_grid(1, 16, 1.0), make_grid(1, 16, 1.0)}) == 1


class TestTransforms:
    """Test suite for the unitary transform pair."""

    def test_roundtrip(self, grid_1d):
        u = _gaussian(grid_1d)
        back = to_physical(to_fourier(u))
        np.testing.assert_allclose(back.physical(), u.physical(), atol=1e-14)

    def test_parseval(self, grid_1d):
        u = random_smooth_field(grid_1d, seed=3, decay=3.0)
        phys = float(np.sum(np.abs(u.physical()) ** 2))
        four = float(np.sum(np.abs(u.fourier()) ** 2))
        assert four == pytest.approx(phys, rel=1e-13)

    def test_transform_direction(self, grid_1d):
        u = _gaussian(grid_1d)
        assert transform(u, "forward").space == "fourier"
        with pytest.raises(ValueError, match="direction"):
            transform(u, "sideways")

    def test_wrong_space_tag(self, grid_1d):
        with pytest.raises(FieldError):
            to_physical(_gaussian(grid_1d))

    @settings(max_examples=30, deadline=None)
    @given(arrays(np.float64, (16,), elements=st.floats(-1e3, 1e3)))
    def test_roundtrip_property(self, values):
        grid = make_grid(1, 16, 1.0)
        u = Field.from_physical(grid, values, real=True)
        np.testing.assert_allclose(to_physical(to_fourier(u)).physical(), values, atol=1e-9)

    @settings(max_examples=30, deadline=None)
    @given(arrays(np.float64, (8, 8), elements=st.floats(-1e3, 1e3)))
    def test_parseval_property(self, values):
        grid = make_grid(2, 8, 3.0)
        u = Field.from_physical(grid, values, real=True)
        l2 = math.sqrt(inner_product_l2(u, u).real)
        assert sobolev_norm(u, 0) == pytest.approx(l2, rel=1e-12, abs=1e-9)


class TestField:
    """Test suite for immutable fields."""

    def test_values_are_read_only(self, grid_1d):
        u = _gaussian(grid_1d)
        with pytest.raises(ValueError):
            u.values[0] = 1.0

    def test_real_tag_stores_float(self, grid_1d):
        u = Field.from_physical(grid_1d, np.ones(grid_1d.shape) + 0j)
        assert u.real
        assert u.values.dtype == np.float64

    def test_real_tag_rejects_complex(self, grid_1d):
        with pytest.raises(FieldError, match="imaginary"):
            Field.from_physical(grid_1d, 1j * np.ones(grid_1d.shape), real=True)

    def test_shape_mismatch(self, grid_1d):
        with pytest.raises(FieldError, match="shape"):
            Field.from_physical(grid_1d, np.ones(7))

    def test_arithmetic_grid_mismatch(self, grid_1d):
        other = make_grid(1, 64, 1.0)
        with pytest.raises(FieldError):
            _gaussian(grid_1d) + _gaussian(other)

    def test_scalar_arithmetic(self, grid_1d):
        u = _gaussian(grid_1d)
        np.testing.assert_allclose((2.0 * u - u).physical(), u.physical())
        assert (u * 1j).real is False


class TestMultipliers:
    """Test suite for multipliers and derivatives."""

    def test_derivative_of_sine(self):
        grid = make_grid(1, 32, 2 * math.pi)
        x = grid.x[0]
        du = derivative(Field.from_physical(grid, np.sin(3 * x)), 0)
        np.testing.assert_allclose(du.physical(), 3 * np.cos(3 * x), atol=1e-12)

    def test_laplacian_multiplier(self):
        grid = make_grid(1, 32, 2 * math.pi)
        x = grid.x[0]
        out = apply_multiplier(Field.from_physical(grid, np.cos(3 * x)), Laplacian())
        assert out.real
        np.testing.assert_allclose(out.physical(), 9 * np.cos(3 * x), atol=1e-12)

    def test_callable_symbol(self, grid_1d):
        u = _gaussian(grid_1d)
        out = apply_multiplier(u, lambda xi: np.ones_like(xi[0]))
        np.testing.assert_allclose(out.physical(), u.physical(), atol=1e-14)

    def test_multipliers_compose(self):
        grid = make_grid(2, 16, 8.0)
        u = random_smooth_field(grid, seed=2, decay=3.0, real=True)
        s = np.broadcast_to(grid.xi_sq, grid.shape)
        a, b = 1.0 + s, s ** 2
        twice = apply_multiplier(apply_multiplier(u, a), b).physical()
        once = apply_multiplier(u, a * b).physical()
        np.testing.assert_allclose(twice, once, atol=1e-12 * np.max(np.abs(once)))

    def test_complex_symbol_rejected(self, grid_1d):
        with pytest.raises(SymbolError, match="real"):
            apply_multiplier(_gaussian(grid_1d), 1j * np.ones(grid_1d.shape))

    def test_nonfinite_symbol_rejected(self, grid_1d):
        bad = np.full(grid_1d.shape, np.inf)
        with pytest.raises(SymbolError, match="non-finite"):
            apply_multiplier(_gaussian(grid_1d), bad)


class TestNorms:
    """Test suite for Sobolev and energy norms."""

    def test_sobolev_zero_is_l2(self, grid_1d):
        u = _gaussian(grid_1d)
        assert sobolev_norm(u, 0) == pytest.approx(math.sqrt(inner_product_l2(u, u).real), rel=1e-13)

    def test_hp_norm_of_laplacian_is_h1(self, grid_1d):
        u = _gaussian(grid_1d)
        assert norm_hp(u, Laplacian()) == pytest.approx(sobolev_norm(u, 1), rel=1e-13)

    def test_dual_norm_pairs_with_hp(self, grid_1d):
        u = _gaussian(grid_1d)
        f = u + apply_multiplier(u, Laplacian())
        assert dual_norm_hp(f, Laplacian()) == pytest.approx(norm_hp(u, Laplacian()), rel=1e-12)

    def test_hp_inner_product_of_modes(self, grid_1d):
        x = grid_1d.x[0]
        u = Field.from_physical(grid_1d, np.cos(x), real=True)
        v = Field.from_physical(grid_1d, np.exp(2j * x))
        # (1 + k^2) * pi for cos(k x) on [0, 2 pi)
        assert inner_product_hp(u, u, Laplacian()).real == pytest.approx(2 * math.pi, rel=1e-13)
        assert abs(inner_product_hp(u, v, Laplacian())) < 1e-13
        assert inner_product_hp(v, v, Laplacian()).real == pytest.approx(5 * 2 * math.pi, rel=1e-13)

    def test_gaussian_l2_norm(self):
        grid = make_grid(1, 128, 20.0)
        # int exp(-2 x^2) dx = sqrt(pi / 2)
        assert sobolev_norm(_gaussian(grid), 0) ** 2 == pytest.approx(math.sqrt(math.pi / 2), rel=1e-12)

    def test_sobolev_index_floor(self, grid_1d):
        with pytest.raises(ValueError, match="-2"):
            sobolev_norm(_gaussian(grid_1d), -3)


class TestSymmetry:
    """Test suite for translations, phases and radial projection."""

    def test_integer_shift_is_roll(self):
        grid = make_grid(1, 64, 16.0)
        u = _gaussian(grid)
        shifted = shift_and_phase(u, [3 * grid.dx], 0.0)
        np.testing.assert_allclose(shifted.physical().real, np.roll(u.physical(), 3), atol=1e-13)

    def test_phase_rotation(self, grid_1d):
        u = _gaussian(grid_1d)
        out = shift_and_phase(u, [0.0], 0.5 * math.pi)
        np.testing.assert_allclose(out.physical(), 1j * u.physical(), atol=1e-14)

    def test_reflect_centred_gaussian(self):
        grid = make_grid(1, 32, 8.0)
        arr = _gaussian(grid).physical()
        np.testing.assert_allclose(reflect(arr, 0), arr, atol=1e-15)

    def test_symmetrize_radial_keeps_centred_bump(self):
        grid = make_grid(2, 16, 8.0)
        u = _gaussian(grid)
        np.testing.assert_allclose(symmetrize_radial(u).physical(), u.physical(), atol=1e-14)
        assert radial_defect(u) < 1e-14

    @settings(max_examples=25, deadline=None)
    @given(st.floats(-5.0, 5.0), st.floats(-math.pi, math.pi))
    def test_norms_invariant_under_shift_and_phase(self, a, theta):
        grid = make_grid(1, 64, 16.0)
        u = random_smooth_field(grid, seed=12, decay=3.0)
        moved = shift_and_phase(u, [a], theta)
        for s in (0, 1, 2):
            assert sobolev_norm(moved, s) == pytest.approx(sobolev_norm(u, s), rel=1e-12)

    def test_symmetrize_radial_is_orthogonal_projection(self):
        grid = make_grid(2, 16, 8.0)
        u = random_smooth_field(grid, seed=3, decay=3.0, real=True)
        v = random_smooth_field(grid, seed=4, decay=3.0, real=True)
        Su, Sv = symmetrize_radial(u), symmetrize_radial(v)
        np.testing.assert_allclose(symmetrize_radial(Su).physical(), Su.physical(), atol=1e-14)
        assert radial_defect(Su) < 1e-14
        assert abs(inner_product_l2(u - Su, Sv)) < 1e-12 * sobolev_norm(u, 0) * sobolev_norm(v, 0)

    def test_offcentre_bump_is_not_radial(self):
        grid = make_grid(2, 16, 8.0)
        assert radial_defect(_gaussian(grid, center=1.0)) > 0.1


class TestDiagnostics:
    """Test suite for random fields and resolution diagnostics."""

    def test_random_field_is_seeded(self, grid_1d):
        a = random_smooth_field(grid_1d, seed=11, decay=3.0)
        b = random_smooth_field(grid_1d, seed=11, decay=3.0)
        np.testing.assert_array_equal(a.physical(), b.physical())

    def test_random_field_decay_floor(self, grid_1d):
        with pytest.raises(ValueError, match="decay"):
            random_smooth_field(grid_1d, seed=0, decay=1.0)

    def test_band_limited_field_is_grid_independent(self):
        coarse = random_smooth_field(make_grid(1, 32, 2 * math.pi), seed=5, decay=3.0, modes=8, real=True)
        fine = random_smooth_field(make_grid(1, 64, 2 * math.pi), seed=5, decay=3.0, modes=8, real=True)
        np.testing.assert_allclose(fine.physical()[::2], coarse.physical(), atol=1e-13)
        assert sobolev_norm(fine, 1) == pytest.approx(sobolev_norm(coarse, 1), rel=1e-12)

    def test_coarse_grid_holds_band_truncation(self):
        coarse = random_smooth_field(make_grid(1, 32, 2 * math.pi), seed=9, decay=3.0, modes=64)
        fine = random_smooth_field(make_grid(1, 64, 2 * math.pi), seed=9, decay=3.0, modes=64)
        k = fine.grid.k_axis
        band = np.where((k >= -16) & (k < 16), fine.fourier(), 0.0)
        truncated = Field.from_fourier(fine.grid, band)
        np.testing.assert_allclose(truncated.physical()[::2], coarse.physical(), atol=1e-13)
        # the fine grid carries modes the coarse one cannot hold
        assert sobolev_norm(fine, 1) > sobolev_norm(coarse, 1)

    def test_random_field_modes_must_be_even(self, grid_1d):
        with pytest.raises(ValueError, match="even"):
            random_smooth_field(grid_1d, seed=0, decay=3.0, modes=7)

    def test_spectral_tail_of_resolved_bump(self):
        grid = make_grid(1, 128, 20.0)
        assert spectral_tail(_gaussian(grid)) < 1e-20

    def test_boundary_amplitude(self):
        grid = make_grid(1, 128, 20.0)
        assert boundary_amplitude(_gaussian(grid)) < 1e-40
        assert boundary_amplitude(Field.from_physical(grid, np.ones(grid.shape))) == 1.0

    def test_dealias_mask(self):
        grid = make_grid(1, 32, 2 * math.pi)
        x = grid.x[0]
        u = Field.from_physical(grid, np.cos(2 * x) + np.cos(12 * x), real=True)
        out = dealias(u, 0.5)
        assert out.real
        np.testing.assert_allclose(out.physical(), np.cos(2 * x), atol=1e-13)
