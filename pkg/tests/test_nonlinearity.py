"""
Tests for the focusing nonlinearities.

Validates:
- Admissibility rules per dimension
- Energies and first derivatives
- Linearizations against finite differences
- Hartree kernel table, Coulomb potential and self-energy of a Gaussian
- Multilinear and remainder estimates
"""

import math

import numpy as np
import pytest

from hnls.errors import AdmissibilityError, FieldError
from hnls.numerics.nonlinearity import (
    Hartree3D,
    PowerNLS,
    hartree_kernel,
    hartree_potential,
    make_nonlinearity,
    multilinear_ratio,
    nminus,
    nplus,
    nprime,
    potential_energy,
    remainder_ratio,
)
from hnls.numerics.spectral_core import Field, make_grid, random_smooth_field


@pytest.fixture(scope="module")
def wide_grid_3d():
    return make_grid(3, 64, 20.0)


def _bump(grid, width=1.0):
    r_sq = sum(x ** 2 for x in grid.x)
    return Field.from_physical(grid, np.exp(-0.5 * r_sq / width ** 2), real=True)


class TestAdmissibility:
    """Test suite for the subcriticality rules."""

    def test_power_any_k_in_low_dimension(self):
        for d in (1, 2):
            make_nonlinearity("power", d, k=3)

    def test_power_cubic_only_in_3d(self):
        make_nonlinearity("power", 3, k=1)
        with pytest.raises(AdmissibilityError, match="k = 1 for d = 3"):
            make_nonlinearity("power", 3, k=2)

    def test_hartree_needs_3d(self):
        with pytest.raises(AdmissibilityError, match="requires d = 3"):
            make_nonlinearity("hartree", 1)

    def test_unknown_kind(self):
        with pytest.raises(AdmissibilityError, match="unknown"):
            make_nonlinearity("quintic", 1)

    def test_power_exponent(self):
        assert PowerNLS(k=2).p == 5
        assert Hartree3D().p == 3

    def test_bad_k(self):
        with pytest.raises(AdmissibilityError):
            PowerNLS(k=0)


class TestPower:
    """Test suite for |u|^{2k} u."""

    def test_energy_of_constant(self, grid_1d):
        u = Field.from_physical(grid_1d, np.ones(grid_1d.shape), real=True)
        assert potential_energy(u, PowerNLS(k=1)) == pytest.approx(2 * math.pi / 4)

    def test_nprime_and_linearizations(self, grid_1d):
        u = _bump(grid_1d)
        g = random_smooth_field(grid_1d, seed=1, decay=3.0, real=True)
        arr, garr = u.physical(), g.physical()
        kind = PowerNLS(k=1)
        np.testing.assert_allclose(nprime(u, kind).physical(), arr ** 3)
        np.testing.assert_allclose(nplus(u, g, kind).physical(), 3 * arr ** 2 * garr)
        np.testing.assert_allclose(nminus(u, g, kind).physical(), arr ** 2 * garr)

    def test_nminus_of_u_is_nprime(self, grid_1d):
        u = _bump(grid_1d)
        kind = PowerNLS(k=2)
        np.testing.assert_allclose(nminus(u, u, kind).physical(), nprime(u, kind).physical(), rtol=1e-14)

    def test_complex_point_rejected(self, grid_1d):
        u = Field.from_physical(grid_1d, 1j * np.ones(grid_1d.shape))
        with pytest.raises(FieldError, match="real"):
            nplus(u, u, PowerNLS(k=1))

    def test_energy_is_gauge_invariant(self, grid_1d):
        u = random_smooth_field(grid_1d, seed=2, decay=3.0)
        kind = PowerNLS(k=1)
        rotated = u * complex(math.cos(0.7), math.sin(0.7))
        assert potential_energy(rotated, kind) == pytest.approx(potential_energy(u, kind), rel=1e-13)


class TestHartree:
    """Test suite for the truncated Coulomb term in 3D."""

    def test_kernel_table(self, grid_3d):
        K = hartree_kernel(grid_3d)
        R = grid_3d.box / 2
        assert K[0, 0, 0] == pytest.approx(2 * math.pi * R ** 2)
        assert np.all(K >= 0)
        # first nonzero mode: 8 pi sin^2(R/2) / 1
        assert K[1, 0, 0] == pytest.approx(8 * math.pi * math.sin(0.5 * R) ** 2)

    def test_kernel_needs_3d(self, grid_1d):
        with pytest.raises(AdmissibilityError):
            hartree_kernel(grid_1d)

    def test_energy_positive(self, grid_3d):
        assert potential_energy(_bump(grid_3d, 0.8), Hartree3D()) > 0

    def test_nminus_of_u_is_nprime(self, grid_3d):
        u = _bump(grid_3d, 0.8)
        kind = Hartree3D()
        np.testing.assert_allclose(nminus(u, u, kind).physical(), nprime(u, kind).physical(), rtol=1e-12)

    def test_potential_of_constant_density(self, grid_3d):
        rho = Field.from_physical(grid_3d, np.ones(grid_3d.shape), real=True)
        V = hartree_potential(rho)
        R = grid_3d.box / 2
        # only the zero mode survives: 2 pi R^2 * 1
        np.testing.assert_allclose(V.physical(), 2 * math.pi * R ** 2, rtol=1e-12)

    def test_potential_of_gaussian_density(self, wide_grid_3d):
        # unit mass, sigma = 0.7: V(r) = erf(r / (sqrt(2) sigma)) / r while |x| + support < L/2
        sigma = 0.7
        grid = wide_grid_3d
        r_sq = sum(x ** 2 for x in grid.x)
        rho = Field.from_physical(grid, np.exp(-0.5 * r_sq / sigma ** 2) / (2 * math.pi * sigma ** 2) ** 1.5,
                                  real=True)
        V = hartree_potential(rho).physical()
        centre = grid.n // 2
        for m in (8, 12, 16):
            r = m * grid.dx
            expected = math.erf(r / (math.sqrt(2.0) * sigma)) / r
            assert V[centre + m, centre, centre] == pytest.approx(expected, rel=1e-8)
        assert V[centre, centre, centre] == pytest.approx(math.sqrt(2.0 / math.pi) / sigma, rel=1e-8)

    def test_gaussian_self_energy(self, wide_grid_3d):
        # |u|^2 a unit-mass Gaussian: N(u) = (1/4) int int rho rho / |x - y| = 1 / (4 sigma sqrt(pi))
        sigma = 0.7
        grid = wide_grid_3d
        r_sq = sum(x ** 2 for x in grid.x)
        rho = np.exp(-0.5 * r_sq / sigma ** 2) / (2 * math.pi * sigma ** 2) ** 1.5
        u = Field.from_physical(grid, np.sqrt(rho), real=True)
        expected = 1.0 / (4.0 * sigma * math.sqrt(math.pi))
        assert potential_energy(u, Hartree3D()) == pytest.approx(expected, rel=1e-8)

    @pytest.mark.parametrize("kind", [PowerNLS(k=1), Hartree3D()], ids=["power", "hartree"])
    def test_nplus_is_derivative_of_nprime(self, grid_3d, kind):
        u = _bump(grid_3d, 0.8)
        g = random_smooth_field(grid_3d, seed=4, decay=3.0, modes=4, real=True)
        t = 1e-5
        plus = nprime(u + g * t, kind).physical()
        minus = nprime(u - g * t, kind).physical()
        fd = (plus - minus) / (2 * t)
        exact = nplus(u, g, kind).physical()
        assert np.max(np.abs(fd - exact)) < 1e-7 * max(1.0, float(np.max(np.abs(exact))))


@pytest.mark.parametrize("kind,dim", [(PowerNLS(k=1), 1), (PowerNLS(k=2), 1), (Hartree3D(), 3)],
                         ids=["cubic", "quintic", "hartree"])
class TestIdentities:
    """Test suite for homogeneity and symmetry identities."""

    def _grid(self, dim):
        return make_grid(dim, 64 if dim == 1 else 16, 2 * math.pi)

    def test_pairing_is_p_plus_one_energy(self, kind, dim):
        grid = self._grid(dim)
        u = random_smooth_field(grid, seed=5, decay=3.0, real=True)
        pairing = float(np.sum(nprime(u, kind).physical() * u.physical()) * grid.dv)
        assert pairing == pytest.approx((kind.p + 1) * potential_energy(u, kind), rel=1e-10)

    def test_nplus_of_u_is_p_nprime(self, kind, dim):
        u = random_smooth_field(self._grid(dim), seed=6, decay=3.0, real=True)
        np.testing.assert_allclose(nplus(u, u, kind).physical(), kind.p * nprime(u, kind).physical(),
                                   rtol=1e-10, atol=1e-12)

    def test_nplus_is_symmetric(self, kind, dim):
        grid = self._grid(dim)
        u = random_smooth_field(grid, seed=7, decay=3.0, real=True)
        g = random_smooth_field(grid, seed=8, decay=3.0, real=True)
        h = random_smooth_field(grid, seed=9, decay=3.0, real=True)
        lhs = float(np.sum(nplus(u, g, kind).physical() * h.physical()))
        rhs = float(np.sum(g.physical() * nplus(u, h, kind).physical()))
        assert lhs == pytest.approx(rhs, rel=1e-10)


class TestEstimates:
    """Test suite for the multilinear and remainder ratios."""

    def test_wrong_arity(self, grid_1d):
        f = _bump(grid_1d)
        with pytest.raises(ValueError, match="takes 3 fields"):
            multilinear_ratio([f, f], PowerNLS(k=1))

    def test_ratio_is_scale_invariant(self, grid_1d):
        fields = [random_smooth_field(grid_1d, seed=s, decay=3.0, real=True) for s in (1, 2, 3)]
        kind = PowerNLS(k=1)
        base = multilinear_ratio(fields, kind)
        scaled = multilinear_ratio([fields[0] * 3.0, fields[1], fields[2] * 0.5], kind)
        assert scaled == pytest.approx(base, rel=1e-12)

    def test_hartree_ratio_finite(self, grid_3d):
        fields = [random_smooth_field(grid_3d, seed=s, decay=3.0, modes=4, real=True) for s in (1, 2, 3)]
        value = multilinear_ratio(fields, Hartree3D())
        assert math.isfinite(value) and value > 0

    def test_remainder_shrinks_linearly(self, grid_1d):
        u = _bump(grid_1d)
        direction = random_smooth_field(grid_1d, seed=9, decay=3.0, modes=16, real=True)
        kind = PowerNLS(k=1)
        small = remainder_ratio(u, direction * 1e-3, kind)
        large = remainder_ratio(u, direction * 1e-2, kind)
        assert small / large == pytest.approx(0.1, rel=0.1)
