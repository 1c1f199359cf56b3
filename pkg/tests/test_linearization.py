"""
Tests for the linearized operators about the 1D soliton.

Validates:
- Symmetry directions are numerical kernel elements
- Symmetry and positivity of A
- Inertia of L^+ and L^- and the non-degeneracy constant
- Argument validation
"""

import numpy as np
import pytest

from hnls.config import SpectrumConfig
from hnls.errors import FieldError
from hnls.numerics.linearization import (
    Linearization,
    apply_A,
    beta_estimate,
    kernel_residuals,
    pde_residual,
    tail_eigenvalue,
)
from hnls.numerics.nonlinearity import PowerNLS
from hnls.numerics.operator_symbols import Laplacian
from hnls.numerics.spectral_core import Field, inner_product_l2, random_smooth_field

CUBIC = PowerNLS(k=1)
SMALL = SpectrumConfig(n_eigs=4, tail_index=0)


@pytest.fixture(scope="module")
def spectra(soliton):
    return {sign: beta_estimate(sign, soliton.Q, Laplacian(), CUBIC, cfg=SMALL, seed=0) for sign in "+-"}


class TestKernel:
    """Test suite for the symmetry-generated kernel."""

    def test_residuals(self, soliton):
        report = kernel_residuals(soliton.Q, Laplacian(), CUBIC)
        assert report.is_solution
        assert report.pde_residual < 1e-8
        assert [row["candidate"] for row in report.rows] == ["d1u", "u"]
        assert all(row["residual"] < 1e-6 for row in report.rows)

    def test_non_solution_is_flagged(self, soliton):
        report = kernel_residuals(soliton.Q * 1.1, Laplacian(), CUBIC)
        assert not report.is_solution
        assert pde_residual(soliton.Q * 1.1, Laplacian(), CUBIC) > 1e-3


class TestOperatorA:
    """Test suite for the conjugated linearization."""

    @pytest.mark.parametrize("sign", ["+", "-"])
    def test_symmetric_and_nonnegative(self, soliton, sign):
        grid = soliton.Q.grid
        g = random_smooth_field(grid, seed=1, decay=3.0, modes=32, real=True)
        h = random_smooth_field(grid, seed=2, decay=3.0, modes=32, real=True)
        Ag = apply_A(sign, soliton.Q, g, Laplacian(), CUBIC)
        Ah = apply_A(sign, soliton.Q, h, Laplacian(), CUBIC)
        lhs = inner_product_l2(h, Ag).real
        rhs = inner_product_l2(Ah, g).real
        assert lhs == pytest.approx(rhs, rel=1e-12)
        assert inner_product_l2(g, Ag).real >= 0

    @pytest.mark.parametrize("sign", ["+", "-"])
    def test_factorization(self, soliton, sign):
        # <L g, g> = <(Id - A) v, v> with v = sqrt(1 + P) g
        op = Linearization(sign, soliton.Q, Laplacian(), CUBIC)
        g = random_smooth_field(soliton.Q.grid, seed=4, decay=3.0, modes=32, real=True).physical()
        v = op.multiplier(g, op.root)
        lhs = float(np.sum(op.apply_L(g) * g))
        rhs = float(np.sum((v - op.apply_A(v)) * v))
        assert lhs == pytest.approx(rhs, rel=1e-10)

    def test_minus_fixes_u(self, soliton):
        # N^-_u u = N'(u) and (P + 1) u = N'(u), so L^- u = 0
        op = Linearization("-", soliton.Q, Laplacian(), CUBIC)
        assert op.dual_norm(op.apply_L(op.u)) / op.hp_norm(op.u) < 1e-9

    def test_bad_sign(self, soliton):
        with pytest.raises(ValueError, match="sign"):
            Linearization("0", soliton.Q, Laplacian(), CUBIC)

    def test_complex_point_rejected(self, soliton):
        u = Field.from_physical(soliton.Q.grid, 1j * soliton.Q.physical())
        with pytest.raises(FieldError, match="real"):
            Linearization("+", u, Laplacian(), CUBIC)


class TestBetaEstimate:
    """Test suite for the eigenvalues nearest zero."""

    def test_inertia(self, spectra):
        assert spectra["+"].negative_count == 1
        assert spectra["-"].negative_count == 0

    def test_spectral_gap(self, spectra):
        for report in spectra.values():
            assert report.beta > report.kernel_tol
            assert report.non_degenerate
            assert len(report.eigenvalues) == 4
            assert report.eigenvalues == sorted(report.eigenvalues)

    def test_kernel_rayleigh_quotients(self, spectra):
        for report in spectra.values():
            assert all(abs(x) < report.kernel_tol for x in report.kernel_eigenvalues)
            assert all(r < 1e-6 for r in report.kernel_residuals)

    def test_eigenvectors_avoid_kernel(self, spectra):
        for report in spectra.values():
            assert report.deflation_overlap < 1e-6

    def test_too_few_eigenvalues(self, soliton):
        with pytest.raises(ValueError, match="d \\+ 2"):
            beta_estimate("+", soliton.Q, Laplacian(), CUBIC, n_eigs=2, cfg=SMALL)

    def test_tail_eigenvalue_is_small(self, soliton, spectra):
        tail = tail_eigenvalue("+", soliton.Q, Laplacian(), CUBIC, 6)
        assert -1e-10 < tail < 1.0 - spectra["+"].eigenvalues[-1] + 1e-8
