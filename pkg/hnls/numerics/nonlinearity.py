# hnls/numerics/nonlinearity.py
"""
Focusing nonlinearities: power |u|^{2k} u and the 3D Hartree term
(|x|^{-1} * |u|^2) u, with their energies and linearizations about real u.

Array-level methods on the kind objects are what the solvers call inside
their loops; the Field-level functions at the bottom wrap them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import ClassVar, Optional, Sequence

import numpy as np

from hnls.errors import AdmissibilityError, FieldError
from hnls.numerics.spectral_core import (
    Field,
    GridSpec,
    looks_real,
    sobolev_norm,
)
from hnls.observability import get_logger

logger = get_logger(__name__)

NEGATIVE_DENSITY_TOL = 1e-12


@lru_cache(maxsize=16)
def hartree_kernel(grid: GridSpec, radius: Optional[float] = None) -> np.ndarray:
    """
    Fourier values of |x|^{-1} truncated at |x| = R (default L/2):
    4 pi (1 - cos(R |xi|)) / |xi|^2, continued by 2 pi R^2 at xi = 0.
    """
    if grid.dim != 3:
        raise AdmissibilityError(f"the Hartree term lives in d = 3, got d = {grid.dim}")
    R = 0.5 * grid.box if radius is None else float(radius)
    if not R > 0:
        raise AdmissibilityError(f"truncation radius must be positive, got {R}")
    s = np.broadcast_to(grid.xi_sq, grid.shape)
    k = np.sqrt(s)
    safe = np.where(s > 0, s, 1.0)
    # 1 - cos(t) = 2 sin^2(t/2) keeps the table nonnegative
    table = np.where(s > 0, 8.0 * math.pi * np.sin(0.5 * R * k) ** 2 / safe, 2.0 * math.pi * R ** 2)
    table.setflags(write=False)
    return table


def _convolve(kernel: np.ndarray, rho: np.ndarray) -> np.ndarray:
    # default numpy normalization: (K * rho)(x_j) = ifftn(K_hat . fftn(rho))
    out = np.fft.ifftn(kernel * np.fft.fftn(rho))
    return out.real if np.isrealobj(rho) else out


class NonlinearityKind:
    name: ClassVar[str] = "abstract"

    @property
    def p(self) -> int:
        raise NotImplementedError

    def check_admissible(self, dim: int) -> None:
        raise NotImplementedError

    def energy(self, u: np.ndarray, grid: GridSpec) -> float:
        raise NotImplementedError

    def nprime(self, u: np.ndarray, grid: GridSpec) -> np.ndarray:
        raise NotImplementedError

    def nplus(self, u: np.ndarray, g: np.ndarray, grid: GridSpec) -> np.ndarray:
        raise NotImplementedError

    def nminus(self, u: np.ndarray, g: np.ndarray, grid: GridSpec) -> np.ndarray:
        raise NotImplementedError

    def describe(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class PowerNLS(NonlinearityKind):
    name: ClassVar[str] = "power"
    k: int = 1

    def __post_init__(self):
        if isinstance(self.k, bool) or int(self.k) != self.k or self.k < 1:
            raise AdmissibilityError(f"power nonlinearity needs integer k >= 1, got {self.k}")

    @property
    def p(self) -> int:
        return 2 * self.k + 1

    def check_admissible(self, dim: int) -> None:
        if dim in (1, 2):
            return
        if dim == 3 and self.k == 1:
            return
        raise AdmissibilityError(
            f"power nonlinearity with k={self.k} is not H^1-subcritical in d={dim} "
            "(allowed: any k for d = 1, 2; k = 1 for d = 3)"
        )

    def energy(self, u, grid):
        return float(np.sum(np.abs(u) ** (2 * self.k + 2)) * grid.dv) / (2 * self.k + 2)

    def nprime(self, u, grid):
        return np.abs(u) ** (2 * self.k) * u

    def nplus(self, u, g, grid):
        return (2 * self.k + 1) * u ** (2 * self.k) * g

    def nminus(self, u, g, grid):
        return u ** (2 * self.k) * g

    def describe(self):
        return {"kind": self.name, "k": int(self.k), "p": self.p}


@dataclass(frozen=True)
class Hartree3D(NonlinearityKind):
    name: ClassVar[str] = "hartree"
    truncation_radius: Optional[float] = None

    @property
    def p(self) -> int:
        return 3

    def check_admissible(self, dim: int) -> None:
        if dim != 3:
            raise AdmissibilityError(f"the Hartree nonlinearity requires d = 3, got d = {dim}")

    def kernel(self, grid: GridSpec) -> np.ndarray:
        return hartree_kernel(grid, self.truncation_radius)

    def energy(self, u, grid):
        rho = np.abs(u) ** 2
        return 0.25 * float(np.sum(_convolve(self.kernel(grid), rho) * rho) * grid.dv)

    def nprime(self, u, grid):
        return _convolve(self.kernel(grid), np.abs(u) ** 2) * u

    def nplus(self, u, g, grid):
        K = self.kernel(grid)
        return 2.0 * _convolve(K, u * g) * u + _convolve(K, u * u) * g

    def nminus(self, u, g, grid):
        return _convolve(self.kernel(grid), u * u) * g

    def describe(self):
        return {"kind": self.name, "p": self.p, "truncation_radius": self.truncation_radius}


def make_nonlinearity(kind: str, dim: int, k: int = 1,
                      truncation_radius: Optional[float] = None) -> NonlinearityKind:
    """Build a nonlinearity and enforce its admissibility in dimension `dim`."""
    if kind == "power":
        out: NonlinearityKind = PowerNLS(k=int(k))
    elif kind == "hartree":
        out = Hartree3D(truncation_radius=truncation_radius)
    else:
        raise AdmissibilityError(f"unknown nonlinearity kind {kind!r}")
    out.check_admissible(dim)
    return out


# ---------------------------
# Field-level operations
# ---------------------------
def _real_point(u: Field) -> np.ndarray:
    arr = u.physical()
    if not (u.real or looks_real(arr)):
        raise FieldError("linearization point must be real-valued")
    return np.real(arr)


def potential_energy(u: Field, kind: NonlinearityKind) -> float:
    kind.check_admissible(u.grid.dim)
    return kind.energy(u.physical(), u.grid)


def nprime(u: Field, kind: NonlinearityKind) -> Field:
    kind.check_admissible(u.grid.dim)
    return Field.from_physical(u.grid, kind.nprime(u.physical(), u.grid), real=u.real or None)


def nplus(u: Field, g: Field, kind: NonlinearityKind) -> Field:
    kind.check_admissible(u.grid.dim)
    out = kind.nplus(_real_point(u), g.physical(), u.grid)
    return Field.from_physical(u.grid, out, real=g.real or None)


def nminus(u: Field, g: Field, kind: NonlinearityKind) -> Field:
    kind.check_admissible(u.grid.dim)
    out = kind.nminus(_real_point(u), g.physical(), u.grid)
    return Field.from_physical(u.grid, out, real=g.real or None)


def hartree_potential(rho: Field, radius: Optional[float] = None) -> Field:
    """K * rho for a real density; small negative values are quadrature noise."""
    grid = rho.grid
    K = hartree_kernel(grid, radius)
    arr = np.real(rho.physical())
    floor = float(np.min(arr)) if arr.size else 0.0
    if floor < -NEGATIVE_DENSITY_TOL * max(1.0, float(np.max(np.abs(arr)))):
        logger.warning("hartree.negative_density", min_density=floor)
    return Field.from_physical(grid, _convolve(K, arr), real=True)


def multilinear_ratio(fields: Sequence[Field], kind: NonlinearityKind) -> float:
    """
    Hartree: ||(K * (f1 f2)) f3||_{L^2} / prod ||f_j||_{H^1};
    power:   ||prod f_j||_{L^2}        / prod ||f_j||_{H^1}.
    """
    fields = list(fields)
    arity = 3 if isinstance(kind, Hartree3D) else kind.p
    if len(fields) != arity:
        raise ValueError(f"{kind.name} form takes {arity} fields, got {len(fields)}")
    grid = fields[0].grid
    if any(f.grid != grid for f in fields):
        raise FieldError("fields live on different grids")
    kind.check_admissible(grid.dim)
    arrays = [f.physical() for f in fields]
    if isinstance(kind, Hartree3D):
        product_arr = _convolve(kind.kernel(grid), arrays[0] * arrays[1]) * arrays[2]
    else:
        product_arr = np.ones(grid.shape, dtype=np.result_type(*arrays))
        for arr in arrays:
            product_arr = product_arr * arr
    numerator = math.sqrt(float(np.sum(np.abs(product_arr) ** 2) * grid.dv))
    denominator = 1.0
    for f in fields:
        denominator *= sobolev_norm(f, 1)
    return numerator / denominator


def remainder_ratio(u: Field, r: Field, kind: NonlinearityKind) -> float:
    """||N'(u + r) - N'(u) - N^+_u r||_{L^2} / ||r||_{H^1} for real u."""
    grid = u.grid
    kind.check_admissible(grid.dim)
    base = _real_point(u)
    ra = r.physical()
    diff = kind.nprime(base + ra, grid) - kind.nprime(base, grid) - kind.nplus(base, ra, grid)
    return math.sqrt(float(np.sum(np.abs(diff) ** 2) * grid.dv)) / sobolev_norm(r, 1)
