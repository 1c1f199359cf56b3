# hnls/numerics/spectral_core.py
"""
Periodic pseudospectral calculus on a d-dimensional box [-L/2, L/2)^d.

Normalization, fixed once for the whole package:
  - physical samples u_j live at x_j = -L/2 + j*dx, dx = L/n, and carry the
    quadrature weight dV = (L/n)^d;
  - Fourier coefficients are the unitary DFT, u_hat = fftn(u, norm="ortho"),
    stored in FFT order (k = 0, 1, ..., n/2-1, -n/2, ..., -1 per axis) with
    xi_k = 2*pi*k/L;
  - with that choice  sum |u|^2 dV == sum |u_hat|^2 dV  (Parseval), and every
    weighted norm below is  (sum w(xi) |u_hat|^2 dV)^(1/2).

Fields are immutable; every operation returns a new Field.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from functools import cached_property
from itertools import permutations, product
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.fft as sfft

from hnls.errors import FieldError, GridError, SymbolError

PHYSICAL = "physical"
FOURIER = "fourier"

# Relative size below which an imaginary part counts as rounding noise.
REAL_TOL = 1e-12

FFT_WORKERS = int(os.getenv("HNLS_FFT_WORKERS", "1"))


# ---------------------------
# Grid
# ---------------------------
@dataclass(frozen=True)
class GridSpec:
    """
    Cubic periodic lattice: `dim` axes of `n` points on a box of length `box`.

    Arrays are computed lazily and cached; the grid itself is hashable so it
    can key per-grid caches (kernels, symbol tables).
    """

    dim: int
    n: int
    box: float

    def __post_init__(self):
        if isinstance(self.dim, bool) or self.dim not in (1, 2, 3):
            raise GridError(f"dimension must be 1, 2 or 3, got {self.dim}")
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise GridError(f"points per axis must be an integer, got {self.n!r}")
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise GridError(f"points per axis must be a power of two >= 8, got {self.n}")
        if not (math.isfinite(self.box) and self.box > 0):
            raise GridError(f"box length must be positive, got {self.box}")

    @property
    def shape(self) -> Tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def size(self) -> int:
        return self.n ** self.dim

    @property
    def dx(self) -> float:
        return self.box / self.n

    @property
    def dv(self) -> float:
        return self.dx ** self.dim

    @property
    def dxi(self) -> float:
        return 2.0 * math.pi / self.box

    @cached_property
    def axis(self) -> np.ndarray:
        """Physical sample positions along one axis; index n/2 is the origin."""
        return -0.5 * self.box + self.dx * np.arange(self.n)

    @cached_property
    def xi_axis(self) -> np.ndarray:
        """Wavenumbers along one axis in FFT order."""
        return 2.0 * math.pi * np.fft.fftfreq(self.n, d=self.dx)

    @cached_property
    def k_axis(self) -> np.ndarray:
        """Integer lattice indices along one axis in FFT order."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)

    def _broadcast(self, vec: np.ndarray) -> Tuple[np.ndarray, ...]:
        out = []
        for j in range(self.dim):
            shape = [1] * self.dim
            shape[j] = self.n
            out.append(vec.reshape(shape))
        return tuple(out)

    @cached_property
    def x(self) -> Tuple[np.ndarray, ...]:
        """Broadcastable physical coordinates, one array per axis."""
        return self._broadcast(self.axis)

    @cached_property
    def xi(self) -> Tuple[np.ndarray, ...]:
        """Broadcastable wavenumbers, one array per axis."""
        return self._broadcast(self.xi_axis)

    @cached_property
    def xi_sq(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for component in self.xi:
            out = out + component ** 2
        return out

    @cached_property
    def r_sq(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for component in self.x:
            out = out + component ** 2
        return out

    @cached_property
    def k_max_abs(self) -> np.ndarray:
        """max_j |k_j| per lattice point (integer indices)."""
        out = np.zeros(self.shape, dtype=int)
        for comp in self._broadcast(np.abs(self.k_axis)):
            out = np.maximum(out, comp)
        return out

    @property
    def origin_index(self) -> Tuple[int, ...]:
        return (self.n // 2,) * self.dim

    def wavenumbers(self) -> np.ndarray:
        """Sorted per-axis wavenumbers  2*pi*k/L, k = -n/2 .. n/2-1."""
        return np.sort(self.xi_axis)


def make_grid(d: int, n: int, L: float) -> GridSpec:
    return GridSpec(dim=d, n=n, box=float(L))


# ---------------------------
# Array-level transforms (used inside solver loops)
# ---------------------------
def fft(values: np.ndarray) -> np.ndarray:
    return sfft.fftn(values, norm="ortho", workers=FFT_WORKERS)


def ifft(coeffs: np.ndarray) -> np.ndarray:
    return sfft.ifftn(coeffs, norm="ortho", workers=FFT_WORKERS)


def reflect(arr: np.ndarray, axis: int) -> np.ndarray:
    """
    Index map i -> (n - i) mod n along `axis`. In physical space this is
    x -> -x, in Fourier space xi -> -xi.
    """
    return np.roll(np.flip(arr, axis=axis), 1, axis=axis)


def is_even(arr: np.ndarray, rtol: float = 1e-13) -> bool:
    flipped = arr
    for ax in range(arr.ndim):
        flipped = reflect(flipped, ax)
    scale = max(float(np.max(np.abs(arr))), 1.0)
    return bool(np.max(np.abs(arr - flipped)) <= rtol * scale)


def looks_real(values: np.ndarray) -> bool:
    if not np.iscomplexobj(values):
        return True
    amp = float(np.max(np.abs(values))) if values.size else 0.0
    return float(np.max(np.abs(values.imag))) <= REAL_TOL * max(amp, np.finfo(float).tiny)


# ---------------------------
# Field
# ---------------------------
@dataclass(frozen=True, eq=False)
class Field:
    """
    Samples of a function on `grid`, either in physical or Fourier space.
    `real` marks real-valued functions; in physical space their samples are
    stored as float64.
    """

    grid: GridSpec
    values: np.ndarray
    space: str = PHYSICAL
    real: bool = False

    def __post_init__(self):
        if self.space not in (PHYSICAL, FOURIER):
            raise FieldError(f"unknown space tag {self.space!r}")
        arr = np.asarray(self.values)
        if arr.shape != self.grid.shape:
            raise FieldError(f"field shape {arr.shape} does not match grid {self.grid.shape}")
        if self.real and self.space == PHYSICAL:
            if not looks_real(arr):
                raise FieldError("field tagged real has a non-negligible imaginary part")
            arr = np.array(arr.real, dtype=np.float64)
        else:
            arr = np.array(arr, dtype=np.complex128)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @classmethod
    def from_physical(cls, grid: GridSpec, values, real: Optional[bool] = None) -> "Field":
        """Build a physical field; `real=None` detects real-valuedness."""
        values = np.asarray(values)
        if real is None:
            real = looks_real(values)
        return cls(grid, values, PHYSICAL, bool(real))

    @classmethod
    def from_fourier(cls, grid: GridSpec, coeffs, real: bool = False) -> "Field":
        return cls(grid, np.asarray(coeffs), FOURIER, real)

    @classmethod
    def zeros(cls, grid: GridSpec) -> "Field":
        return cls(grid, np.zeros(grid.shape), PHYSICAL, True)

    def physical(self) -> np.ndarray:
        if self.space == PHYSICAL:
            return self.values
        out = ifft(self.values)
        return out.real if self.real else out

    def fourier(self) -> np.ndarray:
        if self.space == FOURIER:
            return self.values
        return fft(self.values)

    def conj(self) -> "Field":
        return Field.from_physical(self.grid, np.conj(self.physical()), real=self.real)

    # arithmetic happens in physical space
    def _combine(self, other, op) -> "Field":
        if isinstance(other, Field):
            if other.grid != self.grid:
                raise FieldError("fields live on different grids")
            return Field.from_physical(self.grid, op(self.physical(), other.physical()),
                                       real=(self.real and other.real) or None)
        if np.isscalar(other):
            real = self.real and np.isrealobj(other)
            return Field.from_physical(self.grid, op(self.physical(), other), real=real or None)
        return NotImplemented

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def __mul__(self, other):
        if isinstance(other, Field):
            return NotImplemented
        return self._combine(other, np.multiply)

    __rmul__ = __mul__

    def __neg__(self):
        return Field.from_physical(self.grid, -self.physical(), real=self.real)


def _same_grid(u: Field, v: Field) -> None:
    if u.grid != v.grid:
        raise FieldError(f"grid mismatch: {u.grid} vs {v.grid}")


# ---------------------------
# Transforms
# ---------------------------
def to_fourier(field: Field) -> Field:
    if field.space != PHYSICAL:
        raise FieldError("to_fourier expects a physical-space field")
    return Field.from_fourier(field.grid, fft(field.values), real=field.real)


def to_physical(field: Field) -> Field:
    if field.space != FOURIER:
        raise FieldError("to_physical expects a Fourier-space field")
    out = ifft(field.values)
    return Field.from_physical(field.grid, out.real if field.real else out, real=field.real)


def transform(field: Field, direction: str) -> Field:
    """direction is "forward" (physical -> Fourier) or "inverse"."""
    if direction == "forward":
        return to_fourier(field)
    if direction == "inverse":
        return to_physical(field)
    raise ValueError(f"unknown transform direction {direction!r}")


# ---------------------------
# Multipliers and norms
# ---------------------------
SymbolLike = Union[np.ndarray, Callable, object]


def symbol_on_grid(symbol: SymbolLike, grid: GridSpec) -> np.ndarray:
    """
    Resolve a symbol to its lattice values. Accepts an array, an object with
    `on_grid(grid)`, or a callable taking the tuple of wavenumber arrays.
    """
    if isinstance(symbol, np.ndarray):
        values = symbol
    elif hasattr(symbol, "on_grid"):
        values = symbol.on_grid(grid)
    elif callable(symbol):
        values = symbol(grid.xi)
    else:
        raise SymbolError(f"cannot evaluate symbol of type {type(symbol).__name__}")
    values = np.broadcast_to(np.asarray(values), grid.shape)
    if not np.all(np.isfinite(values)):
        raise SymbolError("symbol has non-finite values on the lattice")
    return values


def apply_multiplier(field: Field, symbol_fn: SymbolLike) -> Field:
    """Multiply the Fourier coefficients of `field` by a real symbol."""
    sym = symbol_on_grid(symbol_fn, field.grid)
    if np.iscomplexobj(sym):
        if np.max(np.abs(sym.imag)) > 0:
            raise SymbolError("multiplier symbols must be real-valued")
        sym = sym.real
    coeffs = sym * field.fourier()
    real = field.real and is_even(np.asarray(sym))
    out = Field.from_fourier(field.grid, coeffs, real=real)
    return out if field.space == FOURIER else to_physical(out)


def derivative(field: Field, axis: int) -> Field:
    """Spectral d/dx_axis; the unpaired Nyquist mode is dropped."""
    grid = field.grid
    k = grid._broadcast(grid.k_axis)[axis]
    mult = np.where(np.abs(k) == grid.n // 2, 0.0, 1j * grid.xi[axis])
    coeffs = mult * field.fourier()
    out = ifft(np.broadcast_to(coeffs, grid.shape))
    return Field.from_physical(grid, out.real if field.real else out, real=field.real or None)


def _weighted_sum(u_hat: np.ndarray, v_hat: np.ndarray, weight, dv: float) -> complex:
    return complex(np.sum(weight * u_hat * np.conj(v_hat)) * dv)


def inner_product_hp(u: Field, v: Field, symbol: SymbolLike) -> complex:
    """<u, v>_{H^1_P} = sum (1 + p(xi)) u_hat conj(v_hat) dV."""
    _same_grid(u, v)
    weight = 1.0 + symbol_on_grid(symbol, u.grid)
    return _weighted_sum(u.fourier(), v.fourier(), weight, u.grid.dv)


def norm_hp(u: Field, symbol: SymbolLike) -> float:
    return math.sqrt(max(inner_product_hp(u, u, symbol).real, 0.0))


def dual_norm_hp(f: Field, symbol: SymbolLike) -> float:
    """Norm in H^{-1}_P, the dual of H^1_P: weight (1 + p)^{-1}."""
    weight = 1.0 / (1.0 + symbol_on_grid(symbol, f.grid))
    return math.sqrt(max(_weighted_sum(f.fourier(), f.fourier(), weight, f.grid.dv).real, 0.0))


def inner_product_l2(u: Field, v: Field) -> complex:
    _same_grid(u, v)
    return complex(np.sum(u.physical() * np.conj(v.physical())) * u.grid.dv)


def sobolev_norm(u: Field, s: float) -> float:
    """(sum (1 + |xi|^2)^s |u_hat|^2 dV)^(1/2)."""
    if s < -2:
        raise ValueError(f"Sobolev index must be >= -2, got {s}")
    weight = (1.0 + u.grid.xi_sq) ** s
    u_hat = u.fourier()
    return math.sqrt(float(np.sum(weight * np.abs(u_hat) ** 2) * u.grid.dv))


# ---------------------------
# Symmetry operations
# ---------------------------
def shift_and_phase(u: Field, a, theta: float) -> Field:
    """e^{i theta} u(x - a); sub-grid shifts through Fourier phases."""
    grid = u.grid
    shift = np.atleast_1d(np.asarray(a, dtype=float))
    if shift.shape != (grid.dim,):
        raise ValueError(f"shift must have {grid.dim} components, got {shift.shape}")
    phase = np.zeros(grid.shape)
    for j in range(grid.dim):
        phase = phase + grid.xi[j] * shift[j]
    coeffs = np.exp(1j * theta) * np.exp(-1j * phase) * u.fourier()
    return Field.from_physical(grid, ifft(coeffs))


def symmetry_images(arr: np.ndarray):
    dim = arr.ndim
    for perm in permutations(range(dim)):
        moved = np.transpose(arr, perm)
        for flips in product((False, True), repeat=dim):
            image = moved
            for ax, flip in enumerate(flips):
                if flip:
                    image = reflect(image, ax)
            yield image


def symmetrize_array(arr: np.ndarray) -> np.ndarray:
    """Average of a real array over the hyperoctahedral group of the grid."""
    acc = np.zeros_like(arr)
    count = 0
    for image in symmetry_images(arr):
        acc += image
        count += 1
    return acc / count


def symmetrize_radial(u: Field) -> Field:
    """
    Orthogonal projection onto real fields invariant under axis
    permutations and sign flips about the origin.
    """
    return Field.from_physical(u.grid, symmetrize_array(np.real(u.physical())), real=True)


def radial_defect(u: Field) -> float:
    """||u - S u||_{L^2} / ||u||_{L^2} with S = symmetrize_radial."""
    total = sobolev_norm(u, 0)
    if total == 0.0:
        return 0.0
    diff = u.physical() - symmetrize_radial(u).physical()
    return math.sqrt(float(np.sum(np.abs(diff) ** 2) * u.grid.dv)) / total


# ---------------------------
# Test inputs and diagnostics
# ---------------------------
def random_smooth_field(
    grid: GridSpec,
    seed: int,
    decay: float,
    modes: Optional[int] = None,
    real: bool = False,
) -> Field:
    """
    Seeded field with continuum Fourier coefficients of magnitude
    (1 + |xi|^2)^(-decay/2) and uniform random phases.

    With `modes` set, the integer wavenumbers -modes/2 .. modes/2-1 per axis
    are drawn and the same seed gives the same coefficients on every grid of
    the same box. A grid with n < modes keeps only the wavenumbers it can
    represent, so it holds the band truncation of the field drawn on a finer
    grid.
    """
    if decay <= grid.dim / 2 + 1:
        raise ValueError(f"decay must exceed d/2 + 1 = {grid.dim / 2 + 1}, got {decay}")
    rng = np.random.default_rng(seed)
    scale = math.sqrt(grid.size)
    if modes is None:
        phases = rng.uniform(0.0, 2.0 * math.pi, size=grid.shape)
        coeffs = (1.0 + grid.xi_sq) ** (-decay / 2) * np.exp(1j * phases)
    else:
        if modes < 2 or modes % 2:
            raise ValueError(f"modes must be an even number >= 2, got {modes}")
        phases = rng.uniform(0.0, 2.0 * math.pi, size=(modes,) * grid.dim)
        k_draw = np.fft.fftfreq(modes, d=1.0 / modes).astype(int)
        half = grid.n // 2
        kept = np.nonzero((k_draw >= -half) & (k_draw < half))[0]
        phases = phases[np.ix_(*([kept] * grid.dim))]
        index = np.ix_(*([k_draw[kept] % grid.n] * grid.dim))
        coeffs = np.zeros(grid.shape, dtype=np.complex128)
        coeffs[index] = (1.0 + grid.xi_sq[index]) ** (-decay / 2) * np.exp(1j * phases)
    values = ifft(scale * coeffs)
    if real:
        return Field.from_physical(grid, values.real, real=True)
    return Field.from_physical(grid, values, real=False)


def spectral_tail(u: Field, fraction: float = 2.0 / 3.0) -> float:
    """Share of sum |u_hat|^2 carried by modes with max_j |k_j| > fraction * n/2."""
    power = np.abs(u.fourier()) ** 2
    total = float(np.sum(power))
    if total == 0.0:
        return 0.0
    mask = u.grid.k_max_abs > fraction * (u.grid.n // 2)
    return float(np.sum(power[mask])) / total


def dealias(u: Field, fraction: float) -> Field:
    """Zero every mode with max_j |k_j| > fraction * n/2."""
    keep = u.grid.k_max_abs <= fraction * (u.grid.n // 2)
    out = Field.from_fourier(u.grid, np.where(keep, u.fourier(), 0.0), real=u.real)
    return out if u.space == FOURIER else to_physical(out)


def boundary_amplitude(u: Field) -> float:
    """max |u| on the box faces divided by max |u|."""
    arr = np.abs(u.physical())
    peak = float(np.max(arr))
    if peak == 0.0:
        return 0.0
    face = max(float(np.max(np.take(arr, 0, axis=ax))) for ax in range(arr.ndim))
    return face / peak
