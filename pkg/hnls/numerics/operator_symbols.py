# hnls/numerics/operator_symbols.py
"""
Dispersion symbols p(xi) and their symbol-level checks.

Every symbol is an immutable value object with
  - values(xi)   : evaluate on a tuple of (broadcastable) wavenumber arrays
  - on_grid(grid): lattice table, cached per (symbol, grid)
All symbols are real, even and vanish at xi = 0.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from functools import lru_cache
from typing import ClassVar, Dict, List, Optional, Sequence, Tuple

import numpy as np

from hnls.errors import SymbolError
from hnls.numerics.spectral_core import GridSpec

MAX_RELATIVISTIC_ORDER = 20


def _xi_sq(xi: Sequence[np.ndarray]) -> np.ndarray:
    out = 0.0
    for component in xi:
        out = out + np.asarray(component, dtype=float) ** 2
    return np.asarray(out)


@lru_cache(maxsize=64)
def _lattice_table(symbol: "DispersionSymbol", grid: GridSpec) -> np.ndarray:
    values = np.broadcast_to(symbol.values(grid.xi), grid.shape).astype(float)
    values.setflags(write=False)
    return values


class DispersionSymbol:
    kind: ClassVar[str] = "abstract"

    def values(self, xi: Sequence[np.ndarray]) -> np.ndarray:
        raise NotImplementedError

    def on_grid(self, grid: GridSpec) -> np.ndarray:
        return _lattice_table(self, grid)

    def leading_sign_ok(self, grid: GridSpec) -> bool:
        """Sign of the highest-order part; positive means bounded below at large |xi|."""
        return True

    def describe(self) -> Dict:
        out = {"kind": self.kind}
        out.update(asdict(self))
        return out


@dataclass(frozen=True)
class Laplacian(DispersionSymbol):
    kind: ClassVar[str] = "laplacian"

    def values(self, xi):
        return _xi_sq(xi)


@dataclass(frozen=True)
class HigherOrderRadial(DispersionSymbol):
    """
    p(xi) = |xi|^2 + sum_{j>=2} a_j eps^(2j-2) |xi|^(2j),
    with coefficients = (a_2, a_3, ...).
    """

    kind: ClassVar[str] = "higher_order_radial"
    eps: float
    coefficients: Tuple[float, ...] = (1.0,)

    def __post_init__(self):
        if self.eps < 0:
            raise SymbolError(f"eps must be >= 0, got {self.eps}")
        object.__setattr__(self, "coefficients", tuple(float(a) for a in self.coefficients))

    @property
    def order(self) -> int:
        """Highest derivative order 2j carried by the symbol."""
        return 2 * (len(self.coefficients) + 1)

    def values(self, xi):
        s = _xi_sq(xi)
        out = s.copy()
        for j, a in enumerate(self.coefficients, start=2):
            out = out + a * self.eps ** (2 * j - 2) * s ** j
        return out

    def leading_sign_ok(self, grid=None) -> bool:
        for a in reversed(self.coefficients):
            if a != 0.0 and self.eps > 0:
                return a > 0
        return True


@dataclass(frozen=True)
class HigherOrderAniso(DispersionSymbol):
    """
    p(xi) = |xi|^2 + sum_alpha c_alpha eps^(|alpha|-2) xi^alpha
    over even total orders |alpha| >= 4.
    """

    kind: ClassVar[str] = "higher_order_aniso"
    eps: float
    terms: Tuple[Tuple[Tuple[int, ...], float], ...] = ()

    def __post_init__(self):
        if self.eps < 0:
            raise SymbolError(f"eps must be >= 0, got {self.eps}")
        clean = []
        for alpha, coeff in self.terms:
            alpha = tuple(int(a) for a in alpha)
            if any(a < 0 for a in alpha):
                raise SymbolError(f"multi-index {alpha} has negative entries")
            order = sum(alpha)
            if order % 2:
                raise SymbolError(f"odd-order term |alpha|={order} is not supported")
            if order < 4:
                raise SymbolError(f"higher-order terms need |alpha| >= 4, got {order}")
            clean.append((alpha, float(coeff)))
        object.__setattr__(self, "terms", tuple(clean))

    def _monomial(self, xi, alpha):
        if len(alpha) != len(xi):
            raise SymbolError(f"multi-index {alpha} does not match dimension {len(xi)}")
        out = 1.0
        for component, power in zip(xi, alpha):
            if power:
                out = out * np.asarray(component, dtype=float) ** power
        return out

    def values(self, xi):
        out = _xi_sq(xi)
        for alpha, coeff in self.terms:
            out = out + coeff * self.eps ** (sum(alpha) - 2) * self._monomial(xi, alpha)
        return out

    def leading_sign_ok(self, grid: GridSpec) -> bool:
        if self.eps == 0 or not self.terms:
            return True
        top = max(sum(alpha) for alpha, _ in self.terms)
        s = np.broadcast_to(grid.xi_sq, grid.shape)
        part = np.zeros(grid.shape)
        for alpha, coeff in self.terms:
            if sum(alpha) == top:
                part = part + coeff * np.broadcast_to(self._monomial(grid.xi, alpha), grid.shape)
        nonzero = s > 0
        return bool(np.min(part[nonzero] / s[nonzero] ** (top // 2)) > 0)


def relativistic_coefficients(J: int) -> List[float]:
    """alpha_j = (2j-2)! / (j! (j-1)! 2^(2j-1)) for j = 1..J."""
    if isinstance(J, bool) or not 1 <= int(J) <= MAX_RELATIVISTIC_ORDER:
        raise SymbolError(f"J must be in [1, {MAX_RELATIVISTIC_ORDER}], got {J}")
    alphas = [0.5]
    for j in range(1, int(J)):
        alphas.append(alphas[-1] * (2 * j - 1) / (2 * j + 2))
    return alphas


def _check_mass_speed(m: float, c: float) -> None:
    if not (m > 0 and c > 0):
        raise SymbolError(f"m and c must be positive, got m={m}, c={c}")


@dataclass(frozen=True)
class RelativisticTruncation(DispersionSymbol):
    """Order-J Taylor truncation of sqrt(c^2 s + m^2 c^4) - m c^2 in s = |xi|^2."""

    kind: ClassVar[str] = "relativistic_truncation"
    m: float
    c: float
    J: int

    def __post_init__(self):
        _check_mass_speed(self.m, self.c)
        relativistic_coefficients(self.J)

    @property
    def coefficients(self) -> List[float]:
        return [
            (-1) ** (j - 1) * a / (self.m ** (2 * j - 1) * self.c ** (2 * j - 2))
            for j, a in enumerate(relativistic_coefficients(self.J), start=1)
        ]

    def values(self, xi):
        s = _xi_sq(xi)
        out = np.zeros_like(s)
        # Horner in s, highest power first
        for coeff in reversed(self.coefficients):
            out = (out + coeff) * s
        return out

    def leading_sign_ok(self, grid=None) -> bool:
        return self.J % 2 == 1


@dataclass(frozen=True)
class PseudoRelativistic(DispersionSymbol):
    kind: ClassVar[str] = "pseudo_relativistic"
    m: float
    c: float

    def __post_init__(self):
        _check_mass_speed(self.m, self.c)

    def values(self, xi):
        s = _xi_sq(xi)
        rest = self.m * self.c ** 2
        # sqrt(c^2 s + m^2 c^4) - m c^2 without cancellation at small s
        return self.c ** 2 * s / (np.sqrt(self.c ** 2 * s + rest ** 2) + rest)


def eval_symbol(symbol: DispersionSymbol, xi) -> float:
    """Symbol value at a single wavevector (scalar allowed in 1D)."""
    vec = np.atleast_1d(np.asarray(xi, dtype=float))
    if not np.all(np.isfinite(vec)):
        raise ValueError("wavevector must be finite")
    return float(symbol.values(tuple(vec)))


# ---------------------------
# Ellipticity
# ---------------------------
@dataclass(frozen=True)
class EllipticityReport:
    gamma: float
    argmin: Tuple[float, ...]
    leading_sign_ok: bool
    passed: bool

    def to_dict(self) -> Dict:
        return asdict(self)


def ellipticity_gamma(symbol: DispersionSymbol, grid: GridSpec) -> EllipticityReport:
    """Exact lattice infimum of (1 + p) / (1 + |xi|^2)."""
    ratio = (1.0 + symbol.on_grid(grid)) / (1.0 + np.broadcast_to(grid.xi_sq, grid.shape))
    flat = int(np.argmin(ratio))
    idx = np.unravel_index(flat, grid.shape)
    gamma = float(ratio[idx])
    argmin = tuple(float(grid.xi_axis[i]) for i in idx)
    sign_ok = bool(symbol.leading_sign_ok(grid))
    return EllipticityReport(gamma=gamma, argmin=argmin, leading_sign_ok=sign_ok,
                             passed=bool(gamma > 0 and sign_ok))


# ---------------------------
# Symbol-level checks of the relativistic family
# ---------------------------
@dataclass(frozen=True)
class PositivityReport:
    J: int
    m: float
    c: float
    bound_fraction: float
    min_ratio: float
    argmin_xi: float
    passed: bool

    def to_dict(self) -> Dict:
        return asdict(self)


def verify_positivity_lemma(
    m: float,
    c: float,
    k: Optional[int],
    grid: GridSpec,
    J: Optional[int] = None,
    bound_fraction: float = 0.5,
    tol: float = 1e-10,
) -> PositivityReport:
    """
    Scan the odd truncation P^J (J = 2k - 1) against the quadratic floor
    |xi|^2 / (2m) over every nonzero lattice |xi|.

    min_ratio is min P^J / (|xi|^2 / 2m); the check passes when it stays
    above `bound_fraction` (the floor 1/2 is what the sum-splitting argument
    guarantees for every odd J; J = 1 attains ratio 1 exactly).
    """
    if (k is None) == (J is None):
        raise ValueError("give exactly one of k or J")
    if J is None:
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        J = 2 * k - 1
    if J % 2 == 0:
        raise SymbolError(f"truncation order must be odd, got J={J}")
    _check_mass_speed(m, c)
    alphas = relativistic_coefficients(J)
    s = np.unique(np.broadcast_to(grid.xi_sq, grid.shape))
    s = s[s > 0]
    x = s / (m * c) ** 2
    # P^J(s) / (s / 2m) = sum_j (-1)^(j-1) 2 alpha_j x^(j-1)
    ratio = np.zeros_like(x)
    for j in range(J, 0, -1):
        ratio = ratio * x + (-1) ** (j - 1) * 2.0 * alphas[j - 1]
    i = int(np.argmin(ratio))
    min_ratio = float(ratio[i])
    return PositivityReport(J=J, m=float(m), c=float(c), bound_fraction=bound_fraction,
                            min_ratio=min_ratio, argmin_xi=float(math.sqrt(s[i])),
                            passed=bool(min_ratio >= bound_fraction - tol))


@dataclass(frozen=True)
class TaylorRemainderReport:
    J: int
    m: float
    c: float
    s_max: float
    sup_ratio: float
    argmax_s: float
    finite: bool

    def to_dict(self) -> Dict:
        return asdict(self)


def _relativistic_remainder(s: np.ndarray, m: float, c: float, J: int) -> np.ndarray:
    """(sqrt(c^2 s + m^2 c^4) - m c^2) - P^J(s), elementwise."""
    rest = m * c ** 2
    x = s / (m * c) ** 2
    out = np.empty_like(s)
    small = x < 0.5
    if np.any(small):
        # alternating tail of the binomial series; terms shrink like x^j
        xs = x[small]
        alphas = relativistic_coefficients(J)
        alpha = alphas[-1]
        tail = np.zeros_like(xs)
        term_power = xs ** J
        for j in range(J + 1, J + 200):
            alpha = alpha * (2 * j - 3) / (2 * j)
            term_power = term_power * xs
            term = (-1) ** (j - 1) * alpha * term_power
            tail = tail + term
            if np.all(np.abs(term) <= 1e-18 * np.abs(tail)):
                break
        out[small] = rest * tail
    if np.any(~small):
        sl = s[~small]
        exact = PseudoRelativistic(m, c).values((np.sqrt(sl),))
        trunc = RelativisticTruncation(m, c, J).values((np.sqrt(sl),))
        out[~small] = exact - trunc
    return out


def taylor_remainder_ratio(m: float, c: float, J: int, s_max: float,
                           samples: int = 400) -> TaylorRemainderReport:
    """sup_s |P_c(s) - P_c^J(s)| / (s^(J+1) / c^(2J)) over s in (0, s_max]."""
    _check_mass_speed(m, c)
    relativistic_coefficients(J)
    if not s_max > 0:
        raise ValueError(f"s_max must be positive, got {s_max}")
    s = np.geomspace(s_max * 1e-4, s_max, int(samples))
    ratio = np.abs(_relativistic_remainder(s, m, c, J)) / (s ** (J + 1) / c ** (2 * J))
    i = int(np.argmax(ratio))
    sup = float(ratio[i])
    return TaylorRemainderReport(J=int(J), m=float(m), c=float(c), s_max=float(s_max),
                                 sup_ratio=sup, argmax_s=float(s[i]),
                                 finite=bool(math.isfinite(sup)))


def build_symbol(kind: str, **params) -> DispersionSymbol:
    """Construct a symbol from its config name and parameters."""
    if kind == "laplacian":
        return Laplacian()
    if kind == "higher_order_radial":
        return HigherOrderRadial(eps=float(params.get("eps", 0.0)),
                                 coefficients=tuple(params.get("coefficients", (1.0,))))
    if kind == "higher_order_aniso":
        terms = tuple((tuple(alpha), float(coeff)) for alpha, coeff in params.get("terms", ()))
        return HigherOrderAniso(eps=float(params.get("eps", 0.0)), terms=terms)
    if kind == "relativistic_truncation":
        return RelativisticTruncation(m=float(params.get("m", 1.0)), c=float(params["c"]),
                                      J=int(params["J"]))
    if kind == "pseudo_relativistic":
        return PseudoRelativistic(m=float(params.get("m", 1.0)), c=float(params["c"]))
    raise SymbolError(f"unknown symbol kind {kind!r}")
