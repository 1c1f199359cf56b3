# hnls/numerics/contraction.py
"""
Radial real solutions near a base ground state Q0 by contraction.

With B the base symbol (Laplacian by default) and P the target symbol,
u = Q0 + r solves (P + 1) u = N'(u) iff r is a fixed point of

    Phi(r) = L^{-1} [ -R(Q0) + N'(Q0 + r) - N'(Q0) - N^+_{Q0} r ],
    L = P + 1 - N^+_{Q0},   R(Q0) = (P + 1) Q0 - N'(Q0),

and -R(Q0) = (B - P) Q0 whenever Q0 solves the base problem. L is inverted
on the radial real subspace with preconditioned MINRES.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator, minres

from hnls.config import ContractionConfig
from hnls.errors import DivergenceError, FieldError, InvertibilityError, SymbolError
from hnls.numerics.linearization import Linearization
from hnls.numerics.nonlinearity import NonlinearityKind
from hnls.numerics.operator_symbols import DispersionSymbol, Laplacian
from hnls.numerics.spectral_core import (
    Field,
    fft,
    radial_defect,
    symbol_on_grid,
    symmetrize_array,
    symmetry_images,
)
from hnls.observability import get_logger

logger = get_logger(__name__)

RADIAL_TOL = 1e-8


def apply_L(sign: str, u: Field, g: Field, symbol, kind: NonlinearityKind) -> Field:
    """(P + 1) g - N^{sign}_u g."""
    op = Linearization(sign, u, symbol, kind)
    if g.grid != u.grid:
        raise FieldError("g lives on a different grid")
    return Field.from_physical(u.grid, op.apply_L(g.physical()), real=g.real or None)


def _dual_norm(f: np.ndarray, weight: np.ndarray, dv: float) -> float:
    return math.sqrt(float(np.sum(np.abs(fft(f)) ** 2 / weight) * dv))


def _hp_norm(g: np.ndarray, weight: np.ndarray, dv: float) -> float:
    return math.sqrt(float(np.sum(weight * np.abs(fft(g)) ** 2) * dv))


def _check_symmetric_symbol(values: np.ndarray) -> None:
    scale = max(1.0, float(np.max(np.abs(values))))
    for image in symmetry_images(values):
        if np.max(np.abs(image - values)) > 1e-12 * scale:
            raise SymbolError("symbol must be invariant under axis permutations and reflections "
                              "to act on the radial subspace")


def delta_epsilon(symbol, Q0: Field, beta0: Optional[float], base=None) -> float:
    """(4 / beta0) ||(B - P) Q0||_{H^{-1}_P}; NaN when beta0 is unknown."""
    if beta0 is None or not math.isfinite(beta0):
        return float("nan")
    if beta0 <= 0:
        raise ValueError(f"beta0 must be positive, got {beta0}")
    base = base or Laplacian()
    grid = Q0.grid
    p_vals = symbol_on_grid(symbol, grid)
    b_vals = symbol_on_grid(base, grid)
    forcing = (b_vals - p_vals) * Q0.fourier()
    value = math.sqrt(float(np.sum(np.abs(forcing) ** 2 / (1.0 + p_vals)) * grid.dv))
    return 4.0 / beta0 * value


class _RadialSolver:
    """L = P + 1 - N^+_{Q0} restricted to radial real fields."""

    def __init__(self, Q0: Field, symbol, kind: NonlinearityKind, cfg: ContractionConfig):
        self.grid = Q0.grid
        self.cfg = cfg
        self.op = Linearization("+", Q0, symbol, kind)
        _check_symmetric_symbol(self.op.weight)
        shape, size = self.grid.shape, self.grid.size
        weight = self.op.weight

        def matvec(x):
            g = symmetrize_array(np.asarray(x, dtype=float).reshape(shape))
            return symmetrize_array(self.op.apply_L(g)).ravel()

        def precond(x):
            g = np.asarray(x, dtype=float).reshape(shape)
            return self.op.multiplier(g, 1.0 / weight).ravel()

        self.L = LinearOperator((size, size), matvec=matvec, dtype=float)
        self.M = LinearOperator((size, size), matvec=precond, dtype=float)

    def solve(self, f: np.ndarray) -> np.ndarray:
        weight, dv = self.op.weight, self.grid.dv
        f_norm = _dual_norm(f, weight, dv)
        if f_norm == 0.0:
            return np.zeros(self.grid.shape)
        x, info = minres(self.L, f.ravel(), rtol=self.cfg.inner_tol,
                         maxiter=self.cfg.inner_max_iters, M=self.M)
        h = symmetrize_array(np.asarray(x).reshape(self.grid.shape))
        rel = _dual_norm(self.op.apply_L(h) - f, weight, dv) / f_norm
        if info != 0 or not math.isfinite(rel) or rel > 100.0 * self.cfg.inner_tol:
            raise InvertibilityError(
                f"outside invertibility regime: MINRES info={info}, relative residual {rel:.3e}"
            )
        return h


def _radial_array(f: Field, what: str) -> np.ndarray:
    arr = f.physical()
    if np.iscomplexobj(arr) and np.max(np.abs(arr.imag)) > 1e-12 * max(1.0, float(np.max(np.abs(arr)))):
        raise FieldError(f"{what} must be real-valued")
    if radial_defect(f) > RADIAL_TOL:
        raise FieldError(f"{what} must be radial (invariant under axis permutations and reflections)")
    return symmetrize_array(np.real(arr))


def solve_linearized_radial(f: Field, Q0: Field, symbol, kind: NonlinearityKind,
                            cfg: Optional[ContractionConfig] = None) -> Field:
    """h with (P + 1 - N^+_{Q0}) h = f on the radial real subspace."""
    cfg = cfg or ContractionConfig()
    rhs = _radial_array(f, "forcing")
    h = _RadialSolver(Q0, symbol, kind, cfg).solve(rhs)
    return Field.from_physical(f.grid, h, real=True)


def _forcing(solver: _RadialSolver, kind: NonlinearityKind, q0: np.ndarray, r: np.ndarray,
             base_residual: np.ndarray) -> np.ndarray:
    grid = solver.grid
    out = (-base_residual + kind.nprime(q0 + r, grid) - kind.nprime(q0, grid)
           - kind.nplus(q0, r, grid))
    return symmetrize_array(np.real(out))


def _exact_residual(solver: _RadialSolver, kind: NonlinearityKind, q0: np.ndarray) -> np.ndarray:
    """(P + 1) Q0 - N'(Q0)."""
    return solver.op.multiplier(q0, solver.op.weight) - kind.nprime(q0, solver.grid)


def phi(r: Field, Q0: Field, symbol, kind: NonlinearityKind,
        cfg: Optional[ContractionConfig] = None) -> Field:
    cfg = cfg or ContractionConfig()
    solver = _RadialSolver(Q0, symbol, kind, cfg)
    q0 = _radial_array(Q0, "Q0")
    ra = _radial_array(r, "r")
    rhs = _forcing(solver, kind, q0, ra, _exact_residual(solver, kind, q0))
    return Field.from_physical(Q0.grid, solver.solve(rhs), real=True)


@dataclass
class ContractionResult:
    u: Field
    r: Field
    delta_epsilon: float
    iterations: int
    converged: bool
    pde_residual: float
    r_norm: float
    max_contraction_factor: float
    within_ball: Optional[bool]
    factor_flag: bool
    # converged with the PDE residual below 10 * tol
    passed: bool
    log: Dict[str, List[float]] = field(default_factory=dict)

    def summary(self) -> Dict:
        return {
            "delta_epsilon": self.delta_epsilon,
            "iterations": self.iterations,
            "converged": self.converged,
            "pde_residual": self.pde_residual,
            "r_norm": self.r_norm,
            "max_contraction_factor": self.max_contraction_factor,
            "within_ball": self.within_ball,
            "factor_flag": self.factor_flag,
            "passed": self.passed,
        }


def contraction_solve(Q0: Field, symbol: DispersionSymbol, kind: NonlinearityKind,
                      cfg: Optional[ContractionConfig] = None, base: Optional[DispersionSymbol] = None,
                      beta0: Optional[float] = None, r_init: Optional[Field] = None) -> ContractionResult:
    """Iterate r <- Phi(r) from r_init (default 0) until the H^1_P update drops below cfg.tol."""
    cfg = cfg or ContractionConfig()
    base = base or Laplacian()
    grid = Q0.grid
    q0 = _radial_array(Q0, "Q0")
    beta0 = cfg.beta0 if beta0 is None else beta0
    delta = delta_epsilon(symbol, Q0, beta0, base)
    log: Dict[str, List[float]] = {"iter": [], "residual": [], "contraction_factor": []}

    if np.array_equal(symbol_on_grid(symbol, grid), symbol_on_grid(base, grid)) and r_init is None:
        zero = Field.zeros(grid)
        logger.info("contraction.trivial", reason="symbol equals base on the lattice")
        return ContractionResult(u=Field.from_physical(grid, q0, real=True), r=zero, delta_epsilon=delta,
                                 iterations=0, converged=True, pde_residual=0.0, r_norm=0.0,
                                 max_contraction_factor=0.0, within_ball=True if math.isfinite(delta) else None,
                                 factor_flag=False, passed=True, log=log)

    solver = _RadialSolver(Q0, symbol, kind, cfg)
    weight, dv = solver.op.weight, grid.dv
    base_residual = _exact_residual(solver, kind, q0)
    r = np.zeros(grid.shape) if r_init is None else _radial_array(r_init, "r_init")

    prev_update = None
    above_one = 0
    max_factor = 0.0
    factor_flag = False
    converged = False
    it = 0
    for it in range(1, cfg.max_iters + 1):
        r_new = solver.solve(_forcing(solver, kind, q0, r, base_residual))
        update = _hp_norm(r_new - r, weight, dv)
        factor = update / prev_update if prev_update else float("nan")
        log["iter"].append(it)
        log["residual"].append(update)
        log["contraction_factor"].append(factor)
        r = r_new
        if prev_update is not None and prev_update > 10.0 * cfg.tol:
            max_factor = max(max_factor, factor)
            if factor > 1.0:
                factor_flag = True
                above_one += 1
                logger.warning("contraction.factor_above_one", iteration=it, factor=factor)
                if above_one >= cfg.divergence_patience:
                    raise DivergenceError(
                        f"eps too large: contraction factor above 1 for {above_one} consecutive iterations"
                    )
            else:
                above_one = 0
        logger.debug("contraction.step", iteration=it, residual=update, factor=factor)
        if update < cfg.tol:
            converged = True
            break
        prev_update = update

    u = q0 + r
    pde = _dual_norm(solver.op.multiplier(u, weight) - kind.nprime(u, grid), weight, dv)
    r_norm = _hp_norm(r, weight, dv)
    if not converged:
        logger.warning("contraction.not_converged", iterations=it, last_update=log["residual"][-1])
    passed = converged and pde < 10.0 * cfg.tol
    if pde >= 10.0 * cfg.tol:
        logger.warning("contraction.pde_residual", value=pde, limit=10.0 * cfg.tol)
    within = bool(r_norm <= delta) if math.isfinite(delta) else None
    logger.info("contraction.done", iterations=it, converged=converged, r_norm=r_norm,
                delta_epsilon=delta, max_factor=max_factor)
    return ContractionResult(
        u=Field.from_physical(grid, u, real=True),
        r=Field.from_physical(grid, r, real=True),
        delta_epsilon=delta,
        iterations=it,
        converged=converged,
        pde_residual=pde,
        r_norm=r_norm,
        max_contraction_factor=max_factor,
        within_ball=within,
        factor_flag=factor_flag,
        passed=passed,
        log=log,
    )
