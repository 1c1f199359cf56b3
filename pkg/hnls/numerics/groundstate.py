# hnls/numerics/groundstate.py
"""
Ground states on the Nehari manifold.

minimize() runs a Nehari-projected descent along the H^1_P gradient
    g(u) = u - (P + 1)^{-1} N'(u),
with a Barzilai-Borwein step and backtracking on action increase. Each
iterate is rescaled onto the manifold, so the action identity holds at
every step. Results are gauge fixed: centred at the origin grid point,
real and positive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import optimize

from hnls.config import SolverConfig
from hnls.errors import AlignmentError, FieldError, StepSizeCollapse, SymbolError
from hnls.numerics.nonlinearity import NonlinearityKind
from hnls.numerics.operator_symbols import DispersionSymbol, EllipticityReport, ellipticity_gamma
from hnls.numerics.spectral_core import (
    Field,
    GridSpec,
    boundary_amplitude,
    derivative,
    fft,
    ifft,
    norm_hp,
    shift_and_phase,
    spectral_tail,
    symbol_on_grid,
)
from hnls.observability import get_logger

logger = get_logger(__name__)

# relative slack for "action did not increase"
DESCENT_SLACK = 1e-12


@dataclass(frozen=True)
class GroundStateProblem:
    symbol: DispersionSymbol
    kind: NonlinearityKind
    grid: GridSpec
    dealias_fraction: Optional[float] = None

    def __post_init__(self):
        self.kind.check_admissible(self.grid.dim)
        report = self.ellipticity
        if not report.passed:
            raise SymbolError(
                f"symbol is not uniformly elliptic on this grid: gamma={report.gamma:.3e} "
                f"at xi={report.argmin}, leading sign ok={report.leading_sign_ok}"
            )

    @cached_property
    def ellipticity(self) -> EllipticityReport:
        return ellipticity_gamma(self.symbol, self.grid)

    @cached_property
    def weight(self) -> np.ndarray:
        """1 + p(xi) on the lattice."""
        return 1.0 + self.symbol.on_grid(self.grid)

    @cached_property
    def _dealias_mask(self) -> Optional[np.ndarray]:
        if self.dealias_fraction is None:
            return None
        return self.grid.k_max_abs <= self.dealias_fraction * (self.grid.n // 2)

    @property
    def p(self) -> int:
        return self.kind.p

    # array helpers used by the solvers
    def hp_sq(self, u: np.ndarray) -> float:
        return float(np.sum(self.weight * np.abs(fft(u)) ** 2) * self.grid.dv)

    def hp_inner(self, u: np.ndarray, v: np.ndarray) -> float:
        """Real part of <u, v>_{H^1_P}."""
        return float(np.real(np.sum(self.weight * fft(u) * np.conj(fft(v)))) * self.grid.dv)

    def energy(self, u: np.ndarray) -> float:
        return self.kind.energy(u, self.grid)

    def nprime(self, u: np.ndarray) -> np.ndarray:
        out = self.kind.nprime(u, self.grid)
        if self._dealias_mask is not None:
            real = np.isrealobj(out)
            out = ifft(np.where(self._dealias_mask, fft(out), 0.0))
            out = out.real if real else out
        return out

    def resolvent(self, f: np.ndarray) -> np.ndarray:
        """(P + 1)^{-1} f."""
        out = ifft(fft(f) / self.weight)
        return out.real if np.isrealobj(f) else out

    def gradient(self, u: np.ndarray) -> np.ndarray:
        return u - self.resolvent(self.nprime(u))

    def action_of(self, u: np.ndarray) -> float:
        return 0.5 * self.hp_sq(u) - self.energy(u)

    def scale_of(self, u: np.ndarray) -> float:
        n_val = self.energy(u)
        if not n_val > 0:
            raise FieldError("potential energy vanishes; the field cannot be scaled onto the Nehari manifold")
        return (self.hp_sq(u) / ((self.p + 1) * n_val)) ** (1.0 / (self.p - 1))


def action(u: Field, problem: GroundStateProblem) -> float:
    """(1/2) <u, u>_{H^1_P} - N(u)."""
    return problem.action_of(u.physical())


def nehari_scale(u: Field, problem: GroundStateProblem) -> float:
    return problem.scale_of(u.physical())


def sobolev_gradient(u: Field, problem: GroundStateProblem) -> Field:
    return Field.from_physical(problem.grid, problem.gradient(u.physical()), real=u.real or None)


def nehari_residual(u: Field, problem: GroundStateProblem) -> float:
    """|<I'(u), u>| / ||u||^2_{H^1_P}."""
    arr = u.physical()
    hp = problem.hp_sq(arr)
    return abs(hp - (problem.p + 1) * problem.energy(arr)) / hp


def gradient_residual(u: Field, problem: GroundStateProblem) -> float:
    """||I'(u)||_{H^{-1}_P} / ||u||_{H^1_P}, i.e. ||g(u)||_{H^1_P} relative."""
    arr = u.physical()
    return math.sqrt(problem.hp_sq(problem.gradient(arr)) / problem.hp_sq(arr))


def action_expressions(u: Field, problem: GroundStateProblem) -> Tuple[float, float, float]:
    """I(u), ((p-1)/2) N(u), ((p-1)/(2(p+1))) ||u||^2_{H^1_P}; equal on the manifold."""
    arr = u.physical()
    p = problem.p
    return (
        problem.action_of(arr),
        0.5 * (p - 1) * problem.energy(arr),
        0.5 * (p - 1) / (p + 1) * problem.hp_sq(arr),
    )


def action_gap(u: Field, problem: GroundStateProblem) -> float:
    """Largest pairwise relative difference of the three action expressions."""
    values = action_expressions(u, problem)
    scale = max(abs(v) for v in values)
    return max(abs(a - b) for a in values for b in values) / scale


def gaussian(grid: GridSpec, width: float, center: Optional[Sequence[float]] = None) -> Field:
    r_sq = np.zeros(grid.shape)
    for j, x in enumerate(grid.x):
        offset = 0.0 if center is None else center[j]
        r_sq = r_sq + (x - offset) ** 2
    return Field.from_physical(grid, np.exp(-0.5 * r_sq / width ** 2), real=True)


# ---------------------------
# Results
# ---------------------------
@dataclass
class GroundStateResult:
    Q: Field
    action: float
    nehari_residual: float
    gradient_residual: float
    iterations: int
    converged: bool
    action_gap: float
    boundary_amplitude: float
    spectral_tail: float
    under_resolved: bool
    start: int = 0
    start_actions: List[float] = field(default_factory=list)
    log: Dict[str, List[float]] = field(default_factory=dict)

    def summary(self) -> Dict:
        return {
            "action": self.action,
            "nehari_residual": self.nehari_residual,
            "gradient_residual": self.gradient_residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "action_gap": self.action_gap,
            "boundary_amplitude": self.boundary_amplitude,
            "spectral_tail": self.spectral_tail,
            "under_resolved": self.under_resolved,
            "start": self.start,
            "start_actions": list(self.start_actions),
        }


def _gauge_fix(u: np.ndarray, grid: GridSpec) -> np.ndarray:
    """Centre |u|^2 at the origin, rotate so sum u|u| > 0, keep the real part."""
    field_u = Field.from_physical(grid, u)
    rho = np.abs(u) ** 2
    center = np.zeros(grid.dim)
    for j in range(grid.dim):
        others = tuple(ax for ax in range(grid.dim) if ax != j)
        marginal = rho.sum(axis=others) if others else rho
        first_mode = np.sum(marginal * np.exp(-2j * math.pi * grid.axis / grid.box))
        if abs(first_mode) > 0:
            center[j] = -np.angle(first_mode) * grid.box / (2.0 * math.pi)
    centred = shift_and_phase(field_u, -center, 0.0).physical()
    theta = -np.angle(np.sum(centred * np.abs(centred)))
    return np.real(np.exp(1j * theta) * centred)


def _descend(problem: GroundStateProblem, u0: np.ndarray, cfg: SolverConfig):
    """One descent run from u0; returns (u, converged, iterations, log)."""
    u = u0 * problem.scale_of(u0)
    a = problem.action_of(u)
    g = problem.gradient(u)
    log: Dict[str, List[float]] = {"iter": [], "action": [], "gradient_residual": [], "step": []}
    prev_u = prev_g = None
    step = 1.0
    for it in range(cfg.max_iters + 1):
        res = math.sqrt(problem.hp_sq(g) / problem.hp_sq(u))
        log["iter"].append(it)
        log["action"].append(a)
        log["gradient_residual"].append(res)
        log["step"].append(step if it else 0.0)
        if res < cfg.tol:
            return u, True, it, log
        if it == cfg.max_iters:
            break

        tau = 1.0
        if prev_u is not None:
            s = u - prev_u
            y = g - prev_g
            sy = problem.hp_inner(s, y)
            if sy > 0:
                tau = min(max(problem.hp_inner(s, s) / sy, cfg.step_min), cfg.step_max)

        tried_unit = tau == 1.0
        while True:
            trial = u - tau * g
            trial = trial * problem.scale_of(trial)
            a_trial = problem.action_of(trial)
            if a_trial <= a + DESCENT_SLACK * abs(a):
                break
            if not tried_unit:
                tau, tried_unit = 1.0, True
            else:
                tau *= 0.5
            if tau < cfg.step_floor:
                raise StepSizeCollapse(
                    f"step size fell below {cfg.step_floor:g} at iteration {it} "
                    f"(action {a:.15e}, gradient residual {res:.3e})"
                )
        prev_u, prev_g = u, g
        u, a, step = trial, a_trial, tau
        g = problem.gradient(u)
    return u, False, cfg.max_iters, log


def _initial_fields(problem: GroundStateProblem, cfg: SolverConfig, seed: int) -> List[np.ndarray]:
    rng = np.random.default_rng(seed)
    starts = []
    for width in cfg.init_widths[: cfg.starts]:
        jitter = 1.0 + 0.1 * rng.uniform(-1.0, 1.0)
        starts.append(gaussian(problem.grid, width * jitter).physical())
    return starts


def minimize(problem: GroundStateProblem, init: Optional[Field] = None,
             cfg: Optional[SolverConfig] = None, seed: int = 0) -> GroundStateResult:
    """
    Ground state by Nehari-projected gradient descent.

    Without `init`, cfg.starts seeded Gaussian bumps are tried and the
    lowest action wins; with `init` (warm start) only that field is used.
    """
    cfg = cfg or SolverConfig()
    if init is not None:
        if init.grid != problem.grid:
            raise FieldError("initial field lives on a different grid")
        starts = [np.array(init.physical())]
    else:
        starts = _initial_fields(problem, cfg, seed)

    runs = []
    for index, u0 in enumerate(starts):
        u, converged, iters, log = _descend(problem, u0, cfg)
        runs.append((problem.action_of(u), index, u, converged, iters, log))
        logger.debug("groundstate.start_done", start=index, action=runs[-1][0],
                     converged=converged, iterations=iters)
    # lowest action among converged runs, otherwise among all
    pool = [r for r in runs if r[3]] or runs
    best_action, best_index, u, converged, iters, log = min(pool, key=lambda r: (r[0], r[1]))

    arr = _gauge_fix(u, problem.grid)
    arr = arr * problem.scale_of(arr)
    Q = Field.from_physical(problem.grid, arr, real=True)
    tail = spectral_tail(Q)
    result = GroundStateResult(
        Q=Q,
        action=problem.action_of(arr),
        nehari_residual=nehari_residual(Q, problem),
        gradient_residual=gradient_residual(Q, problem),
        iterations=iters,
        converged=converged,
        action_gap=action_gap(Q, problem),
        boundary_amplitude=boundary_amplitude(Q),
        spectral_tail=tail,
        under_resolved=tail > cfg.tail_threshold,
        start=best_index,
        start_actions=[r[0] for r in runs],
        log=log,
    )
    if not converged:
        logger.warning("groundstate.not_converged", iterations=iters,
                       gradient_residual=result.gradient_residual)
    if result.under_resolved:
        logger.warning("groundstate.under_resolved", spectral_tail=tail, threshold=cfg.tail_threshold)
    if result.nehari_residual > cfg.nehari_tol:
        logger.warning("groundstate.nehari_residual", value=result.nehari_residual)
    logger.info("groundstate.converged" if converged else "groundstate.stopped",
                action=result.action, iterations=iters, gradient_residual=result.gradient_residual)
    return result


# ---------------------------
# Alignment modulo translation and phase
# ---------------------------
@dataclass
class AlignmentResult:
    theta: float
    shift: Tuple[float, ...]
    aligned: Field
    residual: float
    modulation_residuals: Tuple[float, ...] = ()


def _correlation(h: np.ndarray, xi: Sequence[np.ndarray], a: np.ndarray):
    """C(a) = sum h e^{-i xi.a} with first and second derivatives in a."""
    phase = np.zeros(h.shape)
    for j, comp in enumerate(xi):
        phase = phase + comp * a[j]
    terms = h * np.exp(-1j * phase)
    C = terms.sum()
    dC = np.array([np.sum(-1j * comp * terms) for comp in xi])
    d2C = np.array([[np.sum(-(xi[i] * xi[j]) * terms) for j in range(len(xi))] for i in range(len(xi))])
    return C, dC, d2C


def align(u: Field, reference: Field, metric_symbol) -> AlignmentResult:
    """
    (theta, a) minimizing ||e^{i theta} u(. - a) - reference||_{H^1_P}:
    integer shifts from the cross-correlation, then a trust-region Newton
    refinement of |C(a)|^2, C(a) = <u(. - a), reference>_{H^1_P}.
    """
    if u.grid != reference.grid:
        raise FieldError("alignment needs both fields on the same grid")
    grid = u.grid
    weight = 1.0 + symbol_on_grid(metric_symbol, grid)
    h = weight * u.fourier() * np.conj(reference.fourier()) * grid.dv
    scale = norm_hp(u, metric_symbol) * norm_hp(reference, metric_symbol)
    if scale == 0.0:
        raise AlignmentError("cannot align a zero field")

    # integer shifts: fftn(h)[m] = C(m dx)
    corr = np.fft.fftn(h)
    flat = int(np.argmax(np.abs(corr)))
    if abs(corr.flat[flat]) < 1e-12 * scale:
        raise AlignmentError("fields are orthogonal in H^1_P; alignment is undefined")
    idx = np.unravel_index(flat, grid.shape)
    a0 = np.array([grid.k_axis[i] * grid.dx for i in idx], dtype=float)

    def objective(a):
        C, dC, _ = _correlation(h, grid.xi, a)
        val = -(abs(C) ** 2) / scale ** 2
        grad = -2.0 * np.real(np.conj(C) * dC) / scale ** 2
        return val, grad

    def hessian(a):
        C, dC, d2C = _correlation(h, grid.xi, a)
        H = 2.0 * np.real(np.outer(np.conj(dC), dC) + np.conj(C) * d2C)
        return -H / scale ** 2

    sol = optimize.minimize(objective, a0, jac=True, hess=hessian, method="trust-exact",
                            options={"gtol": 1e-13, "maxiter": 200})
    a_best = np.asarray(sol.x, dtype=float)
    if not np.all(np.isfinite(a_best)):
        raise AlignmentError("shift refinement produced a non-finite shift")
    C_best, _, _ = _correlation(h, grid.xi, a_best)
    theta = float(-np.angle(C_best))
    aligned = shift_and_phase(u, a_best, theta)
    diff = aligned - reference
    residual = norm_hp(diff, metric_symbol)

    modulation = []
    if residual > 0:
        for j in range(grid.dim):
            d_ref = derivative(reference, j)
            d_norm = norm_hp(d_ref, metric_symbol)
            inner = np.sum(weight * diff.fourier() * np.conj(d_ref.fourier())) * grid.dv
            modulation.append(abs(float(np.real(inner))) / (residual * d_norm) if d_norm else 0.0)
    else:
        modulation = [0.0] * grid.dim
    return AlignmentResult(theta=theta, shift=tuple(float(x) for x in a_best), aligned=aligned,
                           residual=residual, modulation_residuals=tuple(modulation))


@dataclass(frozen=True)
class LevelBound:
    scale: float
    bound: float


def level_bound(Q0: Field, problem: GroundStateProblem) -> LevelBound:
    """
    Upper bound for the level of `problem`: the action of Q0 rescaled onto
    its Nehari manifold, t^{p+1} ((p-1)/2) N(Q0).
    """
    t = nehari_scale(Q0, problem)
    arr = Q0.physical()
    return LevelBound(scale=t, bound=t ** (problem.p + 1) * 0.5 * (problem.p - 1) * problem.energy(arr))
