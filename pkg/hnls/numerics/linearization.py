# hnls/numerics/linearization.py
"""
Spectral diagnostics of the linearized operators about a real solution u:

    L^{+/-} = (P + 1) - N^{+/-}_u
            = sqrt(1 + P) (Id - A^{+/-}) sqrt(1 + P),
    A^{+/-} = (1 + P)^{-1/2} N^{+/-}_u (1 + P)^{-1/2}.

A^{+/-} is symmetric and nonnegative for both nonlinearities, so the
eigenvalues lambda = 1 - mu of (Id - A) nearest zero come from the top
eigenvalues mu of A. Those are computed matrix-free with LOBPCG, with the
transported symmetry directions as hard constraints.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy.sparse.linalg import ArpackNoConvergence, LinearOperator, eigsh, lobpcg

from hnls.config import SpectrumConfig
from hnls.errors import EigensolverError, FieldError, SymbolError
from hnls.numerics.nonlinearity import NonlinearityKind
from hnls.numerics.spectral_core import Field, derivative, fft, ifft, looks_real, symbol_on_grid
from hnls.observability import get_logger

logger = get_logger(__name__)

# a linearized residual counts as "solution" below this level
SOLUTION_THRESHOLD = 1e-6


def _check_sign(sign: str) -> str:
    if sign not in ("+", "-"):
        raise ValueError(f"sign must be '+' or '-', got {sign!r}")
    return sign


def _real_array(u: Field) -> np.ndarray:
    arr = u.physical()
    if not (u.real or looks_real(arr)):
        raise FieldError("linearization point must be real-valued")
    return np.real(arr)


def _weight(symbol, grid) -> np.ndarray:
    weight = 1.0 + symbol_on_grid(symbol, grid)
    if np.min(weight) <= 0:
        raise SymbolError("1 + p(xi) must be positive on the lattice")
    return weight


class Linearization:
    """Array-level operators about a fixed real point u."""

    def __init__(self, sign: str, u: Field, symbol, kind: NonlinearityKind):
        self.sign = _check_sign(sign)
        self.grid = u.grid
        kind.check_admissible(self.grid.dim)
        self.kind = kind
        self.u = _real_array(u)
        self.weight = _weight(symbol, self.grid)
        self.root = np.sqrt(self.weight)

    def n_sign(self, g: np.ndarray) -> np.ndarray:
        if self.sign == "+":
            return self.kind.nplus(self.u, g, self.grid)
        return self.kind.nminus(self.u, g, self.grid)

    def multiplier(self, g: np.ndarray, values: np.ndarray) -> np.ndarray:
        out = ifft(values * fft(g))
        return out.real if np.isrealobj(g) else out

    def apply_A(self, g: np.ndarray) -> np.ndarray:
        half = self.multiplier(g, 1.0 / self.root)
        return self.multiplier(self.n_sign(half), 1.0 / self.root)

    def apply_L(self, g: np.ndarray) -> np.ndarray:
        return self.multiplier(g, self.weight) - self.n_sign(g)

    def dual_norm(self, f: np.ndarray) -> float:
        return math.sqrt(float(np.sum(np.abs(fft(f)) ** 2 / self.weight) * self.grid.dv))

    def hp_norm(self, g: np.ndarray) -> float:
        return math.sqrt(float(np.sum(self.weight * np.abs(fft(g)) ** 2) * self.grid.dv))

    def candidates(self) -> List[np.ndarray]:
        """Symmetry directions: d_j u for '+', u for '-'."""
        if self.sign == "-":
            return [self.u]
        field_u = Field.from_physical(self.grid, self.u, real=True)
        return [derivative(field_u, j).physical() for j in range(self.grid.dim)]


def apply_A(sign: str, u: Field, g: Field, symbol, kind: NonlinearityKind) -> Field:
    """(1 + P)^{-1/2} N^{sign}_u (1 + P)^{-1/2} g."""
    op = Linearization(sign, u, symbol, kind)
    if g.grid != u.grid:
        raise FieldError("g lives on a different grid")
    return Field.from_physical(u.grid, op.apply_A(g.physical()), real=g.real or None)


# ---------------------------
# Kernel residuals
# ---------------------------
@dataclass
class KernelReport:
    pde_residual: float
    is_solution: bool
    rows: List[Dict] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return asdict(self)


def pde_residual(u: Field, symbol, kind: NonlinearityKind) -> float:
    """||(P + 1) u - N'(u)||_{H^{-1}_P} / ||u||_{H^1_P}."""
    op = Linearization("-", u, symbol, kind)
    # N^-_u u = N'(u) for real u
    return op.dual_norm(op.apply_L(op.u)) / op.hp_norm(op.u)


def kernel_residuals(u: Field, symbol, kind: NonlinearityKind) -> KernelReport:
    rows = []
    for sign in ("+", "-"):
        op = Linearization(sign, u, symbol, kind)
        for j, cand in enumerate(op.candidates()):
            norm = op.hp_norm(cand)
            value = op.dual_norm(op.apply_L(cand)) / norm if norm > 0 else float("inf")
            rows.append({
                "sign": sign,
                "candidate": f"d{j + 1}u" if sign == "+" else "u",
                "residual": value,
            })
    res = pde_residual(u, symbol, kind)
    report = KernelReport(pde_residual=res, is_solution=res < SOLUTION_THRESHOLD, rows=rows)
    if not report.is_solution:
        logger.warning("spectrum.not_a_solution", pde_residual=res)
    return report


# ---------------------------
# Non-degeneracy constants
# ---------------------------
@dataclass
class SpectrumReport:
    sign: str
    kernel_residuals: List[float]
    kernel_eigenvalues: List[float]
    eigenvalues: List[float]
    beta: float
    negative_count: int
    residual_norms: List[float]
    deflation_overlap: float
    kernel_tol: float
    non_degenerate: bool
    solver: str
    pde_residual: float
    tail_eigenvalue: Optional[float] = None

    def to_dict(self) -> Dict:
        return asdict(self)


def _orthonormal_columns(vectors: List[np.ndarray]) -> np.ndarray:
    mat = np.stack([v.ravel() for v in vectors], axis=1)
    q, _ = np.linalg.qr(mat)
    return q


def _operator(op: Linearization) -> LinearOperator:
    shape = op.grid.shape
    size = op.grid.size

    def matvec(x):
        return op.apply_A(np.asarray(x, dtype=float).reshape(shape)).ravel()

    def matmat(X):
        return np.column_stack([matvec(X[:, i]) for i in range(X.shape[1])])

    return LinearOperator((size, size), matvec=matvec, matmat=matmat, dtype=float)


def _projected(A: LinearOperator, Y: np.ndarray) -> LinearOperator:
    def proj(x):
        return x - Y @ (Y.T @ x)

    return LinearOperator(A.shape, matvec=lambda x: proj(A.matvec(proj(x))), dtype=float)


def _top_eigs(A: LinearOperator, Y: np.ndarray, k: int, cfg: SpectrumConfig, seed: int):
    """Largest k eigenpairs of A on the orthogonal complement of span(Y)."""
    size = A.shape[0]
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((size, k))
    X = X - Y @ (Y.T @ X)
    X, _ = np.linalg.qr(X)
    try:
        mu, vecs = lobpcg(A, X, Y=Y, largest=True, tol=cfg.tol, maxiter=cfg.max_iters)
        resid = np.linalg.norm(A.matmat(vecs) - vecs * mu, axis=0)
        if np.all(np.isfinite(mu)) and np.max(resid) <= math.sqrt(cfg.tol) * max(1.0, float(np.max(np.abs(mu)))):
            return np.asarray(mu), vecs, resid, "lobpcg"
        logger.info("spectrum.lobpcg_fallback", max_residual=float(np.max(resid)))
    except (np.linalg.LinAlgError, ValueError) as e:
        logger.info("spectrum.lobpcg_fallback", error=str(e))

    v0 = rng.standard_normal(size)
    try:
        mu, vecs = eigsh(_projected(A, Y), k=k, which="LA", tol=cfg.tol, v0=v0)
    except ArpackNoConvergence as e:
        raise EigensolverError(f"eigensolver did not converge: {e}") from e
    resid = np.linalg.norm(A.matmat(vecs) - vecs * mu, axis=0)
    return np.asarray(mu), vecs, resid, "eigsh"


def tail_eigenvalue(sign: str, u: Field, symbol, kind: NonlinearityKind, index: int,
                    seed: int = 0, tol: float = 1e-8) -> float:
    """The (index+1)-th largest eigenvalue of A^{sign}; small values indicate compactness."""
    op = Linearization(sign, u, symbol, kind)
    A = _operator(op)
    v0 = np.random.default_rng(seed).standard_normal(op.grid.size)
    k = min(index + 1, op.grid.size - 2)
    try:
        mu = eigsh(A, k=k, which="LA", tol=tol, v0=v0, return_eigenvectors=False)
    except ArpackNoConvergence as e:
        raise EigensolverError(f"tail eigensolve did not converge: {e}") from e
    return float(np.sort(mu)[0])


def beta_estimate(sign: str, u: Field, symbol, kind: NonlinearityKind, n_eigs: Optional[int] = None,
                  cfg: Optional[SpectrumConfig] = None, seed: int = 0) -> SpectrumReport:
    """
    Eigenvalues of (Id - A^{sign}) nearest zero on the complement of the
    transported kernel candidates sqrt(1 + P) d_j u ('+') or sqrt(1 + P) u ('-').
    """
    cfg = cfg or SpectrumConfig()
    op = Linearization(sign, u, symbol, kind)
    d = op.grid.dim
    k = n_eigs if n_eigs is not None else cfg.n_eigs
    if k < d + 2:
        raise ValueError(f"n_eigs must be at least d + 2 = {d + 2}, got {k}")

    candidates = op.candidates()
    transported = [op.multiplier(c, op.root) for c in candidates]
    Y = _orthonormal_columns(transported)
    A = _operator(op)

    # Rayleigh quotients of the transported candidates
    kernel_eigs = []
    for v in transported:
        flat = v.ravel()
        kernel_eigs.append(float(1.0 - flat @ A.matvec(flat) / (flat @ flat)))
    kernel_res = []
    for c in candidates:
        norm = op.hp_norm(c)
        kernel_res.append(op.dual_norm(op.apply_L(c)) / norm if norm > 0 else float("inf"))

    mu, vecs, resid, solver = _top_eigs(A, Y, k, cfg, seed)
    order = np.argsort(mu)[::-1]
    mu, vecs, resid = mu[order], vecs[:, order], resid[order]
    lam = 1.0 - mu

    res_u = pde_residual(u, symbol, kind)
    kernel_tol = max(10.0 * res_u, 1e-8)
    beta = float(np.min(np.abs(lam)))
    overlap = float(np.max(np.abs(Y.T @ vecs)))
    tail = None
    if cfg.tail_index > 0:
        try:
            tail = tail_eigenvalue(sign, u, symbol, kind, cfg.tail_index, seed=seed)
        except EigensolverError as e:
            logger.warning("spectrum.tail_failed", error=str(e))

    report = SpectrumReport(
        sign=sign,
        kernel_residuals=kernel_res,
        kernel_eigenvalues=kernel_eigs,
        eigenvalues=[float(x) for x in np.sort(lam)],
        beta=beta,
        negative_count=int(np.sum(lam < -kernel_tol)),
        residual_norms=[float(r) for r in resid],
        deflation_overlap=overlap,
        kernel_tol=kernel_tol,
        non_degenerate=bool(beta > kernel_tol and all(abs(x) < kernel_tol for x in kernel_eigs)),
        solver=solver,
        pde_residual=res_u,
        tail_eigenvalue=tail,
    )
    logger.info("spectrum.report", sign=sign, beta=beta, negative_count=report.negative_count,
                solver=solver)
    return report
