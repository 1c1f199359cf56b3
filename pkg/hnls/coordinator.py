# hnls/coordinator.py
"""
Coordinator - orchestrates solver runs and parameter sweeps.

- groundstate / contraction / spectrum: one solve plus diagnostics
- eps sweep: warm-started variational chain along eps, then per-eps
  contraction, alignment and spectra on a worker pool
- c sweep: pseudo-relativistic ground states against their odd Taylor
  truncations, with a log-log rate fit per J

Every run writes manifest.json (resolved config, fingerprint, versions,
results) plus CSV tables into cfg.output.dir. Failed sweep points are
recorded in the `status` column and never stop the sweep.
"""

from __future__ import annotations

import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from hnls.config import StudyConfig
from hnls.errors import ConfigError, HnlsError, RateFitError
from hnls.numerics.contraction import ContractionResult, contraction_solve
from hnls.numerics.groundstate import GroundStateProblem, GroundStateResult, align, level_bound, minimize
from hnls.numerics.linearization import SpectrumReport, beta_estimate, kernel_residuals
from hnls.numerics.nonlinearity import NonlinearityKind, make_nonlinearity
from hnls.numerics.operator_symbols import (
    DispersionSymbol,
    Laplacian,
    PseudoRelativistic,
    RelativisticTruncation,
    build_symbol,
)
from hnls.numerics.spectral_core import Field, GridSpec, make_grid, sobolev_norm
from hnls.observability import add_step, end_trace, get_logger, log_event, new_trace, record_step
from hnls.storage import save_field
from hnls.utils import fingerprint_config, versions, write_csv, write_json

logger = get_logger(__name__)

MINIMIZER_LOG_COLUMNS = ["iter", "action", "gradient_residual", "step"]
CONTRACTION_LOG_COLUMNS = ["iter", "residual", "contraction_factor"]

EPS_COLUMNS = [
    "eps", "status", "C_eps", "level_bound", "gradient_residual", "nehari_residual",
    "iterations", "under_resolved", "dist_variational", "dist_variational_h2",
    "dist_contraction", "identification", "identification_rel", "identified",
    "delta_epsilon", "contraction_iterations", "max_contraction_factor", "within_ball",
    "contraction_pde_residual", "contraction_passed", "beta_plus", "beta_minus", "beta",
    "negative_count_plus", "negative_count_minus",
]

C_COLUMNS = [
    "J", "c", "status", "error", "error_contraction", "action_c", "action_cJ",
    "gradient_residual_c", "gradient_residual_cJ", "under_resolved",
    "contraction_iterations", "max_contraction_factor", "contraction_passed",
]

EPS_FAMILIES = ("higher_order_radial", "higher_order_aniso")

# failures that stay local to one sweep point
POINT_ERRORS = (HnlsError, ArithmeticError, ValueError, np.linalg.LinAlgError)


# ---------------------------
# Rate fits
# ---------------------------
@dataclass(frozen=True)
class RateFit:
    log_params: Tuple[float, ...]
    log_errors: Tuple[float, ...]
    slope: float
    intercept: float
    max_residual: float

    def to_dict(self) -> Dict:
        return asdict(self)


def fit_rate(points: Sequence[Tuple[float, float]]) -> RateFit:
    """Least-squares line through (log parameter, log error)."""
    pts = [(float(x), float(e)) for x, e in points]
    if len(pts) < 3:
        raise RateFitError(f"a rate fit needs at least 3 points, got {len(pts)}")
    params = np.array([x for x, _ in pts])
    errors = np.array([e for _, e in pts])
    if not np.all(np.isfinite(params)) or np.any(params <= 0):
        raise RateFitError("rate fit parameters must be positive and finite")
    if not np.all(np.isfinite(errors)) or np.any(errors <= 0):
        raise RateFitError("rate fit errors must be positive and finite (log undefined)")
    lx, ly = np.log(params), np.log(errors)
    if np.ptp(lx) == 0.0:
        raise RateFitError("degenerate abscissae: all parameters are equal")
    fit = stats.linregress(lx, ly)
    slope, intercept = float(fit.slope), float(fit.intercept)
    if not math.isfinite(slope):
        raise RateFitError("rate fit produced a non-finite slope")
    residuals = ly - (slope * lx + intercept)
    return RateFit(
        log_params=tuple(float(v) for v in lx),
        log_errors=tuple(float(v) for v in ly),
        slope=slope,
        intercept=intercept,
        max_residual=float(np.max(np.abs(residuals))),
    )


def _try_fit(points: Sequence[Tuple[float, float]]) -> Dict:
    usable = [(x, e) for x, e in points if e is not None and math.isfinite(e) and e > 0]
    try:
        return fit_rate(usable).to_dict()
    except RateFitError as e:
        logger.warning("sweep.rate_fit_skipped", reason=str(e), points=len(usable))
        return {"error": str(e)}


# ---------------------------
# Builders
# ---------------------------
def _grid(cfg: StudyConfig, n: Optional[int] = None) -> GridSpec:
    return make_grid(cfg.grid.dim, n or cfg.grid.n, cfg.grid.box)


def _kind(cfg: StudyConfig) -> NonlinearityKind:
    return make_nonlinearity(cfg.nonlinearity.kind, cfg.grid.dim, cfg.nonlinearity.k,
                             cfg.hartree.truncation_radius)


def _dealias_fraction(cfg: StudyConfig, kind: NonlinearityKind) -> Optional[float]:
    if not cfg.dealias.enabled:
        return None
    if cfg.dealias.fraction is not None:
        return cfg.dealias.fraction
    return 2.0 / (kind.p + 1)


def _symbol(cfg: StudyConfig, eps: Optional[float] = None, c: Optional[float] = None,
            J: Optional[int] = None) -> DispersionSymbol:
    s = cfg.symbol
    return build_symbol(
        s.kind,
        eps=s.eps[0] if eps is None else eps,
        coefficients=s.coefficients,
        terms=s.terms,
        m=s.m,
        c=s.c[0] if c is None else c,
        J=s.J[0] if J is None else J,
    )


def _problem(cfg: StudyConfig, symbol: DispersionSymbol, grid: GridSpec,
             kind: Optional[NonlinearityKind] = None) -> GroundStateProblem:
    kind = kind or _kind(cfg)
    return GroundStateProblem(symbol=symbol, kind=kind, grid=grid,
                              dealias_fraction=_dealias_fraction(cfg, kind))


def _manifest(cfg: StudyConfig, results: Dict) -> Dict:
    config = cfg.model_dump(mode="json")
    return {
        "study": cfg.study,
        "config": config,
        "fingerprint": fingerprint_config(config),
        "versions": versions(),
        "results": results,
    }


def _out(cfg: StudyConfig, name: str) -> str:
    return os.path.join(cfg.output.dir, name)


def _write_minimizer_log(cfg: StudyConfig, name: str, result: GroundStateResult) -> None:
    write_csv(_out(cfg, name), pd.DataFrame(result.log, columns=MINIMIZER_LOG_COLUMNS))


def _write_contraction_log(cfg: StudyConfig, name: str, result: ContractionResult) -> None:
    if cfg.contraction.write_log:
        write_csv(_out(cfg, name), pd.DataFrame(result.log, columns=CONTRACTION_LOG_COLUMNS))


def _spectra(cfg: StudyConfig, u: Field, symbol: DispersionSymbol,
             kind: NonlinearityKind) -> Dict[str, SpectrumReport]:
    return {sign: beta_estimate(sign, u, symbol, kind, cfg=cfg.spectrum, seed=cfg.seed)
            for sign in cfg.spectrum.signs}


def _finish(trace: Dict, event: str, payload: Dict) -> str:
    trace_path = end_trace(trace)
    log_event(event, {**payload, "trace": trace_path})
    return trace_path


# ---------------------------
# Single runs
# ---------------------------
def run_groundstate(cfg: StudyConfig) -> Dict:
    trace = new_trace("groundstate")
    grid = _grid(cfg)
    symbol = _symbol(cfg)
    problem = _problem(cfg, symbol, grid)
    result = record_step(trace, "minimize", minimize, problem, cfg=cfg.solver, seed=cfg.seed)

    _write_minimizer_log(cfg, "minimizer_log.csv", result)
    if cfg.output.write_fields:
        save_field(cfg.output.dir, "Q", result.Q)
    summary = {
        "symbol": symbol.describe(),
        "nonlinearity": problem.kind.describe(),
        "ellipticity": problem.ellipticity.to_dict(),
        **result.summary(),
    }
    write_json(_out(cfg, "manifest.json"), _manifest(cfg, summary))
    _finish(trace, "groundstate_done", {"action": result.action, "converged": result.converged})
    return summary


def _base_state(cfg: StudyConfig, grid: GridSpec, kind: NonlinearityKind, trace: Dict) -> GroundStateResult:
    problem = _problem(cfg, Laplacian(), grid, kind)
    return record_step(trace, "base_groundstate", minimize, problem, cfg=cfg.solver, seed=cfg.seed)


def _base_beta(cfg: StudyConfig, Q0: Field, kind: NonlinearityKind, trace: Dict):
    """(beta0, spectra at Q0); an explicit contraction.beta0 skips the eigensolves."""
    if cfg.contraction.beta0 is not None:
        return cfg.contraction.beta0, {}
    spectra = record_step(trace, "base_spectrum", _spectra, cfg, Q0, Laplacian(), kind)
    if not spectra:
        return None, {}
    return min(rep.beta for rep in spectra.values()), spectra


def run_contraction(cfg: StudyConfig) -> Dict:
    trace = new_trace("contraction")
    grid = _grid(cfg)
    kind = _kind(cfg)
    base = _base_state(cfg, grid, kind, trace)
    beta0, base_spectra = _base_beta(cfg, base.Q, kind, trace)
    symbol = _symbol(cfg)
    result = record_step(trace, "contraction", contraction_solve, base.Q, symbol, kind,
                         cfg=cfg.contraction, beta0=beta0)

    _write_minimizer_log(cfg, "minimizer_log.csv", base)
    _write_contraction_log(cfg, "contraction_log.csv", result)
    if cfg.output.write_fields:
        save_field(cfg.output.dir, "Q0", base.Q)
        save_field(cfg.output.dir, "u", result.u)
    summary = {
        "symbol": symbol.describe(),
        "nonlinearity": kind.describe(),
        "base": base.summary(),
        "beta0": beta0,
        "base_spectra": {sign: rep.to_dict() for sign, rep in base_spectra.items()},
        "contraction": result.summary(),
        "dist_to_base": sobolev_norm(result.u - base.Q, 1),
    }
    write_json(_out(cfg, "manifest.json"), _manifest(cfg, summary))
    _finish(trace, "contraction_done", {"converged": result.converged, "iterations": result.iterations})
    return summary


def run_spectrum(cfg: StudyConfig) -> Dict:
    trace = new_trace("spectrum")
    grid = _grid(cfg)
    symbol = _symbol(cfg)
    problem = _problem(cfg, symbol, grid)
    result = record_step(trace, "minimize", minimize, problem, cfg=cfg.solver, seed=cfg.seed)
    kernel = record_step(trace, "kernel_residuals", kernel_residuals, result.Q, symbol, problem.kind)
    spectra = record_step(trace, "spectra", _spectra, cfg, result.Q, symbol, problem.kind)

    report = {
        "groundstate": result.summary(),
        "kernel": kernel.to_dict(),
        "spectra": {sign: rep.to_dict() for sign, rep in spectra.items()},
    }
    write_json(_out(cfg, "spectrum.json"), report)
    if cfg.output.write_fields:
        save_field(cfg.output.dir, "Q", result.Q)
    summary = {
        "symbol": symbol.describe(),
        "pde_residual": kernel.pde_residual,
        **{f"beta{sign}": rep.beta for sign, rep in spectra.items()},
        **{f"negative_count{sign}": rep.negative_count for sign, rep in spectra.items()},
        "non_degenerate": all(rep.non_degenerate for rep in spectra.values()),
    }
    write_json(_out(cfg, "manifest.json"), _manifest(cfg, {**summary, **report}))
    _finish(trace, "spectrum_done", {"non_degenerate": summary["non_degenerate"]})
    return summary


# ---------------------------
# eps sweep
# ---------------------------
def _eps_point(cfg: StudyConfig, eps: float, symbol: DispersionSymbol, kind: NonlinearityKind,
               Q0: Field, beta0: Optional[float], problem: GroundStateProblem,
               var: GroundStateResult) -> Tuple[Dict, Dict[str, object]]:
    """Contraction, aligned distances and spectra for one converged variational point."""
    row: Dict = {column: None for column in EPS_COLUMNS}
    row.update(eps=eps, C_eps=var.action, gradient_residual=var.gradient_residual,
               nehari_residual=var.nehari_residual, iterations=var.iterations,
               under_resolved=var.under_resolved)
    notes: List[str] = [] if var.converged else ["variational: not converged"]
    artifacts: Dict[str, object] = {"Q": var.Q}
    metric = Laplacian()
    q0_norm = sobolev_norm(Q0, 1)

    try:
        row["level_bound"] = level_bound(Q0, problem).bound
        aligned = align(var.Q, Q0, metric)
        row["dist_variational"] = aligned.residual
        row["dist_variational_h2"] = sobolev_norm(aligned.aligned - Q0, 2)
    except POINT_ERRORS as e:
        notes.append(f"alignment: {e}")

    try:
        con = contraction_solve(Q0, symbol, kind, cfg.contraction, beta0=beta0)
        artifacts["u"] = con.u
        artifacts["contraction"] = con
        row.update(
            dist_contraction=sobolev_norm(con.u - Q0, 1),
            delta_epsilon=con.delta_epsilon,
            contraction_iterations=con.iterations,
            max_contraction_factor=con.max_contraction_factor,
            within_ball=con.within_ball,
            contraction_pde_residual=con.pde_residual,
            contraction_passed=con.passed,
        )
        if not con.converged:
            notes.append("contraction: not converged")
        ident = align(var.Q, con.u, metric).residual
        row["identification"] = ident
        row["identification_rel"] = ident / q0_norm
        row["identified"] = bool(ident / q0_norm < cfg.sweep.identification_tol)
    except POINT_ERRORS as e:
        notes.append(f"contraction: {e}")

    try:
        spectra = _spectra(cfg, var.Q, symbol, kind)
        for sign, suffix in (("+", "plus"), ("-", "minus")):
            if sign in spectra:
                row[f"beta_{suffix}"] = spectra[sign].beta
                row[f"negative_count_{suffix}"] = spectra[sign].negative_count
        if spectra:
            row["beta"] = min(rep.beta for rep in spectra.values())
    except POINT_ERRORS as e:
        notes.append(f"spectrum: {e}")

    row["status"] = "ok" if not notes else "; ".join(notes)
    return row, artifacts


def _timed_point(func, *args):
    start = time.time()
    out = func(*args)
    return out, (time.time() - start) * 1000


def run_eps_sweep(cfg: StudyConfig) -> Dict:
    if cfg.symbol.kind not in EPS_FAMILIES:
        raise ConfigError(f"eps sweep needs symbol.kind in {EPS_FAMILIES}, got {cfg.symbol.kind!r}")
    trace = new_trace("eps_sweep")
    grid = _grid(cfg)
    kind = _kind(cfg)
    eps_list = list(cfg.symbol.eps)
    base = _base_state(cfg, grid, kind, trace)
    Q0 = base.Q
    beta0, base_spectra = _base_beta(cfg, Q0, kind, trace)

    # sequential chain in increasing eps, each point warm-started from the last good one
    variational: Dict[int, Tuple[DispersionSymbol, GroundStateProblem, GroundStateResult]] = {}
    failures: Dict[int, str] = {}
    warm = Q0
    for i in sorted(range(len(eps_list)), key=lambda j: eps_list[j]):
        eps = eps_list[i]
        try:
            symbol = _symbol(cfg, eps=eps)
            problem = _problem(cfg, symbol, grid, kind)
            result = record_step(trace, f"variational eps={eps:g}", minimize, problem,
                                 init=warm if cfg.sweep.warm_start else None,
                                 cfg=cfg.solver, seed=cfg.seed)
        except POINT_ERRORS as e:
            logger.warning("sweep.point_failed", stage="variational", eps=eps, error=str(e))
            failures[i] = f"variational: {e}"
            continue
        variational[i] = (symbol, problem, result)
        warm = result.Q

    rows: List[Optional[Dict]] = [None] * len(eps_list)
    artifacts: Dict[int, Dict[str, object]] = {}
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        futures = {
            i: pool.submit(_timed_point, _eps_point, cfg, eps_list[i], symbol, kind, Q0, beta0, problem, result)
            for i, (symbol, problem, result) in variational.items()
        }
        for i in range(len(eps_list)):
            if i in failures:
                row = {column: None for column in EPS_COLUMNS}
                row.update(eps=eps_list[i], status=failures[i])
                rows[i] = row
                add_step(trace, f"point eps={eps_list[i]:g}", 0, "error", {"error": failures[i]})
                continue
            (row, art), ms = futures[i].result()
            rows[i], artifacts[i] = row, art
            add_step(trace, f"point eps={eps_list[i]:g}", ms, "ok" if row["status"] == "ok" else "error",
                     {"status": row["status"]})
            if row["status"] != "ok":
                logger.warning("sweep.point_failed", stage="analysis", eps=eps_list[i], status=row["status"])

    # single writer, parameter order
    frame = pd.DataFrame(rows, columns=EPS_COLUMNS)
    write_csv(_out(cfg, "eps_sweep.csv"), frame)
    _write_minimizer_log(cfg, "minimizer_log_base.csv", base)
    for i, art in artifacts.items():
        if "contraction" in art:
            _write_contraction_log(cfg, f"contraction_log_eps_{i:02d}.csv", art["contraction"])
        if cfg.output.write_fields:
            save_field(cfg.output.dir, f"Q_eps_{i:02d}", art["Q"])
            if "u" in art:
                save_field(cfg.output.dir, f"u_eps_{i:02d}", art["u"])
    if cfg.output.write_fields:
        save_field(cfg.output.dir, "Q0", Q0)

    positive = [r for r in rows if r["eps"] > 0]
    by_eps = sorted((r for r in positive if r["dist_variational"] is not None), key=lambda r: r["eps"])
    dists = [r["dist_variational"] for r in by_eps]
    rates = {
        "dist_variational": _try_fit([(r["eps"], r["dist_variational"]) for r in positive]),
        "dist_contraction": _try_fit([(r["eps"], r["dist_contraction"]) for r in positive]),
    }
    write_json(_out(cfg, "eps_rate.json"), rates)
    summary = {
        "base": base.summary(),
        "beta0": beta0,
        "base_spectra": {sign: rep.to_dict() for sign, rep in base_spectra.items()},
        "rows": rows,
        "rates": rates,
        "monotone": bool(all(a < b for a, b in zip(dists, dists[1:]))),
        "failed_points": sum(1 for r in rows if r["status"] != "ok"),
    }
    write_json(_out(cfg, "manifest.json"), _manifest(cfg, summary))
    _finish(trace, "eps_sweep_done", {"points": len(rows), "failed": summary["failed_points"]})
    return summary


# ---------------------------
# c sweep
# ---------------------------
def _pseudo_point(cfg: StudyConfig, c: float, grid: GridSpec, kind: NonlinearityKind) -> GroundStateResult:
    problem = _problem(cfg, PseudoRelativistic(m=cfg.symbol.m, c=c), grid, kind)
    return minimize(problem, cfg=cfg.solver, seed=cfg.seed)


def _truncation_point(cfg: StudyConfig, J: int, c: float, grid: GridSpec, kind: NonlinearityKind,
                      Qc: GroundStateResult, with_contraction: bool = True) -> Tuple[Dict, Optional[Field]]:
    row: Dict = {column: None for column in C_COLUMNS}
    row.update(J=J, c=c, action_c=Qc.action, gradient_residual_c=Qc.gradient_residual)
    notes: List[str] = [] if Qc.converged else ["pseudo-relativistic: not converged"]
    m = cfg.symbol.m
    symbol = RelativisticTruncation(m=m, c=c, J=J)
    try:
        problem = _problem(cfg, symbol, grid, kind)
        res = minimize(problem, init=Qc.Q if cfg.sweep.warm_start else None, cfg=cfg.solver, seed=cfg.seed)
    except POINT_ERRORS as e:
        row["status"] = f"truncated: {e}"
        return row, None
    row.update(action_cJ=res.action, gradient_residual_cJ=res.gradient_residual,
               under_resolved=bool(res.under_resolved or Qc.under_resolved))
    if not res.converged:
        notes.append("truncated: not converged")
    try:
        row["error"] = align(res.Q, Qc.Q, Laplacian()).residual
    except POINT_ERRORS as e:
        notes.append(f"alignment: {e}")
    if with_contraction:
        try:
            con = contraction_solve(Qc.Q, symbol, kind, cfg.contraction, base=PseudoRelativistic(m=m, c=c))
            row.update(error_contraction=sobolev_norm(con.u - Qc.Q, 1),
                       contraction_iterations=con.iterations,
                       max_contraction_factor=con.max_contraction_factor,
                       contraction_passed=con.passed)
            if not con.converged:
                notes.append("contraction: not converged")
        except POINT_ERRORS as e:
            notes.append(f"contraction: {e}")
    row["status"] = "ok" if not notes else "; ".join(notes)
    return row, res.Q


def _refinement(cfg: StudyConfig, J_list: Sequence[int], c: float, coarse: Dict[int, Optional[float]],
                kind: NonlinearityKind, trace: Dict) -> List[Dict]:
    """Repeat the largest-c point on a doubled grid to bound the discretization bias."""
    fine = _grid(cfg, n=2 * cfg.grid.n)
    out = []
    try:
        Qc = record_step(trace, f"refine pseudo c={c:g}", _pseudo_point, cfg, c, fine, kind)
    except POINT_ERRORS as e:
        logger.warning("sweep.refinement_failed", c=c, error=str(e))
        return [{"J": J, "c": c, "n": fine.n, "error": None, "status": str(e)} for J in J_list]
    for J in J_list:
        row, _ = _truncation_point(cfg, J, c, fine, kind, Qc, with_contraction=False)
        coarse_err, fine_err = coarse.get(J), row["error"]
        bias = None
        if coarse_err is not None and fine_err:
            bias = abs(coarse_err - fine_err) / fine_err
        out.append({"J": J, "c": c, "n": fine.n, "error_coarse": coarse_err, "error": fine_err,
                    "relative_bias": bias, "status": row["status"]})
    return out


def run_c_sweep(cfg: StudyConfig) -> Dict:
    J_list, c_list = list(cfg.symbol.J), list(cfg.symbol.c)
    if any(J % 2 == 0 for J in J_list):
        raise ConfigError(f"c sweep needs odd truncation orders, got J={J_list}")
    trace = new_trace("c_sweep")
    grid = _grid(cfg)
    kind = _kind(cfg)

    pseudo: Dict[int, GroundStateResult] = {}
    failures: Dict[int, str] = {}
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        futures = [pool.submit(_timed_point, _pseudo_point, cfg, c, grid, kind) for c in c_list]
        for i, fut in enumerate(futures):
            try:
                result, ms = fut.result()
            except POINT_ERRORS as e:
                logger.warning("sweep.point_failed", stage="pseudo", c=c_list[i], error=str(e))
                failures[i] = f"pseudo-relativistic: {e}"
                add_step(trace, f"pseudo c={c_list[i]:g}", 0, "error", {"error": str(e)})
                continue
            pseudo[i] = result
            add_step(trace, f"pseudo c={c_list[i]:g}", ms, "ok", {"action": result.action})

    pairs = [(J, i) for J in J_list for i in range(len(c_list))]
    rows: List[Dict] = []
    fields: Dict[Tuple[int, int], Field] = {}
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        futures = {
            (J, i): pool.submit(_timed_point, _truncation_point, cfg, J, c_list[i], grid, kind, pseudo[i])
            for J, i in pairs if i in pseudo
        }
        for J, i in pairs:
            if i in failures:
                row = {column: None for column in C_COLUMNS}
                row.update(J=J, c=c_list[i], status=failures[i])
                rows.append(row)
                continue
            (row, Q), ms = futures[(J, i)].result()
            rows.append(row)
            if Q is not None:
                fields[(J, i)] = Q
            add_step(trace, f"truncated J={J} c={c_list[i]:g}", ms,
                     "ok" if row["status"] == "ok" else "error", {"status": row["status"]})
            if row["status"] != "ok":
                logger.warning("sweep.point_failed", stage="truncated", J=J, c=c_list[i], status=row["status"])

    frame = pd.DataFrame(rows, columns=C_COLUMNS)
    write_csv(_out(cfg, "c_sweep.csv"), frame)
    if cfg.output.write_fields:
        for i, result in pseudo.items():
            save_field(cfg.output.dir, f"Q_c_{i:02d}", result.Q)
        for (J, i), Q in fields.items():
            save_field(cfg.output.dir, f"Q_cJ_{J}_{i:02d}", Q)

    fits = {}
    for J in J_list:
        own = [r for r in rows if r["J"] == J]
        fits[f"J={J}"] = {
            "error": _try_fit([(r["c"], r["error"]) for r in own]),
            "error_contraction": _try_fit([(r["c"], r["error_contraction"]) for r in own]),
        }
    write_json(_out(cfg, "rate_fit.json"), fits)

    refinement: List[Dict] = []
    if cfg.sweep.refinement_check:
        i_max = int(np.argmax(c_list))
        coarse = {r["J"]: r["error"] for r in rows if r["c"] == c_list[i_max]}
        refinement = _refinement(cfg, J_list, c_list[i_max], coarse, kind, trace)

    summary = {
        "rows": rows,
        "rate_fit": fits,
        "refinement": refinement,
        "failed_points": sum(1 for r in rows if r["status"] != "ok"),
    }
    write_json(_out(cfg, "manifest.json"), _manifest(cfg, summary))
    _finish(trace, "c_sweep_done", {"points": len(rows), "failed": summary["failed_points"]})
    return summary


STUDIES = {
    "groundstate": run_groundstate,
    "contraction": run_contraction,
    "spectrum": run_spectrum,
    "eps_sweep": run_eps_sweep,
    "c_sweep": run_c_sweep,
}
