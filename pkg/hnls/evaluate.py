# hnls/evaluate.py
"""
Verification harness: symbol-level and multilinear checks that need no
ground state. Every finding is a report entry; nothing here raises on a
failed check.

  lemma        lower bound of the odd relativistic truncations
  taylor       remainder of the truncations against s^(J+1) / c^(2J)
  ellipticity  lattice gamma for the configured and extra symbols
  multilinear  product estimates over seeded random fields, n vs 2n
  remainder    quadratic remainder of N' at a random real point
"""

from __future__ import annotations

import os
from typing import Dict, List

import numpy as np

from hnls.config import StudyConfig, VerifyConfig
from hnls.coordinator import fit_rate
from hnls.errors import HnlsError
from hnls.numerics.nonlinearity import make_nonlinearity, multilinear_ratio, remainder_ratio
from hnls.numerics.operator_symbols import (
    build_symbol,
    ellipticity_gamma,
    taylor_remainder_ratio,
    verify_positivity_lemma,
)
from hnls.numerics.spectral_core import GridSpec, make_grid, random_smooth_field, sobolev_norm
from hnls.observability import end_trace, get_logger, log_event, new_trace, record_step
from hnls.utils import fingerprint_config, versions, write_json

logger = get_logger(__name__)

REMAINDER_SCALES = (1e-1, 1e-2, 1e-3)
REMAINDER_SLOPE_TOL = 0.15


def check_lemma(vc: VerifyConfig) -> Dict:
    grid = make_grid(1, vc.lemma_n, vc.lemma_box)
    checks = []
    for k in vc.lemma_k:
        for m, c in vc.lemma_mc:
            report = verify_positivity_lemma(m, c, k, grid, bound_fraction=vc.bound_fraction)
            checks.append({"k": k, **report.to_dict()})
    return {
        "checks": checks,
        "min_ratio": min(ch["min_ratio"] for ch in checks),
        "passed": all(ch["passed"] for ch in checks),
    }


def check_taylor(vc: VerifyConfig) -> Dict:
    checks = []
    for J in vc.taylor_J:
        reports = [taylor_remainder_ratio(vc.taylor_m, c, J, vc.taylor_s_max, vc.taylor_samples)
                   for c in vc.taylor_c]
        sups = [r.sup_ratio for r in reports]
        finite = all(r.finite for r in reports)
        # relative change of the sup as c steps through the list
        variation = max((abs(b - a) / a for a, b in zip(sups, sups[1:])), default=0.0) if finite else None
        checks.append({
            "J": J,
            "reports": [r.to_dict() for r in reports],
            "variation": variation,
            "passed": bool(finite and variation is not None and variation < vc.taylor_stability),
        })
    return {"checks": checks, "passed": all(ch["passed"] for ch in checks)}


def _configured_symbols(cfg: StudyConfig) -> List[Dict]:
    s = cfg.symbol
    if s.kind == "laplacian":
        return [{"kind": "laplacian"}]
    if s.kind == "higher_order_radial":
        return [{"kind": s.kind, "eps": e, "coefficients": list(s.coefficients)} for e in s.eps]
    if s.kind == "higher_order_aniso":
        return [{"kind": s.kind, "eps": e, "terms": [list(t) for t in s.terms]} for e in s.eps]
    if s.kind == "pseudo_relativistic":
        return [{"kind": s.kind, "m": s.m, "c": c} for c in s.c]
    return [{"kind": s.kind, "m": s.m, "c": c, "J": J} for J in s.J for c in s.c]


def check_ellipticity(cfg: StudyConfig) -> Dict:
    grid = make_grid(cfg.grid.dim, cfg.grid.n, cfg.grid.box)
    checks = []
    for params in _configured_symbols(cfg) + [dict(p) for p in cfg.verify.symbols]:
        params = dict(params)
        kind = params.pop("kind")
        entry: Dict = {"symbol": {"kind": kind, **params}}
        try:
            entry.update(ellipticity_gamma(build_symbol(kind, **params), grid).to_dict())
        except HnlsError as e:
            entry.update(gamma=None, argmin=None, leading_sign_ok=None, passed=False, error=str(e))
        if not entry["passed"]:
            logger.info("verify.not_elliptic", symbol=entry["symbol"], gamma=entry["gamma"],
                        argmin=entry["argmin"])
        checks.append(entry)
    return {"checks": checks, "failed": [ch["symbol"] for ch in checks if not ch["passed"]]}


def _max_ratio(grid: GridSpec, kind, seeds: np.ndarray, vc: VerifyConfig, modes: int) -> float:
    """Largest ratio over the seeded samples, each field cut to the band of `grid`."""
    best = 0.0
    for row in seeds:
        fields = [random_smooth_field(grid, int(s), vc.multilinear_decay, modes=modes, real=True) for s in row]
        best = max(best, multilinear_ratio(fields, kind))
    return best


def check_multilinear(vc: VerifyConfig, seed: int) -> Dict:
    cases = {
        "power": (make_nonlinearity("power", 1, k=1), 1, vc.multilinear_power_n, vc.multilinear_power_box),
        "hartree": (make_nonlinearity("hartree", 3), 3, vc.multilinear_hartree_n, vc.multilinear_hartree_box),
    }
    out: Dict = {}
    rng = np.random.default_rng(seed)
    for name, (kind, dim, n, box) in cases.items():
        arity = 3
        seeds = rng.integers(0, 2 ** 31 - 1, size=(vc.multilinear_samples, arity))
        # drawn on the fine band; the coarse grid holds their truncation
        modes = 2 * n
        coarse = _max_ratio(make_grid(dim, n, box), kind, seeds, vc, modes)
        fine = _max_ratio(make_grid(dim, 2 * n, box), kind, seeds, vc, modes)
        change = abs(fine - coarse) / coarse if coarse else None
        out[name] = {
            "n": n,
            "max_ratio": coarse,
            "max_ratio_refined": fine,
            "relative_change": change,
            "passed": bool(change is not None and change < vc.multilinear_stability),
        }
    out["passed"] = all(v["passed"] for v in out.values() if isinstance(v, dict))
    return out


def check_remainder(vc: VerifyConfig, seed: int) -> Dict:
    """The remainder ratio must shrink linearly with ||r||_{H^1}."""
    cases = {
        "power": (make_nonlinearity("power", 1, k=1), make_grid(1, vc.multilinear_power_n, vc.multilinear_power_box)),
        "hartree": (make_nonlinearity("hartree", 3),
                    make_grid(3, vc.multilinear_hartree_n, vc.multilinear_hartree_box)),
    }
    out: Dict = {}
    for name, (kind, grid) in cases.items():
        u = random_smooth_field(grid, seed, vc.multilinear_decay, real=True)
        direction = random_smooth_field(grid, seed + 1, vc.multilinear_decay, real=True)
        points = []
        for t in REMAINDER_SCALES:
            r = direction * t
            points.append((sobolev_norm(r, 1), remainder_ratio(u, r, kind)))
        fit = fit_rate(points)
        out[name] = {
            "points": [{"r_norm": a, "ratio": b} for a, b in points],
            "slope": fit.slope,
            "passed": bool(abs(fit.slope - 1.0) < REMAINDER_SLOPE_TOL),
        }
    out["passed"] = all(v["passed"] for v in out.values() if isinstance(v, dict))
    return out


def run_verify(cfg: StudyConfig) -> Dict:
    trace = new_trace("verify")
    vc = cfg.verify
    report = {
        "lemma": record_step(trace, "lemma", check_lemma, vc),
        "taylor": record_step(trace, "taylor", check_taylor, vc),
        "ellipticity": record_step(trace, "ellipticity", check_ellipticity, cfg),
        "multilinear": record_step(trace, "multilinear", check_multilinear, vc, cfg.seed),
        "remainder": record_step(trace, "remainder", check_remainder, vc, cfg.seed),
    }
    report["summary"] = {
        "lemma": report["lemma"]["passed"],
        "taylor": report["taylor"]["passed"],
        "ellipticity_failures": len(report["ellipticity"]["failed"]),
        "multilinear": report["multilinear"]["passed"],
        "remainder": report["remainder"]["passed"],
    }
    write_json(os.path.join(cfg.output.dir, "verify.json"), report)
    config = cfg.model_dump(mode="json")
    write_json(os.path.join(cfg.output.dir, "manifest.json"), {
        "study": cfg.study,
        "config": config,
        "fingerprint": fingerprint_config(config),
        "versions": versions(),
        "results": report["summary"],
    })
    trace_path = end_trace(trace)
    log_event("verify_done", {**report["summary"], "trace": trace_path})
    return report
