# hnls/config.py
"""
Run configuration: a TOML file validated into frozen pydantic models.

Environment (read once, .env honoured):
  HNLS_WORKERS    overrides `workers`
  HNLS_EVENT_LOG  events file (see observability.logger)
  HNLS_TRACE_DIR  trace directory (see observability.traces)
"""

from __future__ import annotations

import math
import os
import sys
from typing import Any, Dict, List, Literal, Mapping, Optional, Tuple

import tomli_w
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from hnls.errors import ConfigError

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover
    import tomli as tomllib

load_dotenv()

StudyKind = Literal["groundstate", "contraction", "spectrum", "eps_sweep", "c_sweep", "verify"]
SymbolKind = Literal[
    "laplacian", "higher_order_radial", "higher_order_aniso",
    "relativistic_truncation", "pseudo_relativistic",
]


def _strictly_monotone(values: List[float], name: str) -> List[float]:
    if not values:
        raise ValueError(f"{name} must not be empty")
    diffs = [b - a for a, b in zip(values, values[1:])]
    if diffs and not (all(d > 0 for d in diffs) or all(d < 0 for d in diffs)):
        raise ValueError(f"{name} must be strictly monotone, got {values}")
    return values


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


class GridConfig(_Section):
    dim: int = 1
    n: int = 512
    box: float = 40.0

    @model_validator(mode="after")
    def _check(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"grid.dim must be 1, 2 or 3, got {self.dim}")
        if self.n < 8 or self.n & (self.n - 1):
            raise ValueError(f"grid.n must be a power of two >= 8, got {self.n}")
        if not (math.isfinite(self.box) and self.box > 0):
            raise ValueError(f"grid.box must be positive, got {self.box}")
        return self


class SymbolConfig(_Section):
    kind: SymbolKind = "laplacian"
    eps: List[float] = Field(default_factory=lambda: [0.0])
    # a_2, a_3, ... of the radial family
    coefficients: List[float] = Field(default_factory=lambda: [1.0])
    # anisotropic family: [[multi-index], coefficient] pairs
    terms: List[Tuple[List[int], float]] = Field(default_factory=list)
    m: float = 1.0
    c: List[float] = Field(default_factory=lambda: [2.0, 4.0, 8.0, 16.0])
    J: List[int] = Field(default_factory=lambda: [1])

    @field_validator("eps")
    @classmethod
    def _eps(cls, v):
        if any(e < 0 for e in v):
            raise ValueError("symbol.eps values must be >= 0")
        return _strictly_monotone(v, "symbol.eps")

    @field_validator("c")
    @classmethod
    def _c(cls, v):
        if any(x <= 0 for x in v):
            raise ValueError("symbol.c values must be positive")
        return _strictly_monotone(v, "symbol.c")

    @field_validator("J")
    @classmethod
    def _j(cls, v):
        if any(j < 1 or j > 20 for j in v):
            raise ValueError("symbol.J values must lie in [1, 20]")
        return _strictly_monotone(v, "symbol.J")

    @field_validator("m")
    @classmethod
    def _m(cls, v):
        if v <= 0:
            raise ValueError("symbol.m must be positive")
        return v


class NonlinearityConfig(_Section):
    kind: Literal["power", "hartree"] = "power"
    k: int = 1

    @field_validator("k")
    @classmethod
    def _k(cls, v):
        if v < 1:
            raise ValueError("nonlinearity.k must be >= 1")
        return v


class HartreeConfig(_Section):
    truncation_radius: Optional[float] = None


class DealiasConfig(_Section):
    enabled: bool = False
    # None means the 2/(p+1) rule
    fraction: Optional[float] = None


class SolverConfig(_Section):
    tol: float = 1e-10
    nehari_tol: float = 1e-12
    max_iters: int = 5000
    starts: int = 3
    init_widths: List[float] = Field(default_factory=lambda: [1.0, 0.6, 1.8])
    step_min: float = 0.05
    step_max: float = 2.0
    step_floor: float = 1e-8
    tail_threshold: float = 1e-8

    @model_validator(mode="after")
    def _check(self):
        for name in ("tol", "nehari_tol", "step_min", "step_max", "step_floor", "tail_threshold"):
            if not getattr(self, name) > 0:
                raise ValueError(f"solver.{name} must be positive")
        if self.step_min > self.step_max:
            raise ValueError("solver.step_min must not exceed solver.step_max")
        if self.starts < 1 or len(self.init_widths) < self.starts:
            raise ValueError("solver.init_widths must provide one width per start")
        return self


class ContractionConfig(_Section):
    tol: float = 1e-11
    max_iters: int = 200
    inner_tol: float = 1e-12
    inner_max_iters: int = 2000
    divergence_patience: int = 5
    beta0: Optional[float] = None
    write_log: bool = True

    @model_validator(mode="after")
    def _check(self):
        if not (self.tol > 0 and self.inner_tol > 0):
            raise ValueError("contraction tolerances must be positive")
        if not self.inner_tol < self.tol:
            raise ValueError("contraction.inner_tol must be smaller than contraction.tol")
        return self


class SpectrumConfig(_Section):
    n_eigs: int = 6
    tol: float = 1e-9
    max_iters: int = 400
    signs: List[Literal["+", "-"]] = Field(default_factory=lambda: ["+", "-"])
    tail_index: int = 30

    @field_validator("tol")
    @classmethod
    def _tol(cls, v):
        if v <= 0:
            raise ValueError("spectrum.tol must be positive")
        return v

    @field_validator("tail_index")
    @classmethod
    def _tail_index(cls, v):
        if v < 0:
            raise ValueError("spectrum.tail_index must be >= 0 (0 disables it)")
        return v


class SweepConfig(_Section):
    warm_start: bool = True
    refinement_check: bool = True
    # relative identification tolerance reported per row
    identification_tol: float = 1e-6


class VerifyConfig(_Section):
    lemma_k: List[int] = Field(default_factory=lambda: [1, 2, 3, 4])
    lemma_mc: List[Tuple[float, float]] = Field(default_factory=lambda: [(1.0, 1.0), (1.0, 4.0), (2.0, 8.0)])
    lemma_n: int = 128
    lemma_box: float = 2.0 * math.pi
    bound_fraction: float = 0.5
    taylor_J: List[int] = Field(default_factory=lambda: [1, 2, 3])
    taylor_c: List[float] = Field(default_factory=lambda: [4.0, 8.0, 16.0])
    taylor_m: float = 1.0
    taylor_s_max: float = 1.0
    taylor_samples: int = 400
    taylor_stability: float = 0.2
    multilinear_samples: int = 100
    multilinear_decay: float = 4.0
    multilinear_power_n: int = 64
    multilinear_power_box: float = 2.0 * math.pi
    multilinear_hartree_n: int = 16
    multilinear_hartree_box: float = 2.0 * math.pi
    multilinear_stability: float = 0.1
    # extra symbols whose ellipticity is reported; each table has `kind` plus parameters
    symbols: List[Dict[str, Any]] = Field(default_factory=lambda: [
        {"kind": "higher_order_radial", "eps": 1.0, "coefficients": [-0.1]},
    ])


class OutputConfig(_Section):
    dir: str = "runs"
    write_fields: bool = True


class StudyConfig(_Section):
    study: StudyKind = "groundstate"
    seed: int = 0
    workers: int = 1
    grid: GridConfig = Field(default_factory=GridConfig)
    symbol: SymbolConfig = Field(default_factory=SymbolConfig)
    nonlinearity: NonlinearityConfig = Field(default_factory=NonlinearityConfig)
    hartree: HartreeConfig = Field(default_factory=HartreeConfig)
    dealias: DealiasConfig = Field(default_factory=DealiasConfig)
    solver: SolverConfig = Field(default_factory=SolverConfig)
    contraction: ContractionConfig = Field(default_factory=ContractionConfig)
    spectrum: SpectrumConfig = Field(default_factory=SpectrumConfig)
    sweep: SweepConfig = Field(default_factory=SweepConfig)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)

    @model_validator(mode="after")
    def _admissible(self):
        d = self.grid.dim
        if self.nonlinearity.kind == "hartree" and d != 3:
            raise ValueError(f"admissibility: the Hartree nonlinearity requires d = 3, got d = {d}")
        if self.nonlinearity.kind == "power" and d == 3 and self.nonlinearity.k != 1:
            raise ValueError(
                f"admissibility: power nonlinearity in d = 3 requires k = 1, got k = {self.nonlinearity.k}"
            )
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.spectrum.n_eigs < d + 2:
            raise ValueError(f"spectrum.n_eigs must be at least d + 2 = {d + 2}, got {self.spectrum.n_eigs}")
        return self


def _deep_merge(base: Dict[str, Any], extra: Mapping[str, Any]) -> Dict[str, Any]:
    out = dict(base)
    for key, value in extra.items():
        if isinstance(value, Mapping) and isinstance(out.get(key), Mapping):
            out[key] = _deep_merge(out[key], value)
        else:
            out[key] = value
    return out


def parse_list(text: str, cast=float) -> List:
    """'0.1,0.05' -> [0.1, 0.05]"""
    try:
        return [cast(part) for part in str(text).split(",") if part.strip()]
    except ValueError as e:
        raise ConfigError(f"cannot parse list {text!r}: {e}") from e


def overrides_from_args(args) -> Dict[str, Any]:
    """Map CLI flags onto config sections; unset flags are skipped."""
    out: Dict[str, Any] = {}
    if getattr(args, "n", None) is not None:
        out.setdefault("grid", {})["n"] = args.n
    if getattr(args, "box", None) is not None:
        out.setdefault("grid", {})["box"] = args.box
    if getattr(args, "eps", None) is not None:
        out.setdefault("symbol", {})["eps"] = parse_list(args.eps)
    if getattr(args, "c", None) is not None:
        out.setdefault("symbol", {})["c"] = parse_list(args.c)
    if getattr(args, "J", None) is not None:
        out.setdefault("symbol", {})["J"] = parse_list(args.J, int)
    if getattr(args, "tol", None) is not None:
        out.setdefault("solver", {})["tol"] = args.tol
    if getattr(args, "seed", None) is not None:
        out["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        out.setdefault("output", {})["dir"] = args.out
    return out


def build_config(data: Mapping[str, Any], overrides: Optional[Mapping[str, Any]] = None) -> StudyConfig:
    merged = _deep_merge(dict(data), overrides or {})
    workers_env = os.getenv("HNLS_WORKERS")
    if workers_env:
        try:
            merged["workers"] = int(workers_env)
        except ValueError as e:
            raise ConfigError(f"HNLS_WORKERS must be an integer, got {workers_env!r}") from e
    try:
        return StudyConfig.model_validate(merged)
    except ValidationError as e:
        messages = "; ".join(
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}" for err in e.errors()
        )
        raise ConfigError(messages) from e


def load_config(path: Optional[str] = None, overrides: Optional[Mapping[str, Any]] = None,
                study: Optional[str] = None) -> StudyConfig:
    data: Dict[str, Any] = {}
    if path:
        try:
            with open(path, "rb") as f:
                data = tomllib.load(f)
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        except tomllib.TOMLDecodeError as e:
            raise ConfigError(f"invalid TOML in {path}: {e}") from e
    if study is not None:
        data["study"] = study
    return build_config(data, overrides)


def defaults_toml() -> str:
    """Every default as TOML."""
    data = StudyConfig().model_dump(mode="json", exclude_none=True)
    return tomli_w.dumps(data)
