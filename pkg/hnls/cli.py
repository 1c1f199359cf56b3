# hnls/cli.py
"""
Command-line entry point.
Usage:
  python -m hnls groundstate --config configs/groundstate.toml
  python -m hnls sweep-eps --config configs/eps.toml --eps 0.1,0.05,0.02,0.01
  python -m hnls sweep-c --config configs/c.toml --J 1 --out runs/
  python -m hnls verify --seed 7
  python -m hnls defaults > defaults.toml

Results go to stdout as JSON, logs and the summary table to stderr.
Exit codes: 0 success, 1 solver failure, 2 configuration error.
"""

import argparse
import json
import sys
from typing import Dict, List, Optional

import numpy as np
from rich.console import Console
from rich.table import Table

from hnls import __version__
from hnls.config import defaults_toml, load_config, overrides_from_args
from hnls.coordinator import STUDIES
from hnls.errors import ConfigError, HnlsError
from hnls.evaluate import run_verify
from hnls.observability import get_logger
from hnls.utils import to_jsonable

logger = get_logger(__name__)

EXIT_OK = 0
EXIT_SOLVER = 1
EXIT_CONFIG = 2

# subcommand -> study kind
COMMANDS = {
    "groundstate": "groundstate",
    "contraction": "contraction",
    "spectrum": "spectrum",
    "sweep-eps": "eps_sweep",
    "sweep-c": "c_sweep",
    "verify": "verify",
}


def _add_run_options(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", type=str, help="TOML run configuration")
    p.add_argument("--n", type=int, help="grid points per axis")
    p.add_argument("--box", type=float, help="box length L")
    p.add_argument("--eps", type=str, help="comma-separated eps values")
    p.add_argument("--c", type=str, help="comma-separated speed-of-light values")
    p.add_argument("--J", type=str, help="comma-separated truncation orders")
    p.add_argument("--out", type=str, help="output directory")
    p.add_argument("--seed", type=int, help="random seed")
    p.add_argument("--tol", type=float, help="ground-state gradient tolerance")


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hnls", description="Ground states of higher-order NLS and Hartree equations")
    p.add_argument("--version", action="version", version=f"hnls {__version__}")
    sub = p.add_subparsers(dest="cmd", required=True)
    helps = {
        "groundstate": "Minimize the action on the Nehari manifold",
        "contraction": "Solve near the base ground state by contraction",
        "spectrum": "Kernel residuals and non-degeneracy constants",
        "sweep-eps": "Variational vs contraction solutions along eps",
        "sweep-c": "Truncated relativistic ground states along c, with rate fit",
        "verify": "Symbol-level and multilinear checks",
    }
    for name, text in helps.items():
        _add_run_options(sub.add_parser(name, help=text))
    sub.add_parser("defaults", help="Print every configuration default as TOML")
    return p


def _summary_table(title: str, summary: Dict) -> Table:
    table = Table(title=title)
    table.add_column("key")
    table.add_column("value")
    for key, value in summary.items():
        if isinstance(value, (dict, list)):
            continue
        if isinstance(value, float):
            value = f"{value:.6e}"
        table.add_row(str(key), str(value))
    return table


def cli_main(argv: Optional[List[str]] = None) -> int:
    console = Console(stderr=True)
    try:
        args = _parser().parse_args(argv)
    except SystemExit as e:
        # argparse exits 0 for --help/--version, 2 for usage errors
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG

    if args.cmd == "defaults":
        sys.stdout.write(defaults_toml())
        return EXIT_OK

    study = COMMANDS[args.cmd]
    try:
        cfg = load_config(args.config, overrides_from_args(args), study=study)
        if study == "verify":
            report = run_verify(cfg)
            shown = report["summary"]
        else:
            report = STUDIES[study](cfg)
            shown = report
    except ConfigError as e:
        logger.error("cli.config_error", error=str(e))
        console.print(f"[red]configuration error:[/red] {e}")
        return EXIT_CONFIG
    except HnlsError as e:
        logger.error("cli.solver_error", error=str(e), kind=type(e).__name__)
        console.print(f"[red]{type(e).__name__}:[/red] {e}")
        return EXIT_SOLVER
    except (np.linalg.LinAlgError, ValueError, ArithmeticError, RuntimeError) as e:
        # numerical failures raised by numpy/scipy inside a run
        logger.error("cli.numerical_error", error=str(e), kind=type(e).__name__)
        console.print(f"[red]numerical failure ({type(e).__name__}):[/red] {e}")
        return EXIT_SOLVER

    print(json.dumps(to_jsonable(report), indent=2, sort_keys=True))
    console.print(_summary_table(f"{args.cmd} -> {cfg.output.dir}", shown))
    return EXIT_OK


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
