import math

import numpy as np
import pytest

from hnls.config import SolverConfig
from hnls.numerics.groundstate import GroundStateProblem, minimize
from hnls.numerics.nonlinearity import PowerNLS
from hnls.numerics.operator_symbols import Laplacian
from hnls.numerics.spectral_core import make_grid

SOLITON_ACTION = 4.0 / 3.0


@pytest.fixture(autouse=True)
def _trace_dir(tmp_path, monkeypatch):
    """Keep run traces out of the working tree."""
    monkeypatch.setenv("HNLS_TRACE_DIR", str(tmp_path / "traces"))
    monkeypatch.delenv("HNLS_WORKERS", raising=False)


@pytest.fixture(scope="session")
def grid_1d():
    return make_grid(1, 64, 2.0 * math.pi)


@pytest.fixture(scope="session")
def grid_3d():
    return make_grid(3, 16, 2.0 * math.pi)


@pytest.fixture(scope="session")
def soliton_problem():
    """1D cubic NLS on [-20, 20) with 256 points."""
    return GroundStateProblem(symbol=Laplacian(), kind=PowerNLS(k=1), grid=make_grid(1, 256, 40.0))


@pytest.fixture(scope="session")
def soliton(soliton_problem):
    return minimize(soliton_problem, cfg=SolverConfig(tol=1e-11), seed=0)


@pytest.fixture(scope="session")
def soliton_exact(soliton_problem):
    x = soliton_problem.grid.x[0]
    return math.sqrt(2.0) / np.cosh(x)
