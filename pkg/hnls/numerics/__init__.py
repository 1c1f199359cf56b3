# Makes "numerics" importable; the commonly used entry points
from .spectral_core import Field, GridSpec, make_grid
from .operator_symbols import build_symbol, ellipticity_gamma
from .nonlinearity import make_nonlinearity
from .groundstate import GroundStateProblem, align, minimize
from .contraction import contraction_solve
from .linearization import beta_estimate, kernel_residuals
