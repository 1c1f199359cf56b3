# hnls/errors.py
"""
Exception hierarchy. The CLI maps ConfigError to exit code 2 and
SolverError to exit code 1.
"""


class HnlsError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(HnlsError):
    pass


class GridError(ConfigError):
    pass


class SymbolError(ConfigError):
    pass


class AdmissibilityError(ConfigError):
    """Nonlinearity/dimension pairing outside the subcritical range."""


class FieldError(HnlsError):
    """Space-tag or grid mismatch between fields."""


class SolverError(HnlsError):
    pass


class StepSizeCollapse(SolverError):
    pass


class InvertibilityError(SolverError):
    """Linearized operator could not be inverted on the radial subspace."""


class DivergenceError(SolverError):
    pass


class EigensolverError(SolverError):
    pass


class AlignmentError(SolverError):
    pass


class RateFitError(SolverError):
    pass
