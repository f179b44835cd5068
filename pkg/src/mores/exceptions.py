"""Exception types shared across the package."""


class MoresError(Exception):
    """Base class for all errors raised by this package."""


class NotPositiveDefinite(MoresError):
    """A matrix required to be symmetric positive definite is not."""


class ConvergenceFailure(MoresError):
    """An iterative numerical routine failed to converge."""


class DimensionMismatch(MoresError):
    """Operands have incompatible shapes."""


class ZeroInput(MoresError):
    """An input vector with zero norm makes a rank-one update infeasible."""


class ConfigError(MoresError):
    """Invalid hyperparameter or run configuration."""
