"""Exception types raised by the package."""


class DegenerateDistributionError(ValueError):
    """Raised when a quantity needs a positive mean degree and the mean is zero."""


class ConditioningError(ArithmeticError):
    """A triangular solve produced probabilities outside the admissible range."""


class NonConvergenceError(RuntimeError):
    """A fixed-point or root search failed to converge."""


class ConfigError(ValueError):
    """Malformed experiment configuration.

    ``where`` carries the section/field (and line, when known) for diagnostics.
    """

    def __init__(self, message: str, where: str | None = None):
        self.where = where
        super().__init__(f"{where}: {message}" if where else message)


class NoRootError(ValueError):
    """No parameter value reaches the requested threshold."""
