"""Exception types shared across the package."""


class IntegrationError(RuntimeError):
    """Adaptive step control failed (step underflow or too many steps)."""

    def __init__(self, message, *, t=None, h=None, n_steps=None):
        super().__init__(message)
        self.t = t
        self.h = h
        self.n_steps = n_steps


class NumericError(ArithmeticError):
    """NaN/inf encountered, or a physical invariant was violated numerically."""


class BoundarySolutionError(RuntimeError):
    """A bracketed maximization found its best value on the bracket boundary."""

    def __init__(self, message, *, x_best, f_best):
        super().__init__(message)
        self.x_best = x_best
        self.f_best = f_best


class ConfigError(ValueError):
    """Configuration document failed to parse or validate."""
