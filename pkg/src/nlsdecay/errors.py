"""Exception and warning types shared across the package."""


class ConfigError(ValueError):
    """Invalid user input: bad parameters, malformed config files, unknown keys."""


class NumericalError(RuntimeError):
    """A run produced numbers that cannot be trusted."""


class NonFiniteError(NumericalError):
    """NaN or Inf appeared in a field."""


class FixedPointDivergence(NumericalError):
    """The implicit midpoint fixed-point iteration did not reach tolerance."""

    def __init__(self, residual: float, iterations: int):
        self.residual = residual
        self.iterations = iterations
        super().__init__(
            f"fixed-point iteration stalled at residual {residual:.3e} "
            f"after {iterations} iterations"
        )


class GaugeViolation(NumericalError):
    """Im(f(u) conj(u)) is not zero: the nonlinearity breaks charge conservation."""

    def __init__(self, defect: float, tol: float):
        self.defect = defect
        self.tol = tol
        super().__init__(f"gauge defect {defect:.3e} exceeds {tol:.1e}")


class TailMassBreach(NumericalError):
    """Mass reached the edge of a periodic box standing in for the whole space."""


class DegenerateWarning(UserWarning):
    """A bound quantity collapsed to a trivial value (zero radius, t = 0, ...)."""
