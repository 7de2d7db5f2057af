"""Exceptions raised by the rate-distortion toolkit."""


class TvarRdError(Exception):
    """Base class for every error raised by this package."""


class DomainError(TvarRdError, ValueError):
    """An argument lies outside the domain of the operation (r, omega, m, theta, indices)."""


class ModelConfigError(TvarRdError, ValueError):
    """A model description is malformed or violates a model invariant."""


class InputError(TvarRdError, ValueError):
    """Numeric input is unusable, e.g. non-finite matrix entries or a malformed curve file."""


class DistortionRangeError(DomainError):
    """The requested distortion lies outside (0, d_max]."""

    def __init__(self, d_target: float, d_max: float):
        self.d_target = d_target
        self.d_max = d_max
        super().__init__(f"Distortion {d_target!r} is outside (0, d_max={d_max!r}]")


class ConvergenceError(TvarRdError, ArithmeticError):
    """Quadrature refinement ran out of budget before meeting its tolerance."""

    def __init__(self, previous: float, last: float, level: int):
        self.previous = previous
        self.last = last
        self.level = level
        super().__init__(f"Quadrature did not converge after {level} refinements (last two estimates {previous!r}, {last!r})")


class ModelValidationError(TvarRdError, ValueError):
    """The model's inverse spectrum comes too close to zero for the asymptotic formulas."""

    def __init__(self, feedback: str, g_inf: float, g_floor: float):
        self.feedback = feedback
        self.g_inf = g_inf
        self.g_floor = g_floor
        super().__init__(feedback)
