"""Exception types raised across the package."""


class ValidationError(ValueError):
    """Input outside the domain of an operation."""


class NoTransitionError(ValidationError):
    """No first-order transition exists at the requested parameters."""


class NoCriticalPointError(ValidationError):
    """The first-order line has no terminus (p = 3)."""


class NoInteriorMinimumError(ValidationError):
    """The gap minimum over a bracket sits on a bracket end."""


class ClassicallyAllowedError(ValidationError):
    """Imaginary-momentum magnitude requested where the motion is not forbidden."""


class NumericalError(RuntimeError):
    """A numerical procedure failed to reach its tolerance."""
