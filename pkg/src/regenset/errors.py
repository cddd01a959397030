"""Exception types shared by every module."""


class ValidationError(ValueError):
    """A precondition on an argument was violated."""


class NonIntersectingRegimeError(ValidationError):
    """The requested intersection is almost surely empty (beta* <= 0)."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""
