class ConvergenceError(ArithmeticError):
    """An iterative numeric routine (eigensolver, root finder) failed to converge."""


class NotUsableModeError(ValueError):
    """A mode's eigenvalue is numerically zero and cannot be divided by."""
