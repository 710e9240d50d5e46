"""Exception and warning types shared across the package."""

__all__ = [
    "PoleError",
    "UnsupportedFormError",
    "ConvergenceError",
    "AccuracyWarning",
]


class PoleError(ValueError):
    """An evaluation point coincides with a pole of the secular function."""


class UnsupportedFormError(ValueError):
    """The input matrix is outside the class a solver can reduce."""


class ConvergenceError(RuntimeError):
    """An iteration hit its cap without meeting its accuracy target."""


class AccuracyWarning(UserWarning):
    """A computed quantity may not reach high relative accuracy."""
