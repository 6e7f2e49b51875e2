"""Shared exception types.

Validation problems (bad inputs, violated preconditions) raise ValueError.
NumericalError marks computations that started from valid inputs but could
not be completed reliably (zero on a counting contour, negative convolved
density, non-integral winding); the command line maps it to exit code 1.
"""


class NumericalError(RuntimeError):
    """A numerical procedure failed to reach its accuracy contract."""


class BudgetExceededError(ValueError):
    """A deterministic computation would exceed its configured cost budget."""
