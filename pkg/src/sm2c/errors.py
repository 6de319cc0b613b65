"""Exception types shared across the package.

CLI exit-code mapping: InvalidInputError -> 1, NumericError -> 2.
"""


class InvalidInputError(ValueError):
    """An operation received arguments outside its contract."""


class NumericError(ArithmeticError):
    """A computation produced or received non-finite values."""
