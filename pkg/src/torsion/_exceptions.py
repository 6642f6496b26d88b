from __future__ import annotations

from collections.abc import Sequence


class TorsionException(Exception):
    """
    Base exception raised by :mod:`torsion`.
    """


class InfeasibleComputationError(TorsionException):
    """
    Exception raised when an exhaustive enumeration would exceed the budget.
    """

    def __init__(self, what: str, required: int, budget: int, *, unit: str = 'elements') -> None:
        super().__init__(what, required, budget)
        self.what = what
        self.required = required
        self.budget = budget
        self.unit = unit

    def __str__(self) -> str:
        return f'Enumerating {self.what} needs {self.required} {self.unit}, over the budget of {self.budget}'


class ShapeError(TorsionException, ValueError):
    """
    Exception raised when subgroup shapes or exponent profiles do not fit the level or the factor list.
    """


class ReductionNotApplicableError(TorsionException):
    """
    Exception raised when the Galois-stable reduction is requested for a non-CM factor.
    """


class SpecValidationError(TorsionException):
    """
    Exception raised when a variety spec document is invalid.

    Every problem found is reported, not only the first one.
    """

    def __init__(self, errors: Sequence[str]) -> None:
        super().__init__(*errors)
        self.errors = tuple(errors)

    def __str__(self) -> str:
        if len(self.errors) == 1:
            return f'Invalid spec: {self.errors[0]}'
        return 'Invalid spec:\n' + '\n'.join(f'  - {error}' for error in self.errors)


class ConfigError(TorsionException):
    """
    Exception raised when the configuration file or environment is invalid.
    """

    def __str__(self) -> str:
        return f'Invalid configuration: {self.args[0]}'


class SpecTypoWarning(Warning):
    """
    Warning raised when a possible typo is found in a spec or config document.
    """
