"""Exception hierarchy shared by the library and the command line.

Each class carries the process exit status the CLI reports for it.
"""

from __future__ import annotations


class TensorInvError(Exception):
    exit_code = 1


class DomainError(TensorInvError, ValueError):
    """Input outside the mathematical domain of an operation."""

    exit_code = 1


class BudgetExceeded(TensorInvError):
    """A configured resource budget would be exceeded; no partial answer is given."""

    exit_code = 2


class Inconclusive(TensorInvError):
    """The search ran out of budget before it could decide the answer."""

    exit_code = 2


class InvariantViolation(TensorInvError, AssertionError):
    """An internal consistency check failed. Always a bug."""

    exit_code = 3
