"""Shared exception hierarchy.

Validation errors mean the input data or parameters are malformed; numerical
errors mean a computation failed to meet its accuracy or convergence contract.
The CLI maps the former to exit status 1 and the latter to exit status 2.
"""


class RecurKitError(Exception):
    """Base class for all recurkit exceptions."""


class ValidationError(RecurKitError, ValueError):
    """Invalid input data or parameters."""


class NumericalError(RecurKitError, RuntimeError):
    """A computation failed its accuracy or convergence contract."""
