"""Exception hierarchy shared across the package.

Exit-code mapping used by the CLI: ValidationError -> 1,
BudgetError / PrecisionError -> 2, InvariantViolation -> 3.
"""


class KernelError(Exception):
    """Base class for all package errors."""


class ValidationError(KernelError):
    """Malformed or inconsistent input (presentations, charts, specs)."""


class PrecisionError(KernelError):
    """An operation cannot be carried out at the available precision."""


class BudgetError(KernelError):
    """A configured size / degree / level budget was exceeded."""


class InvariantViolation(KernelError):
    """An internal identity that must hold failed; falsifies the build."""
