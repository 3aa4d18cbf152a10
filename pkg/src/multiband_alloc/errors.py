"""Exception types shared across the library.

Each class carries the process exit code the CLI uses when it surfaces.
"""


class AllocationError(Exception):
    """Base class for every error raised by this library."""

    exit_code = 1


class ValidationError(AllocationError, ValueError):
    """A parameter or data-structure invariant was violated."""

    exit_code = 2


class InfeasibleError(AllocationError, RuntimeError):
    """No feasible assignment or allocation exists for the given instance."""

    exit_code = 3


class GuardError(AllocationError, RuntimeError):
    """An instance exceeds a configured size guard of an exhaustive method."""

    exit_code = 4
