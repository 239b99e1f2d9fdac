"""Exception hierarchy shared by the core modules and mapped to CLI exit codes."""


class TltError(Exception):
    """Base class for every error raised on purpose by this package."""

    exit_code = 1


class UsageError(TltError):
    """Inconsistent or missing command-line options."""

    exit_code = 1


class InputDataError(TltError, ValueError):
    """Input values violate a precondition (out-of-range p-value, bad bounds, unreadable file...)."""

    exit_code = 2


class NumericError(TltError, ArithmeticError):
    """A numerical routine failed to converge."""

    exit_code = 3
