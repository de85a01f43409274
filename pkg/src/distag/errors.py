"""Exception hierarchy shared across the package."""


class DistagError(Exception):
    """Base class for all errors raised by this package."""


class DataError(DistagError):
    """Bad input data: unreadable files, format/version mismatches, malformed
    records, unknown tags or words. Maps to CLI exit code 2."""


class NumericError(DistagError):
    """Numeric failure: decomposition did not converge, degenerate geometry,
    all-zero input matrix. Maps to CLI exit code 3."""
