"""Exception types shared across the package.

The CLI maps these onto its exit codes: validation failures exit 1,
unreadable or malformed input files exit 2, undefined metrics exit 3.
"""


class CorevadError(Exception):
    """Base class for all package errors."""


class FormatError(CorevadError):
    """An input file could not be decoded (bad bytes, schema, or header)."""


class ValidationFailure(CorevadError):
    """Inputs decoded fine but violate a documented invariant."""


class UndefinedMetricError(CorevadError):
    """A metric was requested on data where it is mathematically undefined."""
