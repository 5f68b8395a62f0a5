"""Exception types shared across the pipeline.

Each maps to a CLI exit code: UsageError -> 1, DataError -> 2,
NumericalError -> 3.
"""


class UsageError(Exception):
    """Bad command-line invocation or config (missing/invalid keys)."""


class DataError(Exception):
    """Malformed or inconsistent input data."""


class NumericalError(Exception):
    """Non-finite values or other numerical failure during training."""
