"""Exception hierarchy shared across the toolkit."""


class EvverError(Exception):
    """Base class for all toolkit errors."""


class DataError(EvverError):
    """Malformed or inconsistent input data; maps to CLI exit code 2."""


class FormatError(DataError):
    """A binary or structured file failed header/payload validation."""


class DimensionError(DataError):
    """Feature/model dimensions do not chain."""


class FetchError(EvverError):
    """A network fetch failed. ``retryable`` marks transient failures."""

    def __init__(self, message: str, retryable: bool = True):
        super().__init__(message)
        self.retryable = retryable


class TrainingDivergedError(EvverError):
    """Loss became NaN/Inf during optimization."""

    def __init__(self, message: str, epoch: int, batch: int):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


class UsageError(EvverError):
    """Bad CLI invocation; maps to exit code 1."""
