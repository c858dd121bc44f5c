"""Exception hierarchy.

Every error raised on purpose by the package derives from ``GestureError`` and
belongs to one of three families, which the CLI maps onto exit codes.
"""


class GestureError(Exception):
    """Base class for all package errors."""


class ConfigError(GestureError, ValueError):
    """Invalid parameters or configuration documents."""


class DataError(GestureError, ValueError):
    """Malformed or inconsistent input data."""


class ProcessingError(GestureError, RuntimeError):
    """A pipeline stage could not produce a result."""


class InvalidConfigError(ConfigError):
    pass


class InvalidClutterFactorError(ConfigError):
    pass


class DelayExceedsFrameError(ConfigError):
    """An echo arrives later than one pulse period."""


class LengthMismatchError(DataError):
    pass


class BadBlockLengthError(DataError):
    pass


class DimensionMismatchError(DataError):
    pass


class SampleRateMismatchError(DataError):
    pass


class MalformedFileError(DataError):
    pass


class MalformedWavError(MalformedFileError):
    pass


class OneClassInputError(DataError):
    pass


class ClassMissingError(DataError):
    """A class has no members in a train or test split."""


class EmptyFrameError(ProcessingError):
    pass


class SingularSystemError(ProcessingError):
    pass
