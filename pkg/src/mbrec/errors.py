"""Exception taxonomy shared across the package.

Every error raised by mbrec derives from :class:`MbrecError`, so callers
(notably the CLI) can map any library failure to a single exit path.
"""


class MbrecError(Exception):
    """Base class for all mbrec errors."""


class ParseError(MbrecError):
    """A data file line could not be parsed."""


class SchemaError(MbrecError):
    """A record does not match the declared behavior schema."""


class DimensionError(MbrecError):
    """Array shapes or index bounds are inconsistent."""


class NumericError(MbrecError):
    """A non-finite value appeared where finite math was required."""


class FormatError(MbrecError):
    """A checkpoint file has the wrong magic bytes or version."""


class CorruptionError(MbrecError):
    """A checkpoint file is truncated or fails its integrity check."""


class ConsistencyError(MbrecError):
    """Two artifacts (e.g. checkpoint and data) do not describe the same problem."""


class AblationError(MbrecError):
    """An ablation request is self-contradictory (e.g. dropping the target behavior)."""
