"""Exceptions raised by the toolkit."""


class ZeroResourceError(Exception):
    """Base class for toolkit errors."""

    exit_code: int = 2


class DataError(ZeroResourceError, ValueError):
    """Input data is malformed or inconsistent."""

    exit_code = 2


class ArchiveError(DataError):
    """A feature archive or dataset file cannot be decoded."""


class CheckpointError(DataError):
    """A checkpoint cannot be decoded or does not match the requested model."""


class NumericError(ZeroResourceError, ArithmeticError):
    """A numeric check (gradient check, trend check) failed."""

    exit_code = 3
