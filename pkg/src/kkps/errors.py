"""Exception hierarchy shared by all kkps modules."""

from __future__ import annotations


class KKPSError(Exception):
    """Base class for every error raised by this package."""


class ParamError(KKPSError, ValueError):
    pass


class NonPositive(ParamError):
    pass


class OrderingViolation(ParamError):
    def __init__(self, inequality: str, values: dict[str, int]):
        self.inequality = inequality
        self.values = dict(values)
        shown = ", ".join(f"{k}={v}" for k, v in values.items())
        super().__init__(f"{inequality} violated ({shown})")


class InvalidDistParams(ParamError):
    pass


class IndexOutOfRange(KKPSError, IndexError):
    pass


class FitError(KKPSError, ValueError):
    pass


class InsufficientData(FitError):
    pass


class DegenerateDistribution(FitError):
    pass


class ZeroTotalUtility(KKPSError, ValueError):
    pass


class UnknownPreset(KKPSError, KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown preset"


class InsufficientCells(KKPSError, ValueError):
    pass


class ConfigError(KKPSError, ValueError):
    pass


class ParseError(ConfigError):
    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)


class UnknownKey(ConfigError):
    pass


class SchemaMismatch(KKPSError, ValueError):
    pass


class UsageError(KKPSError):
    def __init__(self, message: str, token: str | None = None):
        self.token = token
        super().__init__(message)
