"""Exception types shared across the package.

The CLI maps ConfigError to exit code 2 and DataError to exit code 3;
everything else is a regular failure.
"""

from __future__ import annotations


class StructReasonError(Exception):
    """Base class for all package errors."""


class ConfigError(StructReasonError):
    """Bad configuration: missing keys, invalid templates, unusable flags."""


class DataError(StructReasonError):
    """Bad input data: datasets, artifacts, trace files."""


class LoadError(DataError):
    """A structured-data artifact failed to load."""

    def __init__(self, message: str, *, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class TemplateError(ConfigError):
    """A prompt template is malformed or cannot be rendered."""


class TransportError(StructReasonError):
    """A remote backend failed after exhausting its retries."""

    def __init__(self, message: str, *, attempts: int = 1):
        super().__init__(message)
        self.attempts = attempts


class ScriptMissError(StructReasonError):
    """A scripted backend has no recorded response for a request."""

    def __init__(self, stage_tag: str):
        super().__init__(f"no scripted response for stage {stage_tag!r}")
        self.stage_tag = stage_tag


class OracleMissError(StructReasonError):
    """The gold-oracle backend has no gold decision for a request."""

    def __init__(self, stage_tag: str):
        super().__init__(f"no gold decision for stage {stage_tag!r}")
        self.stage_tag = stage_tag


class SqlError(StructReasonError):
    """Base class for SQL parsing/execution errors."""


class SqlSyntaxError(SqlError):
    """The query text does not match the grammar."""

    def __init__(self, message: str, *, position: int):
        super().__init__(f"syntax error at position {position}: {message}")
        self.position = position


class UnsupportedSqlError(SqlError):
    """The query uses a construct outside the supported subset.

    Kept distinct from SqlSyntaxError so the evaluation harness can count
    unsupported items separately instead of lumping them with junk output.
    """

    def __init__(self, construct: str, *, position: int = 0):
        super().__init__(f"unsupported SQL construct: {construct}")
        self.construct = construct
        self.position = position


class SqlAnalysisError(SqlError):
    """The query parsed but does not resolve against the database schema."""


class SqlExtractionError(StructReasonError):
    """A model response contains no extractable SQL statement."""
