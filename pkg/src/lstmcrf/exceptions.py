"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`LstmCrfError`, so the CLI can turn any of them into a single
machine-parsable line.
"""


class LstmCrfError(Exception):
    """Base class for all package errors."""


class ParseError(LstmCrfError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DimensionError(LstmCrfError, ValueError):
    pass


class ConfigError(LstmCrfError, ValueError):
    pass


class EmbeddingFormatError(ParseError):
    pass


class UnknownTokenError(LstmCrfError, KeyError):
    def __str__(self):
        return str(self.args[0]) if self.args else ""


class TrainingError(LstmCrfError, RuntimeError):
    pass


class AlignmentError(LstmCrfError, ValueError):
    pass


class ArchiveError(LstmCrfError, ValueError):
    pass


class UsageError(LstmCrfError, RuntimeError):
    pass
