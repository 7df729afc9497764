class QstatError(Exception):
    """Base class for everything raised on purpose by qstat."""


class ConfigError(QstatError):
    """Invalid configuration or parameter values."""


class SchemaError(QstatError):
    """Malformed input file."""

    def __init__(self, message: str, line: int | None = None) -> None:
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NumericalError(QstatError):
    """A computation left its region of validity."""


class LeakageError(NumericalError):
    """Too much probability left the truncated Fock space."""


class ModelOverflowError(NumericalError):
    """Scaled model parameters outside what the Fock layer can represent."""


class DegenerateRecordError(NumericalError):
    """The record (or probabilities) cannot give the requested estimator."""


class HeraldError(NumericalError):
    """The herald never clicks."""
