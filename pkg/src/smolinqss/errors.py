"""Exception types raised across the package."""


class QSSError(Exception):
    """Base class for all errors raised by smolinqss."""


class InvalidParameterError(QSSError, ValueError):
    """An argument is outside the domain accepted by an operation."""


class DegenerateBranchError(QSSError):
    """A measurement branch with (numerically) zero probability was requested."""


class ProtocolAbortError(QSSError):
    """A protocol step was attempted after the session was aborted."""


class InsufficientSharesError(QSSError):
    """Key reconstruction was attempted without every share holder present."""


class ConfigError(QSSError):
    """A session configuration file or override is malformed."""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
