"""Exception hierarchy shared by all modules."""


class BathyError(Exception):
    """Base class for library errors."""


class FieldFormatError(BathyError):
    """A binary field file is malformed or truncated."""

    def __init__(self, message, offset):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class DomainError(BathyError, ValueError):
    """An argument lies outside the mathematical domain of a map."""


class CapacityError(BathyError):
    """A dense operator would exceed the configured size limit."""


class SolverError(BathyError):
    """An iterative solve failed to reach its tolerance."""

    def __init__(self, message, residual_history=()):
        super().__init__(message)
        self.residual_history = list(residual_history)


class ConditioningError(BathyError):
    """A small linear system is too close to singular."""


class MildSlopeError(BathyError):
    """A depth map violates the mild-slope requirement."""


class ConfigError(BathyError):
    """Invalid experiment or CLI configuration."""
