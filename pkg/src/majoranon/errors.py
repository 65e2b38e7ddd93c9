"""Exception types shared across the package."""


class MajoranonError(Exception):
    """Base class for package errors."""


class ConfigError(MajoranonError, ValueError):
    """Invalid grid, initial-state or run configuration."""


class ContractError(MajoranonError, ValueError):
    """Operands that violate an operation's contract (grid or space mismatch)."""


class NumericError(MajoranonError, ArithmeticError):
    """Non-finite values appeared during a computation.

    ``partial`` carries whatever results were produced before the failure.
    """

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class ResourceError(MajoranonError):
    """A requested dense computation exceeds the configured size cap."""
