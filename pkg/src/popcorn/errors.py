"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ResourceCapError(RuntimeError):
    """A computation would exceed the configured size budget."""

    def __init__(self, message: str, predicted: int):
        super().__init__(f"{message} (predicted {predicted})")
        self.predicted = predicted


class VerificationError(RuntimeError):
    """A runtime check of a mathematical property failed."""

    def __init__(self, message: str, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
