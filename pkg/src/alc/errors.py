"""Exception types shared across the package."""


class InvalidArgumentError(ValueError):
    """An argument violates a documented precondition."""


class ResourceLimitError(RuntimeError):
    """An enumeration budget was exceeded; the caller must shrink the problem."""


class ConfigError(ValueError):
    """An experiment config is malformed or out of range."""
