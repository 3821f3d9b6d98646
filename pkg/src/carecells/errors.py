"""Exception types shared across the package."""


class ConfigError(ValueError):
    """Invalid configuration: bad rates, malformed config text, unknown keys."""


class ConsistencyError(RuntimeError):
    """Internal state violated an invariant; indicates a bug, not bad input."""
