"""Exception types shared across the package."""


class NumericalError(RuntimeError):
    """A linear solve, factorization, or iteration failed to meet its tolerance."""


class ConfigError(ValueError):
    """An experiment configuration is invalid; the message names the offending field."""
