"""Shared exception types."""


class ConfigError(ValueError):
    """Invalid or infeasible configuration value."""
