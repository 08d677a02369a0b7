class ConfigurationError(Exception):
    """Bad service configuration (unknown scorer type, unreadable weights)."""
