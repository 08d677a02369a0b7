"""Exception hierarchy shared across the harness.

The CLI maps these onto exit codes: ValidationError -> 3, BackendError -> 4.
"""


class HarnessError(Exception):
    """Base class for all harness failures."""


class ValidationError(HarnessError):
    """Bad input data, bad configuration, or a violated precondition."""


class ConfigError(ValidationError):
    """Missing or inconsistent configuration (registry entries, language names)."""


class BackendError(HarnessError):
    """A remote generation or scoring backend failed after bounded retries."""
