"""Exception types shared across the package."""


class FormatError(ValueError):
    """An input file exists but cannot be decoded."""


class ConfigurationError(ValueError):
    """Inputs are well formed but inconsistent with the requested run."""


class IntegrityError(RuntimeError):
    """Stored data is missing or does not match what a step requires."""
