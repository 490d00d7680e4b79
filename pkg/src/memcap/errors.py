"""Exception types shared across the package."""


class MemcapError(Exception):
    """Base class for all package-specific failures."""


class ConfigError(MemcapError):
    """Invalid configuration file, CLI argument, or sweep setting."""


class SamplingError(MemcapError):
    """A random draw could not produce a valid object within the retry budget."""


class DynamicsError(MemcapError):
    """State recursion failure (non-finite states, invalid regime inputs)."""


class CapacityError(MemcapError):
    """Memory capacity estimation failure (singular covariance, bad lag range)."""
