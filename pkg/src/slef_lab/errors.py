"""Shared error types."""


class ConvergenceError(RuntimeError):
    """An iterative solve failed to converge; the message carries the final
    residual and iteration diagnostics."""


class MonotonicityError(RuntimeError):
    """The continuation family lost its ordering beyond tolerance, which a
    correctly assembled M-matrix operator cannot do: signals a bug."""


class ConfigError(ValueError):
    """Base class for run-configuration problems."""


class ConfigSyntaxError(ConfigError):
    """Malformed configuration text (carries line information)."""


class ConfigKeyError(ConfigError):
    """Unknown configuration key (named in the message)."""


class ConfigRangeError(ConfigError):
    """A configuration value is outside its admissible range."""
