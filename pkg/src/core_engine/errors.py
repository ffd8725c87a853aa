"""
Errors raised by the sampler toolkit
"""


class MDSamplerError(Exception):
    """Base class for all toolkit errors."""


class InvalidDistributionError(MDSamplerError, ValueError):
    """A probability vector violates the Categorical invariants."""


class ArgumentError(MDSamplerError, ValueError):
    """An operation was called with arguments outside its domain."""


class CapacityError(MDSamplerError, RuntimeError):
    """An exact enumeration would exceed its capacity guard."""


class ConditioningError(MDSamplerError, ValueError):
    """The conditioning event has zero probability."""


class CacheInvalidError(MDSamplerError, RuntimeError):
    """A KV cache was used with a state or params it was not computed from."""


class ConsistencyError(MDSamplerError, RuntimeError):
    """A sampler component broke an internal invariant (e.g. policy output)."""


class ConfigError(MDSamplerError, ValueError):
    """Experiment configuration failed validation."""
