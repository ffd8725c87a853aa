"""
Core Engine - Distributions, sequence state and Gumbel primitives
"""

from .categorical import (
    Categorical,
    confidence,
    entropy,
    inverse_cdf,
    log_power_sum,
    power_sum,
    sample,
    sample_many,
    sample_table,
    stack_probs,
    temper,
)
from .errors import (
    ArgumentError,
    CacheInvalidError,
    CapacityError,
    ConditioningError,
    ConfigError,
    ConsistencyError,
    InvalidDistributionError,
    MDSamplerError,
)
from .gumbel import (
    TopKSelection,
    gumbel_from_uniform,
    gumbel_top_k,
    gumbel_top_k_batch,
    sample_gumbel,
    top_k_prefix_log_pmf,
    top_k_prefix_pmf,
)
from .state import MaskState, ProductModel, check_query

__all__ = [
    "Categorical",
    "confidence",
    "entropy",
    "inverse_cdf",
    "log_power_sum",
    "power_sum",
    "sample",
    "sample_many",
    "sample_table",
    "stack_probs",
    "temper",
    "ArgumentError",
    "CacheInvalidError",
    "CapacityError",
    "ConditioningError",
    "ConfigError",
    "ConsistencyError",
    "InvalidDistributionError",
    "MDSamplerError",
    "TopKSelection",
    "gumbel_from_uniform",
    "gumbel_top_k",
    "gumbel_top_k_batch",
    "sample_gumbel",
    "top_k_prefix_log_pmf",
    "top_k_prefix_pmf",
    "MaskState",
    "ProductModel",
    "check_query",
]
