"""
Model Engine - Seeded nanoformer, partial KV caching and the transformer-backed product model
"""

from .nanoformer import (
    FlopCounter,
    KVCache,
    TransformerConfig,
    TransformerParams,
    full_forward,
    full_logits,
    init_params,
    load_params,
    partial_forward,
    partial_logits,
    save_params,
)
from .product_model import TransformerProductModel

__all__ = [
    "FlopCounter",
    "KVCache",
    "TransformerConfig",
    "TransformerParams",
    "full_forward",
    "full_logits",
    "init_params",
    "load_params",
    "partial_forward",
    "partial_logits",
    "save_params",
    "TransformerProductModel",
]
