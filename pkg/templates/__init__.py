"""
Templates - Named sampler presets
"""

from .sampler_presets import SamplerPresets

__all__ = [
    "SamplerPresets",
]
