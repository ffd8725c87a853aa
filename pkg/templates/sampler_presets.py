"""
Sampler Presets - Named driver, policy and temperature bundles
"""

from src.core_engine import ConfigError


class SamplerPresets:
    """
    Pre-built sampler configurations.

    ``gamma_mode`` is "moment" (gamma_n = 1 + 1/alpha_n), "unit" (gamma = 1)
    or "fixed" (the experiment's gamma at every non-final round).
    """

    MASKGIT = {
        "name": "MaskGIT",
        "driver": "maskgit-chain",
        "policy": None,
        "gamma_mode": "unit",
        "description": "Sample-then-choose rounds with Gumbel temperature alpha (1 - n/N)",
    }

    MOMENT = {
        "name": "Moment",
        "driver": "cts",
        "policy": "moment",
        "gamma_mode": "moment",
        "description": "Moment ordering with tempered tokens; approximates MaskGIT",
    }

    U_MOMENT = {
        "name": "U-Moment",
        "driver": "cts",
        "policy": "moment",
        "gamma_mode": "unit",
        "description": "Moment ordering with untempered tokens",
    }

    TEMP = {
        "name": "Temp",
        "driver": "cts",
        "policy": "random",
        "gamma_mode": "moment",
        "description": "Random ordering with the moment token temperature",
    }

    RANDOM = {
        "name": "Random",
        "driver": "cts",
        "policy": "random",
        "gamma_mode": "unit",
        "description": "Random ordering, unbiased tokens",
    }

    HALTON = {
        "name": "Halton",
        "driver": "cts",
        "policy": "halton",
        "gamma_mode": "fixed",
        "description": "Fixed low-discrepancy ordering",
    }

    CONFIDENCE = {
        "name": "Confidence",
        "driver": "cts",
        "policy": "confidence",
        "gamma_mode": "fixed",
        "description": "Highest max-probability positions first",
    }

    HYBRID = {
        "name": "Hybrid",
        "driver": "cts",
        "policy": "hybrid",
        "gamma_mode": "fixed",
        "description": "Halton exploration merged with moment exploitation",
    }

    MOMENT_CACHE = {
        "name": "Moment+Cache",
        "driver": "cts-cached",
        "policy": "moment",
        "gamma_mode": "moment",
        "description": "Moment sampler with partial KV caching",
    }

    HYBRID_CACHE = {
        "name": "Hybrid+Cache",
        "driver": "cts-cached",
        "policy": "hybrid",
        "gamma_mode": "fixed",
        "description": "Hybrid ordering with partial KV caching",
    }

    @staticmethod
    def get_all_presets() -> dict:
        """Get all available presets."""
        return {
            "maskgit": SamplerPresets.MASKGIT,
            "moment": SamplerPresets.MOMENT,
            "u-moment": SamplerPresets.U_MOMENT,
            "temp": SamplerPresets.TEMP,
            "random": SamplerPresets.RANDOM,
            "halton": SamplerPresets.HALTON,
            "confidence": SamplerPresets.CONFIDENCE,
            "hybrid": SamplerPresets.HYBRID,
            "moment-cache": SamplerPresets.MOMENT_CACHE,
            "hybrid-cache": SamplerPresets.HYBRID_CACHE,
        }

    @staticmethod
    def get_preset(preset_name: str) -> dict:
        """Get a specific preset; unknown names are a configuration error."""
        presets = SamplerPresets.get_all_presets()
        try:
            return dict(presets[preset_name.lower()])
        except KeyError:
            raise ConfigError(f"unknown sampler preset {preset_name!r}; expected one of {sorted(presets)}") from None

    @staticmethod
    def get_preset_names() -> list:
        """Get list of available preset names."""
        return list(SamplerPresets.get_all_presets().keys())
