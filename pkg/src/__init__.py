"""
Masked-Diffusion Sampler Toolkit - Source modules
"""
