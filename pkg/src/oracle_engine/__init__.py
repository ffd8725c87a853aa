"""
Oracle Engine - Exact joint tables, conditionals, KL ledger and path enumeration
"""

from .joint_table import ExactConditionalModel, JointTable, conditional
from .kl import KLDecomposition, KLResult, SubsetWeight, kl_decomposition_terms, kl_divergence, phi_weight
from .enumeration import (
    entropy_weighted_kernel,
    exact_chain_distribution,
    exact_cts_distribution,
    maskgit_chain_law,
    moment_chain_law,
    random_chain_law,
    uniform_kernel,
)

__all__ = [
    "ExactConditionalModel",
    "JointTable",
    "conditional",
    "KLDecomposition",
    "KLResult",
    "SubsetWeight",
    "kl_decomposition_terms",
    "kl_divergence",
    "phi_weight",
    "entropy_weighted_kernel",
    "exact_chain_distribution",
    "exact_cts_distribution",
    "maskgit_chain_law",
    "moment_chain_law",
    "random_chain_law",
    "uniform_kernel",
]
