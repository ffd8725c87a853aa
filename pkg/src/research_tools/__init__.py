"""
Research Tools - Distances, diversity metrics, pmf comparison and run ledgers
"""

from .metrics import (
    DiversityMetrics,
    EmpiricalPmf,
    estimation_error_scale,
    sequence_entropy,
    tv_empirical,
    tv_exact,
)
from .comparison import PmfComparison, unordered_outcomes
from .transparency import RunLedger

__all__ = [
    "DiversityMetrics",
    "EmpiricalPmf",
    "estimation_error_scale",
    "sequence_entropy",
    "tv_empirical",
    "tv_exact",
    "PmfComparison",
    "unordered_outcomes",
    "RunLedger",
]
