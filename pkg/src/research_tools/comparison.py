"""
Pmf Comparison - Compare sampler output laws against each other and a reference
"""

from typing import Dict, Mapping

from tabulate import tabulate

from src.oracle_engine import kl_divergence
from src.sampling_engine import unordered_outcomes
from .metrics import Pmf, _as_mapping, tv_exact


class PmfComparison:
    """Compare output laws over ordered outcomes, with an unordered view for round laws."""

    def compare_pmfs(self, p: Pmf, q: Pmf, round_outcomes: bool = False) -> Dict:
        """TV, KL in both directions and support sizes of two pmfs."""
        p, q = _as_mapping(p), _as_mapping(q)
        forward, backward = kl_divergence(dict(p), dict(q)), kl_divergence(dict(q), dict(p))
        comparison = {
            "tv": tv_exact(p, q),
            "kl_pq": forward.value,
            "kl_qp": backward.value,
            "support_p": sum(1 for v in p.values() if v > 0),
            "support_q": sum(1 for v in q.values() if v > 0),
        }
        if round_outcomes:
            comparison["tv_unordered"] = tv_exact(unordered_outcomes(p), unordered_outcomes(q))
        return comparison

    def generate_comparison_report(self, pmfs: Mapping[str, Pmf], reference: Pmf) -> str:
        """Table of every named pmf against the reference."""
        rows = []
        for name, pmf in pmfs.items():
            comparison = self.compare_pmfs(pmf, reference)
            rows.append([name, comparison["tv"], comparison["kl_pq"], comparison["support_p"]])
        return tabulate(rows, headers=["sampler", "tv", "kl", "support"], floatfmt=".6g")
