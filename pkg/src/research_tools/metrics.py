"""
Metrics - Total variation, empirical pmfs and the sequence-entropy diversity metric
"""

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, Mapping, Sequence, Union

import numpy as np
from scipy.special import entr

from src.core_engine import ArgumentError

Pmf = Union[Mapping[Hashable, float], np.ndarray, Sequence[float]]


@dataclass
class EmpiricalPmf:
    """Outcome counts from Monte Carlo draws; ``total`` always equals the sum of counts."""

    counts: Counter = field(default_factory=Counter)

    @property
    def total(self) -> int:
        return sum(self.counts.values())

    @property
    def support(self) -> int:
        return len(self.counts)

    @classmethod
    def from_samples(cls, samples: Iterable[Hashable]) -> "EmpiricalPmf":
        return cls(Counter(samples))

    @classmethod
    def from_rows(cls, rows: np.ndarray) -> "EmpiricalPmf":
        """Count the rows of a (draws, width) integer array as tuples."""
        rows = np.asarray(rows)
        if rows.ndim == 1:
            rows = rows[:, None]
        unique, counts = np.unique(rows, axis=0, return_counts=True)
        return cls(Counter({tuple(int(v) for v in row): int(c) for row, c in zip(unique, counts)}))

    @classmethod
    def from_round_arrays(cls, indices: np.ndarray, tokens: np.ndarray) -> "EmpiricalPmf":
        """Count ordered round outcomes ((i_1..i_k), (x_1..x_k)) from batch sampler output."""
        indices, tokens = np.asarray(indices), np.asarray(tokens)
        k = indices.shape[1]
        rows = EmpiricalPmf.from_rows(np.concatenate([indices, tokens], axis=1))
        return cls(Counter({(row[:k], row[k:]): c for row, c in rows.counts.items()}))

    def merge(self, other: "EmpiricalPmf") -> "EmpiricalPmf":
        return EmpiricalPmf(self.counts + other.counts)

    def to_pmf(self) -> Dict[Hashable, float]:
        total = self.total
        if total < 1:
            raise ArgumentError("empirical pmf has no draws")
        return {outcome: count / total for outcome, count in self.counts.items()}


def _as_mapping(p: Pmf) -> Mapping[Hashable, float]:
    if isinstance(p, EmpiricalPmf):
        return p.to_pmf()
    if isinstance(p, Mapping):
        return p
    return dict(enumerate(np.asarray(p, dtype=np.float64).reshape(-1).tolist()))


def tv_exact(p: Pmf, q: Pmf) -> float:
    """Half-L1 distance over the union of supports."""
    p, q = _as_mapping(p), _as_mapping(q)
    keys = set(p) | set(q)
    distance = 0.5 * math.fsum(abs(p.get(key, 0.0) - q.get(key, 0.0)) for key in keys)
    return min(1.0, max(0.0, distance))


def tv_empirical(samples: EmpiricalPmf, q: Pmf) -> float:
    """TV between the empirical frequencies and a reference pmf."""
    if samples.total < 1:
        raise ArgumentError("empirical pmf has no draws")
    return tv_exact(samples.to_pmf(), q)


def estimation_error_scale(samples: EmpiricalPmf, support: int = 0) -> float:
    """Plug-in Monte Carlo error scale sqrt(support / total)."""
    return math.sqrt(max(support, samples.support) / samples.total)


def sequence_entropy(sequence: Sequence[int]) -> float:
    """Entropy in nats of the token frequencies inside one sequence."""
    if len(sequence) < 1:
        raise ArgumentError("sequence entropy needs a non-empty sequence")
    _, counts = np.unique(np.asarray(sequence), return_counts=True)
    return float(entr(counts / len(sequence)).sum())


class DiversityMetrics:
    """Summaries of sequence_entropy over a batch of generations."""

    def entropies(self, sequences: Iterable[Sequence[int]]) -> np.ndarray:
        return np.array([sequence_entropy(s) for s in sequences], dtype=np.float64)

    def get_entropy_report(self, sequences: Iterable[Sequence[int]]) -> Dict[str, float]:
        """Mean, spread and bits column of the sequence entropies."""
        values = self.entropies(sequences)
        if values.size == 0:
            raise ArgumentError("no sequences to summarize")
        mean = float(values.mean())
        return {
            "entropy_mean": mean,
            "entropy_std": float(values.std(ddof=1)) if values.size > 1 else 0.0,
            "entropy_min": float(values.min()),
            "entropy_max": float(values.max()),
            "entropy_bits": mean / math.log(2),
            "generations": int(values.size),
        }
