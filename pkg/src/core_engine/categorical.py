"""
Categorical - Finite probability vectors and the functionals samplers consume
"""

import logging
from dataclasses import dataclass
from typing import Sequence, Union

import numpy as np
from scipy.special import logsumexp

from config import PROB_SUM_TOL
from .errors import ArgumentError, InvalidDistributionError

logger = logging.getLogger(__name__)

ArrayLike = Union[Sequence[float], np.ndarray]


@dataclass(frozen=True, eq=False)
class Categorical:
    """
    A probability vector over the token alphabet {0, ..., |S|-1}.

    The stored array is a read-only float64 copy; entries are non-negative
    and sum to one within ``config.PROB_SUM_TOL``.
    """

    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=np.float64).reshape(-1)
        if probs.size < 1:
            raise InvalidDistributionError("alphabet must contain at least one symbol")
        if not np.all(np.isfinite(probs)) or np.any(probs < 0):
            raise InvalidDistributionError(f"probabilities must be finite and non-negative: {probs}")
        total = float(probs.sum())
        if abs(total - 1.0) > PROB_SUM_TOL:
            raise InvalidDistributionError(f"probabilities sum to {total!r}, not 1")
        probs.setflags(write=False)
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform(cls, size: int) -> "Categorical":
        """Uniform distribution over ``size`` symbols."""
        if size < 1:
            raise InvalidDistributionError("alphabet must contain at least one symbol")
        return cls(np.full(size, 1.0 / size))

    @classmethod
    def one_hot(cls, size: int, index: int) -> "Categorical":
        """Point mass at ``index``."""
        probs = np.zeros(size)
        probs[index] = 1.0
        return cls(probs)

    @classmethod
    def from_weights(cls, weights: ArrayLike) -> "Categorical":
        """Normalize non-negative weights into a distribution."""
        weights = np.asarray(weights, dtype=np.float64)
        total = weights.sum()
        if not np.isfinite(total) or total <= 0:
            raise InvalidDistributionError("weights must have a positive finite sum")
        return cls(weights / total)

    @classmethod
    def from_logits(cls, logits: ArrayLike) -> "Categorical":
        """Softmax of a logit vector."""
        logits = np.asarray(logits, dtype=np.float64)
        return cls(np.exp(logits - logsumexp(logits)))

    @property
    def size(self) -> int:
        return int(self.probs.size)

    @property
    def log_probs(self) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.log(self.probs)

    def __len__(self) -> int:
        return self.size

    def __repr__(self) -> str:
        return f"Categorical({np.array2string(self.probs, precision=6)})"

    def allclose(self, other: "Categorical", atol: float = 1e-12) -> bool:
        return self.size == other.size and bool(np.allclose(self.probs, other.probs, rtol=0.0, atol=atol))


def _as_probs(p: Union[Categorical, ArrayLike]) -> np.ndarray:
    if isinstance(p, Categorical):
        return p.probs
    return np.asarray(p, dtype=np.float64).reshape(-1)


def entropy(p: Categorical) -> float:
    """Shannon entropy in nats, with 0 log 0 = 0."""
    probs = p.probs[p.probs > 0]
    return float(-np.sum(probs * np.log(probs)))


def log_power_sum(p: Categorical, beta: float) -> float:
    """log of sum_x p(x)^beta, by log-sum-exp over the support."""
    if not beta > 0:
        raise ArgumentError(f"beta must be positive, got {beta}")
    support = p.probs[p.probs > 0]
    return float(logsumexp(beta * np.log(support)))


def power_sum(p: Categorical, beta: float) -> float:
    """The beta-power norm ||p||_beta^beta = sum_x p(x)^beta."""
    return float(np.exp(log_power_sum(p, beta)))


def temper(p: Union[Categorical, ArrayLike], gamma: float) -> Categorical:
    """
    Temperature transform p^gamma / ||p||_gamma^gamma.

    Args:
        p: Distribution (or raw non-negative vector) to sharpen or flatten
        gamma: Inverse temperature; ``math.inf`` gives the uniform law over the argmax set

    Returns:
        The tempered distribution; zero entries stay zero
    """
    if not gamma > 0:
        raise ArgumentError(f"gamma must be positive, got {gamma}")
    probs = _as_probs(p)
    if probs.size == 0 or not np.any(probs > 0):
        raise InvalidDistributionError("cannot temper a vector with no positive entry")
    if gamma == 1.0 and isinstance(p, Categorical):
        return p
    if np.isinf(gamma):
        mask = (probs == probs.max()).astype(np.float64)
        return Categorical(mask / mask.sum())
    with np.errstate(divide="ignore"):
        scaled = gamma * np.log(probs)
    weights = np.exp(scaled - scaled.max())
    return Categorical(weights / weights.sum())


def confidence(p: Categorical) -> float:
    """Largest single-symbol probability."""
    return float(p.probs.max())


def inverse_cdf(p: Categorical, u: float) -> int:
    """Token index whose CDF interval contains ``u`` in [0, 1)."""
    cdf = np.cumsum(p.probs)
    index = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    return min(index, int(np.flatnonzero(p.probs)[-1]))


def sample(p: Categorical, rng: np.random.Generator) -> int:
    """Draw one token index by inverse CDF on a single uniform."""
    return inverse_cdf(p, rng.random())


def sample_many(p: Categorical, rng: np.random.Generator, draws: int) -> np.ndarray:
    """Draw ``draws`` independent token indices."""
    cdf = np.cumsum(p.probs)
    u = rng.random(draws) * cdf[-1]
    indices = np.searchsorted(cdf, u, side="right")
    return np.minimum(indices, np.flatnonzero(p.probs)[-1])


def stack_probs(ps: Sequence[Categorical]) -> np.ndarray:
    """Stack same-alphabet distributions into an (N, |S|) matrix."""
    sizes = {p.size for p in ps}
    if len(sizes) != 1:
        raise ArgumentError(f"distributions have different alphabet sizes: {sorted(sizes)}")
    return np.vstack([p.probs for p in ps])


def sample_table(table: np.ndarray, rng: np.random.Generator, draws: int) -> np.ndarray:
    """
    Independently sample one token per row of an (N, |S|) probability table.

    Returns:
        Integer array of shape (draws, N)
    """
    cdf = np.cumsum(table, axis=1)
    u = rng.random((draws, table.shape[0])) * cdf[:, -1]
    tokens = (cdf[None, :, :] <= u[:, :, None]).sum(axis=2)
    last_positive = table.shape[1] - 1 - np.argmax(table[:, ::-1] > 0, axis=1)
    return np.minimum(tokens, last_positive[None, :])
