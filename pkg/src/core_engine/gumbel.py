"""
Gumbel - Standard Gumbel noise and Gumbel-top-k selection
"""

import logging
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import logsumexp

from .errors import ArgumentError

logger = logging.getLogger(__name__)

U_MIN = np.finfo(np.float64).tiny
U_MAX = np.nextafter(1.0, 0.0)


@dataclass(frozen=True)
class TopKSelection:
    """k distinct indices in descending perturbed score."""

    indices: Tuple[int, ...]

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        if len(set(indices)) != len(indices):
            raise ArgumentError(f"selection has repeated indices: {indices}")
        object.__setattr__(self, "indices", indices)

    def __len__(self) -> int:
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)


def gumbel_from_uniform(u: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Transform uniforms to Gumbel variates, clamping u into [U_MIN, U_MAX]."""
    u = np.clip(u, U_MIN, U_MAX)
    return -np.log(-np.log(u))


def sample_gumbel(rng: np.random.Generator, size: Optional[Union[int, Tuple[int, ...]]] = None):
    """Draw standard Gumbel noise; a float when ``size`` is None, else an array."""
    noise = gumbel_from_uniform(rng.random(size))
    return float(noise) if size is None else noise


def _ranked(scores: np.ndarray, k: int) -> np.ndarray:
    # stable sort on negated scores: ties go to the lower index
    return np.argsort(-scores, axis=-1, kind="stable")[..., :k]


def _check_k(n: int, k: int) -> None:
    if not 1 <= k <= n:
        raise ArgumentError(f"k must satisfy 1 <= k <= N={n}, got k={k}")


def gumbel_top_k(
    mu: Sequence[float],
    k: int,
    temperature: float,
    rng: Optional[np.random.Generator],
) -> TopKSelection:
    """
    argtop-k of mu_i + temperature * xi_i with i.i.d. standard Gumbel xi.

    Args:
        mu: Scores (log-weights); -inf entries rank last
        k: Number of indices to select, 1 <= k <= len(mu)
        temperature: Noise scale; 0 gives the deterministic argtop-k
        rng: Random generator (unused when temperature is 0)

    Returns:
        TopKSelection ordered by descending perturbed score
    """
    mu = np.asarray(mu, dtype=np.float64)
    _check_k(mu.size, k)
    if temperature < 0:
        raise ArgumentError(f"temperature must be non-negative, got {temperature}")
    scores = mu
    if temperature > 0:
        scores = mu + temperature * sample_gumbel(rng, mu.size)
    return TopKSelection(tuple(_ranked(scores, k).tolist()))


def gumbel_top_k_batch(
    mu: Sequence[float],
    k: int,
    temperature: float,
    rng: np.random.Generator,
    draws: int,
) -> np.ndarray:
    """
    Vectorised gumbel_top_k.

    ``mu`` is either one score vector shared by every draw or a (draws, N)
    matrix of per-draw scores. Returns a (draws, k) integer array.
    """
    mu = np.asarray(mu, dtype=np.float64)
    n = mu.shape[-1]
    _check_k(n, k)
    scores = np.broadcast_to(mu, (draws, n))
    if temperature > 0:
        scores = scores + temperature * sample_gumbel(rng, (draws, n))
    return _ranked(scores, k)


def top_k_prefix_pmf(mu: Sequence[float], prefix: Sequence[int]) -> float:
    """
    Exact probability that Gumbel-top-k (unit temperature) starts with ``prefix``.

    Computed as prod_l exp(mu_{i_l}) / sum_{i not in I_{l-1}} exp(mu_i) in log-space.
    """
    return float(np.exp(top_k_prefix_log_pmf(mu, prefix)))


def top_k_prefix_log_pmf(mu: Sequence[float], prefix: Sequence[int]) -> float:
    mu = np.asarray(mu, dtype=np.float64)
    prefix = [int(i) for i in prefix]
    if len(set(prefix)) != len(prefix):
        raise ArgumentError(f"prefix has repeated indices: {prefix}")
    if any(not 0 <= i < mu.size for i in prefix):
        raise ArgumentError(f"prefix {prefix} out of range for N={mu.size}")
    remaining = np.ones(mu.size, dtype=bool)
    log_prob = 0.0
    for index in prefix:
        log_prob += mu[index] - logsumexp(mu[remaining])
        remaining[index] = False
    return float(log_prob)
