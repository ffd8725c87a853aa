"""
Rounds - One unmasking round of the MaskGIT and moment samplers, with exact laws
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterator, Mapping, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from config import PROB_SUM_TOL, ROUND_PMF_CAPACITY
from src.core_engine import (
    ArgumentError,
    CapacityError,
    Categorical,
    gumbel_top_k,
    gumbel_top_k_batch,
    log_power_sum,
    sample,
    sample_table,
    stack_probs,
    temper,
    top_k_prefix_log_pmf,
)

logger = logging.getLogger(__name__)

OutcomeKey = Tuple[Tuple[int, ...], Tuple[int, ...]]


@dataclass(frozen=True)
class RoundOutcome:
    """k distinct positions and the tokens sampled at them, in selection order."""

    indices: Tuple[int, ...]
    tokens: Tuple[int, ...]

    def __post_init__(self):
        indices = tuple(int(i) for i in self.indices)
        tokens = tuple(int(x) for x in self.tokens)
        if len(indices) != len(tokens):
            raise ArgumentError("indices and tokens must have equal length")
        if len(set(indices)) != len(indices):
            raise ArgumentError(f"round selected a position twice: {indices}")
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "tokens", tokens)

    @property
    def key(self) -> OutcomeKey:
        return self.indices, self.tokens

    def as_dict(self) -> Dict[int, int]:
        return dict(zip(self.indices, self.tokens))


@dataclass
class RoundPmf:
    """
    Exact law of a round over ordered (index-tuple, token-tuple) outcomes.

    Only outcomes with positive probability are stored.
    """

    table: Dict[OutcomeKey, float] = field(default_factory=dict)

    def __post_init__(self):
        total = self.total()
        if self.table and abs(total - 1.0) > PROB_SUM_TOL:
            raise ArgumentError(f"round pmf sums to {total!r}, not 1")

    def __getitem__(self, key: OutcomeKey) -> float:
        return self.table.get(key, 0.0)

    def __iter__(self) -> Iterator[OutcomeKey]:
        return iter(self.table)

    def __len__(self) -> int:
        return len(self.table)

    def items(self):
        return self.table.items()

    def total(self) -> float:
        return math.fsum(self.table.values())

    def index_marginal(self) -> Dict[Tuple[int, ...], float]:
        """Law of the ordered index tuple alone."""
        marginal: Dict[Tuple[int, ...], float] = {}
        for (indices, _), prob in self.table.items():
            marginal[indices] = marginal.get(indices, 0.0) + prob
        return marginal

    def token_marginal(self, position: int, alphabet_size: int) -> np.ndarray:
        """Law of the token at ``position`` conditioned on the position being selected."""
        weights = np.zeros(alphabet_size)
        for (indices, tokens), prob in self.table.items():
            if position in indices:
                weights[tokens[indices.index(position)]] += prob
        total = weights.sum()
        return weights / total if total > 0 else weights

    def unordered(self) -> Dict[FrozenSet[Tuple[int, int]], float]:
        """
        Marginalize over selection order: outcomes become sets of (position, token).

        Labelled utility only; the round laws are compared over ordered outcomes.
        """
        return unordered_outcomes(self.table)


def unordered_outcomes(table: Mapping[OutcomeKey, float]) -> Dict[FrozenSet[Tuple[int, int]], float]:
    """Forget selection order: ((i..), (x..)) keys become sets of (position, token)."""
    merged: Dict[FrozenSet[Tuple[int, int]], float] = {}
    for (indices, tokens), prob in table.items():
        key = frozenset(zip(indices, tokens))
        merged[key] = merged.get(key, 0.0) + prob
    return merged


def moment_beta(alpha: float) -> float:
    """Moment exponent beta = 1 + 1/alpha; alpha = inf gives beta = 1."""
    if not alpha > 0:
        raise ArgumentError(f"alpha must be positive for the moment exponent, got {alpha}")
    return 1.0 + 1.0 / alpha


def _maskgit_scores(log_probs: np.ndarray, alpha: float) -> Tuple[np.ndarray, float]:
    """
    Scores and noise temperature of the MaskGIT index selection.

    alpha = 0 ranks deterministically by log-probability; alpha = inf ranks by
    pure noise, the at-random selection.
    """
    if alpha < 0 or math.isnan(alpha):
        raise ArgumentError(f"Gumbel temperature must be non-negative, got {alpha}")
    if math.isinf(alpha):
        return np.zeros_like(log_probs), 1.0
    return log_probs, float(alpha)


def _check_round(n: int, k: int) -> None:
    if n < 1:
        raise ArgumentError("a round needs at least one masked position")
    if not 1 <= k <= n:
        raise ArgumentError(f"k must satisfy 1 <= k <= N={n}, got k={k}")


def maskgit_round(
    ps: Sequence[Categorical],
    k: int,
    alpha: float,
    rng: np.random.Generator,
) -> RoundOutcome:
    """
    One sample-then-choose round.

    Samples x_i ~ p_i at every position, then keeps the argtop-k of
    log p_i(x_i) + alpha * xi_i.

    Args:
        ps: Conditionals at the N masked positions (local indices 0..N-1)
        k: Number of positions to unmask
        alpha: Gumbel temperature (0 = deterministic, inf = random selection)
        rng: Random generator

    Returns:
        RoundOutcome over local indices
    """
    _check_round(len(ps), k)
    tokens = [sample(p, rng) for p in ps]
    log_probs = np.array([p.log_probs[x] for p, x in zip(ps, tokens)])
    mu, temperature = _maskgit_scores(log_probs, alpha)
    selection = gumbel_top_k(mu, k, temperature, rng)
    return RoundOutcome(selection.indices, tuple(tokens[i] for i in selection.indices))


def moment_round(
    ps: Sequence[Categorical],
    k: int,
    alpha: float,
    gamma: float,
    rng: np.random.Generator,
    selection_temperature: float = 1.0,
) -> RoundOutcome:
    """
    One choose-then-sample moment round.

    Positions are ranked by log ||p_i||_beta^beta plus unit Gumbel noise
    (beta = 1 + 1/alpha); tokens at the chosen positions come from
    temper(p_i, gamma). gamma = beta approximates MaskGIT, gamma = 1 is unbiased.
    """
    _check_round(len(ps), k)
    beta = moment_beta(alpha)
    mu = np.array([log_power_sum(p, beta) for p in ps])
    selection = gumbel_top_k(mu, k, selection_temperature, rng)
    tokens = tuple(sample(temper(ps[i], gamma), rng) for i in selection.indices)
    return RoundOutcome(selection.indices, tokens)


def maskgit_round_batch(
    ps: Sequence[Categorical],
    k: int,
    alpha: float,
    rng: np.random.Generator,
    draws: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised maskgit_round; returns (indices, tokens), each of shape (draws, k)."""
    _check_round(len(ps), k)
    table = stack_probs(ps)
    tokens = sample_table(table, rng, draws)
    with np.errstate(divide="ignore"):
        log_table = np.log(table)
    log_probs = log_table[np.arange(len(ps))[None, :], tokens]
    mu, temperature = _maskgit_scores(log_probs, alpha)
    indices = gumbel_top_k_batch(mu, k, temperature, rng, draws)
    return indices, np.take_along_axis(tokens, indices, axis=1)


def moment_round_batch(
    ps: Sequence[Categorical],
    k: int,
    alpha: float,
    gamma: float,
    rng: np.random.Generator,
    draws: int,
) -> Tuple[np.ndarray, np.ndarray]:
    """Vectorised moment_round; returns (indices, tokens), each of shape (draws, k)."""
    _check_round(len(ps), k)
    beta = moment_beta(alpha)
    mu = np.array([log_power_sum(p, beta) for p in ps])
    indices = gumbel_top_k_batch(mu, k, 1.0, rng, draws)
    tempered = stack_probs([temper(p, gamma) for p in ps])
    cdf = np.cumsum(tempered, axis=1)[indices]
    u = rng.random(indices.shape) * cdf[..., -1]
    tokens = (cdf <= u[..., None]).sum(axis=-1)
    last_positive = tempered.shape[1] - 1 - np.argmax(tempered[:, ::-1] > 0, axis=1)
    return indices, np.minimum(tokens, last_positive[indices])


def _ordered_count(n: int, k: int) -> int:
    return math.perm(n, k)


def moment_round_exact_pmf(
    ps: Sequence[Categorical],
    k: int,
    alpha: float,
    gamma: float,
) -> RoundPmf:
    """
    Exact law of moment_round.

    P(i_1..i_k, z) = prod_l temper(p_{i_l}, gamma)(z_l) * ||p_{i_l}||_beta^beta
    / sum_{i not in I_{l-1}} ||p_i||_beta^beta.

    Raises:
        CapacityError: if the number of ordered outcomes exceeds ROUND_PMF_CAPACITY
    """
    _check_round(len(ps), k)
    alphabet = stack_probs(ps).shape[1]
    entries = _ordered_count(len(ps), k) * alphabet**k
    if entries > ROUND_PMF_CAPACITY:
        raise CapacityError(f"moment pmf needs {entries} entries (limit {ROUND_PMF_CAPACITY})")
    beta = moment_beta(alpha)
    mu = np.array([log_power_sum(p, beta) for p in ps])
    tempered = [temper(p, gamma).probs for p in ps]
    table: Dict[OutcomeKey, float] = {}
    for indices in itertools.permutations(range(len(ps)), k):
        selection = math.exp(top_k_prefix_log_pmf(mu, indices))
        for tokens in itertools.product(range(alphabet), repeat=k):
            prob = selection
            for position, token in zip(indices, tokens):
                prob *= tempered[position][token]
            if prob > 0:
                table[(indices, tokens)] = prob
    return RoundPmf(table)


def maskgit_round_exact_pmf(
    ps: Sequence[Categorical],
    k: int,
    alpha: float,
) -> RoundPmf:
    """
    Exact law of maskgit_round by marginalizing over all |S|^N token assignments.

    For every assignment z the selection law is Gumbel-top-k on log p_i(z_i) / alpha;
    its prefix probabilities are weighted by prod_i p_i(z_i) and accumulated per
    ordered outcome.

    Raises:
        CapacityError: if |S|^N exceeds ROUND_PMF_CAPACITY
    """
    _check_round(len(ps), k)
    if not alpha > 0:
        raise ArgumentError(f"exact MaskGIT law needs alpha > 0, got {alpha}")
    table = stack_probs(ps)
    n, alphabet = table.shape
    assignments = alphabet**n
    if assignments > ROUND_PMF_CAPACITY:
        raise CapacityError(f"MaskGIT pmf needs {assignments} token assignments (limit {ROUND_PMF_CAPACITY})")
    if _ordered_count(n, k) * alphabet**k > ROUND_PMF_CAPACITY:
        raise CapacityError("MaskGIT pmf has too many ordered outcomes")

    z = np.indices((alphabet,) * n).reshape(n, -1).T
    with np.errstate(divide="ignore"):
        log_z = np.log(table)[np.arange(n)[None, :], z]
    weights = np.exp(log_z.sum(axis=1))
    keep = weights > 0
    z, log_z, weights = z[keep], log_z[keep], weights[keep]
    mu = np.zeros_like(log_z) if math.isinf(alpha) else log_z / alpha

    radix = alphabet ** np.arange(k - 1, -1, -1)
    pmf: Dict[OutcomeKey, float] = {}
    for indices in itertools.permutations(range(n), k):
        remaining = np.ones(n, dtype=bool)
        log_selection = np.zeros(len(weights))
        for index in indices:
            log_selection += mu[:, index] - logsumexp(mu[:, remaining], axis=1)
            remaining[index] = False
        codes = z[:, list(indices)] @ radix
        sums = np.bincount(codes, weights=weights * np.exp(log_selection), minlength=alphabet**k)
        for code in np.flatnonzero(sums > 0):
            tokens = tuple(int(t) for t in np.unravel_index(code, (alphabet,) * k))
            pmf[(indices, tokens)] = float(sums[code])
    logger.debug(f"MaskGIT exact pmf: N={n}, k={k}, |S|={alphabet}, {len(pmf)} outcomes")
    return RoundPmf(pmf)


def tv_theorem_bound(n: int, k: int, alphabet_size: int, alpha: float) -> float:
    """
    Upper bound on TV(moment, MaskGIT) for one round:
    5 sqrt(c/N) (1 + sqrt(log+(N/c))) with c = k^2 |S|^(1/alpha).
    """
    if min(n, k, alphabet_size) <= 0 or not alpha > 0:
        raise ArgumentError("tv bound needs positive N, k, |S| and alpha")
    c = k**2 * alphabet_size ** (1.0 / alpha)
    log_plus = math.log(max(1.0, n / c))
    return 5.0 * math.sqrt(c / n) * (1.0 + math.sqrt(log_plus))
