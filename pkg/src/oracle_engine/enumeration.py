"""
Enumeration - Exact output laws of multi-round samplers by full path enumeration
"""

import itertools
import logging
import math
from collections import defaultdict
from typing import Callable, Dict, List, Mapping, Sequence, Tuple

import numpy as np

from config import PATH_CAPACITY
from src.core_engine import (
    ArgumentError,
    CapacityError,
    Categorical,
    ConsistencyError,
    MaskState,
    ProductModel,
    entropy,
    temper,
)
from src.sampling_engine import (
    RoundPmf,
    UnmaskSchedule,
    gumbel_temp,
    maskgit_round_exact_pmf,
    moment_beta,
    moment_round_exact_pmf,
)

logger = logging.getLogger(__name__)

SelectionKernel = Callable[[MaskState, Mapping[int, Categorical]], Mapping[int, float]]
RoundLaw = Callable[[Sequence[Categorical], int, int, int], RoundPmf]
SequenceLaw = Dict[Tuple[int, ...], float]


def uniform_kernel(state: MaskState, conditionals: Mapping[int, Categorical]) -> Dict[int, float]:
    """pi(j | I, x_I) uniform over the masked positions."""
    masked = state.masked
    return {j: 1.0 / len(masked) for j in masked}


def entropy_weighted_kernel(state: MaskState, conditionals: Mapping[int, Categorical]) -> Dict[int, float]:
    """pi(j | I, x_I) proportional to exp(-H(p_{j|I}(. | x_I))); favours confident positions."""
    masked = state.masked
    weights = np.exp(-np.array([entropy(conditionals[j]) for j in masked]))
    weights /= weights.sum()
    return dict(zip(masked, weights.tolist()))


def _checked_kernel(weights: Mapping[int, float], state: MaskState) -> Mapping[int, float]:
    stray = [j for j in weights if not state.is_masked(j)]
    if stray:
        raise ConsistencyError(f"kernel puts mass on non-masked positions {stray}")
    total = math.fsum(weights.values())
    if abs(total - 1.0) > 1e-12:
        raise ConsistencyError(f"kernel weights sum to {total!r}, not 1")
    return weights


def _collapse(paths: Mapping[Tuple[int, ...], List[float]]) -> SequenceLaw:
    return {sequence: math.fsum(probs) for sequence, probs in sorted(paths.items())}


def exact_cts_distribution(
    model: ProductModel,
    kernel: SelectionKernel,
    gamma: float,
    length: int,
    alphabet_size: int,
) -> SequenceLaw:
    """
    Exact output law of one-by-one choose-then-sample.

    Every path (position order, token per step) is enumerated; each step picks
    position j with kernel probability pi(j | I, x_I) and samples its token from
    temper(p_{j|I}, gamma). Path probabilities are accumulated per final sequence
    with compensated summation.

    Args:
        model: Conditionals provider (exact conditionals for unbiasedness checks)
        kernel: Explicit singleton selection kernel
        gamma: Token inverse temperature applied at every step
        length: Sequence length D
        alphabet_size: Alphabet size |S|

    Returns:
        Sequence -> probability

    Raises:
        CapacityError: if |S|^D D! exceeds PATH_CAPACITY
    """
    if model.length != length or model.alphabet_size != alphabet_size:
        raise ArgumentError(
            f"model is D={model.length}, |S|={model.alphabet_size}; asked for D={length}, |S|={alphabet_size}"
        )
    paths_bound = alphabet_size**length * math.factorial(length)
    if paths_bound > PATH_CAPACITY:
        raise CapacityError(f"path enumeration needs {paths_bound} paths (limit {PATH_CAPACITY})")

    paths: Dict[Tuple[int, ...], List[float]] = defaultdict(list)

    def walk(state: MaskState, prob: float) -> None:
        if state.complete:
            paths[state.sequence()].append(prob)
            return
        conditionals = model.conditionals(state)
        weights = _checked_kernel(kernel(state, conditionals), state)
        for j, weight in weights.items():
            if weight <= 0:
                continue
            tokens = temper(conditionals[j], gamma).probs
            for token in np.flatnonzero(tokens > 0):
                walk(state.commit({j: int(token)}), prob * weight * float(tokens[token]))

    walk(MaskState.empty(length), 1.0)
    law = _collapse(paths)
    logger.debug(f"exact CTS law: D={length}, |S|={alphabet_size}, gamma={gamma}, {len(law)} sequences")
    return law


def exact_chain_distribution(model: ProductModel, schedule: UnmaskSchedule, round_law: RoundLaw) -> SequenceLaw:
    """
    Exact output law of a multi-round chain whose rounds have the law ``round_law``.

    ``round_law(ps, k, n, N)`` returns the RoundPmf of step n over the masked
    positions in increasing order. The round that unmasks every remaining
    position is sampled with gamma = 1, so its law is the product of the
    conditionals whatever the selection order.

    Raises:
        CapacityError: if more than PATH_CAPACITY paths are visited
    """
    if model.length != schedule.length:
        raise ArgumentError(f"schedule length {schedule.length} does not match model length {model.length}")
    paths: Dict[Tuple[int, ...], List[float]] = defaultdict(list)
    sizes = schedule.sizes
    visited = [0]

    def walk(state: MaskState, prob: float, n: int) -> None:
        visited[0] += 1
        if visited[0] > PATH_CAPACITY:
            raise CapacityError(f"chain enumeration exceeded {PATH_CAPACITY} paths")
        if state.complete:
            paths[state.sequence()].append(prob)
            return
        k = sizes[n - 1]
        if k == 0:
            walk(state, prob, n + 1)
            return
        masked = state.masked
        conditionals = model.conditionals(state)
        ps = [conditionals[j] for j in masked]
        if k == len(masked):
            for tokens in itertools.product(range(model.alphabet_size), repeat=k):
                weight = math.prod(p.probs[t] for p, t in zip(ps, tokens))
                if weight > 0:
                    walk(state.commit(dict(zip(masked, tokens))), prob * weight, n + 1)
            return
        for (indices, tokens), weight in round_law(ps, k, n, schedule.steps).items():
            chosen = [masked[i] for i in indices]
            walk(state.commit(dict(zip(chosen, tokens))), prob * weight, n + 1)

    walk(MaskState.empty(schedule.length), 1.0, 1)
    return _collapse(paths)


def maskgit_chain_law(alpha: float) -> RoundLaw:
    """Round law of the MaskGIT chain with Gumbel temperature alpha_n = alpha (1 - n/N)."""
    if not alpha > 0:
        raise ArgumentError(f"MaskGIT chain law needs alpha > 0, got {alpha}")

    def law(ps: Sequence[Categorical], k: int, n: int, steps: int) -> RoundPmf:
        return maskgit_round_exact_pmf(ps, k, gumbel_temp(alpha, n, steps))

    return law


def moment_chain_law(alpha: float, unbiased: bool = False) -> RoundLaw:
    """Round law of the moment chain: beta_n = 1 + 1/alpha_n, gamma_n = beta_n or 1."""
    if not alpha > 0:
        raise ArgumentError(f"moment chain law needs alpha > 0, got {alpha}")

    def law(ps: Sequence[Categorical], k: int, n: int, steps: int) -> RoundPmf:
        alpha_n = gumbel_temp(alpha, n, steps)
        gamma = 1.0 if unbiased else moment_beta(alpha_n)
        return moment_round_exact_pmf(ps, k, alpha_n, gamma)

    return law


def random_chain_law(gamma_schedule: Callable[[int, int], float]) -> RoundLaw:
    """Round law of at-random ordering: uniform ordered k-subsets, tokens from temper(p, gamma_n)."""

    def law(ps: Sequence[Categorical], k: int, n: int, steps: int) -> RoundPmf:
        gamma = gamma_schedule(n, steps)
        tempered = [temper(p, gamma).probs for p in ps]
        selection = 1.0 / math.perm(len(ps), k)
        table = {}
        for indices in itertools.permutations(range(len(ps)), k):
            for tokens in itertools.product(*(np.flatnonzero(tempered[i] > 0).tolist() for i in indices)):
                table[(indices, tokens)] = selection * math.prod(tempered[i][t] for i, t in zip(indices, tokens))
        return RoundPmf(table)

    return law
