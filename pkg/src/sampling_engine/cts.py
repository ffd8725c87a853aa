"""
CTS - Multi-round samplers: choose-then-sample, MaskGIT chain and the partially cached driver
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from config import FINAL_SELECTION_NOISE
from src.core_engine import (
    ArgumentError,
    Categorical,
    ConsistencyError,
    MaskState,
    ProductModel,
    sample,
    temper,
)
from .policies import MomentPolicy, Ordering, Policy, PolicyContext
from .rounds import maskgit_round, moment_beta
from .schedules import UnmaskSchedule, gumbel_temp, half_step_counts

logger = logging.getLogger(__name__)

GammaSchedule = Callable[[int, int], float]


def constant_gamma(gamma: float) -> GammaSchedule:
    """The same inverse temperature at every step."""
    if not gamma > 0:
        raise ArgumentError(f"gamma must be positive, got {gamma}")
    return lambda n, steps: gamma


def moment_gamma(alpha: float) -> GammaSchedule:
    """gamma_n = 1 + 1/alpha_n with alpha_n = alpha (1 - n/N); MaskGIT emulation."""

    def schedule(n: int, steps: int) -> float:
        alpha_n = gumbel_temp(alpha, n, steps)
        return moment_beta(alpha_n) if alpha_n > 0 else 1.0

    return schedule


@dataclass(frozen=True)
class RoundRecord:
    """What one round unmasked and under which temperatures."""

    step: int
    indices: Tuple[int, ...]
    tokens: Tuple[int, ...]
    tau: float
    gamma: float
    refreshed: Tuple[bool, ...] = ()

    def to_dict(self) -> Dict:
        record = asdict(self)
        record["tau"] = None if math.isinf(self.tau) else self.tau
        return record


@dataclass
class GenerationTrace:
    """Per-round records of one generation plus the final sequence."""

    length: int
    rounds: List[RoundRecord] = field(default_factory=list)
    sequence: Tuple[int, ...] = ()

    def check_coverage(self) -> None:
        """Every position is unmasked in exactly one round."""
        seen: List[int] = [i for record in self.rounds for i in record.indices]
        if sorted(seen) != list(range(self.length)):
            raise ConsistencyError(f"rounds do not partition the {self.length} positions: {seen}")

    def to_dict(self) -> Dict:
        return {
            "length": self.length,
            "sequence": list(self.sequence),
            "rounds": [record.to_dict() for record in self.rounds],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _round_temperatures(
    alpha: float, n: int, steps: int, final: bool, final_selection_noise: bool
) -> Tuple[float, float, float]:
    """(alpha_n, beta_n, selection temperature) for step n."""
    alpha_n = gumbel_temp(alpha, n, steps)
    if final or alpha_n == 0:
        return alpha_n, 1.0, 1.0 if final_selection_noise else 0.0
    return alpha_n, moment_beta(alpha_n), 1.0


def _checked_ordering(ordering: Ordering, state: MaskState) -> Ordering:
    masked = set(state.masked)
    stray = [i for i in ordering if i not in masked]
    if stray:
        raise ConsistencyError(f"policy returned non-masked positions {stray}")
    if len(ordering) != len(masked):
        raise ConsistencyError(f"policy ordered {len(ordering)} of {len(masked)} masked positions")
    return ordering


def _check_model(model: ProductModel, schedule: UnmaskSchedule) -> None:
    if model.length != schedule.length:
        raise ArgumentError(f"schedule length {schedule.length} does not match model length {model.length}")


def run_cts(
    model: ProductModel,
    policy: Policy,
    schedule: UnmaskSchedule,
    gamma_schedule: GammaSchedule,
    rng: np.random.Generator,
    alpha: float = math.inf,
    final_selection_noise: bool = FINAL_SELECTION_NOISE,
    final_unbiased: bool = True,
) -> GenerationTrace:
    """
    General choose-then-sample loop.

    Each round queries the conditionals at the masked positions, asks the
    policy for an ordering, takes the next |I_n| positions and samples each
    token from temper(p_{j|J}, gamma_n). The round that completes the
    sequence samples with gamma = 1 unless ``final_unbiased`` is off.

    Args:
        model: Product model over the sequence
        policy: Ordering policy
        schedule: Unmasking sizes
        gamma_schedule: gamma_n as a function of (n, N)
        rng: Random generator
        alpha: Gumbel temperature parameter; sets beta_n for moment orderings
        final_selection_noise: Keep unit Gumbel noise in the final ranking
        final_unbiased: Sample the completing round with gamma = 1

    Returns:
        GenerationTrace of the run

    Raises:
        ConsistencyError: if the policy returns a non-masked position
    """
    _check_model(model, schedule)
    state = MaskState.empty(schedule.length)
    trace = GenerationTrace(schedule.length)
    for n, k in enumerate(schedule.sizes, start=1):
        if k == 0:
            continue
        final = schedule.cumulative[n] == schedule.length
        alpha_n, beta_n, selection_temperature = _round_temperatures(alpha, n, schedule.steps, final, final_selection_noise)
        conditionals = model.conditionals(state)
        context = PolicyContext(state, conditionals, n, schedule.steps, k, beta_n, selection_temperature)
        ordering = _checked_ordering(policy.order(context, rng), state)
        chosen = ordering.prefix(k)
        gamma = 1.0 if (final and final_unbiased) else gamma_schedule(n, schedule.steps)
        tokens = tuple(sample(temper(conditionals[j], gamma), rng) for j in chosen)
        state = state.commit(dict(zip(chosen, tokens)))
        trace.rounds.append(RoundRecord(n, chosen, tokens, alpha_n, gamma, (False,) * k))
        logger.debug(f"cts step {n}/{schedule.steps}: unmasked {chosen} gamma={gamma:.4g}")
    trace.sequence = state.sequence()
    trace.check_coverage()
    return trace


def run_maskgit_chain(
    model: ProductModel,
    schedule: UnmaskSchedule,
    alpha: float,
    rng: np.random.Generator,
) -> GenerationTrace:
    """
    Multi-round MaskGIT: each round is maskgit_round on the current conditionals
    with Gumbel temperature alpha_n = alpha (1 - n/N).
    """
    _check_model(model, schedule)
    state = MaskState.empty(schedule.length)
    trace = GenerationTrace(schedule.length)
    for n, k in enumerate(schedule.sizes, start=1):
        if k == 0:
            continue
        masked = state.masked
        conditionals = model.conditionals(state)
        alpha_n = gumbel_temp(alpha, n, schedule.steps)
        outcome = maskgit_round([conditionals[j] for j in masked], k, alpha_n, rng)
        chosen = tuple(masked[i] for i in outcome.indices)
        state = state.commit(dict(zip(chosen, outcome.tokens)))
        trace.rounds.append(RoundRecord(n, chosen, outcome.tokens, alpha_n, 1.0, (False,) * k))
    trace.sequence = state.sequence()
    trace.check_coverage()
    return trace


def run_moment_chain(
    model: ProductModel,
    schedule: UnmaskSchedule,
    alpha: float,
    rng: np.random.Generator,
    unbiased: bool = False,
) -> GenerationTrace:
    """Moment sampler over all rounds; ``unbiased`` drops the token temperature (gamma = 1)."""
    gamma_schedule = constant_gamma(1.0) if unbiased else moment_gamma(alpha)
    return run_cts(model, MomentPolicy(), schedule, gamma_schedule, rng, alpha=alpha)


def _split_size(split: str, k: int, n: int, schedule: UnmaskSchedule, halves: Optional[Sequence[int]]) -> int:
    if split == "none":
        return 0
    if split == "half":
        return math.ceil(k / 2)
    if split == "schedule":
        return halves[n - 1] - schedule.cumulative[n - 1]
    raise ArgumentError(f"unknown caching split {split!r}; expected schedule, half or none")


def run_cts_cached(
    model,
    policy: Policy,
    schedule: UnmaskSchedule,
    gamma_schedule: GammaSchedule,
    rng: np.random.Generator,
    alpha: float = math.inf,
    split: str = "schedule",
    final_selection_noise: bool = FINAL_SELECTION_NOISE,
    final_unbiased: bool = True,
) -> GenerationTrace:
    """
    Choose-then-sample with partial KV caching.

    Each round runs one full forward and caches keys/values, splits the round's
    prefix I_n into A_n (first |J_{n-1/2}| - |J_{n-1}| entries) and B_n, samples
    A_n from the full-forward conditionals, then refreshes the conditionals on
    B_n with a partial forward over I_n that sees the committed A_n tokens.

    Args:
        model: Transformer-backed model exposing ``forward_with_cache`` and ``refresh``
        split: "schedule" (half-step schedule), "half" (ceil-half prefix) or "none" (A_n empty)
    """
    if not (hasattr(model, "forward_with_cache") and hasattr(model, "refresh")):
        raise ArgumentError("cached CTS needs a model with forward_with_cache and refresh")
    _check_model(model, schedule)
    halves = half_step_counts(schedule) if split == "schedule" else None
    state = MaskState.empty(schedule.length)
    trace = GenerationTrace(schedule.length)
    for n, k in enumerate(schedule.sizes, start=1):
        if k == 0:
            continue
        final = schedule.cumulative[n] == schedule.length
        alpha_n, beta_n, selection_temperature = _round_temperatures(alpha, n, schedule.steps, final, final_selection_noise)
        conditionals, cache = model.forward_with_cache(state)
        context = PolicyContext(state, conditionals, n, schedule.steps, k, beta_n, selection_temperature)
        chosen = _checked_ordering(policy.order(context, rng), state).prefix(k)
        gamma = 1.0 if (final and final_unbiased) else gamma_schedule(n, schedule.steps)

        a = min(max(_split_size(split, k, n, schedule, halves), 0), k)
        first, rest = chosen[:a], chosen[a:]
        first_tokens = {j: sample(temper(conditionals[j], gamma), rng) for j in first}
        refreshed: Dict[int, Categorical] = {}
        if first and rest:
            refreshed = model.refresh(cache, chosen, first_tokens, state=state)
        rest_tokens = {j: sample(temper(refreshed.get(j, conditionals[j]), gamma), rng) for j in rest}

        tokens = tuple({**first_tokens, **rest_tokens}[j] for j in chosen)
        flags = (False,) * len(first) + (bool(refreshed),) * len(rest)
        state = state.commit(dict(zip(chosen, tokens)))
        trace.rounds.append(RoundRecord(n, chosen, tokens, alpha_n, gamma, flags))
    trace.sequence = state.sequence()
    trace.check_coverage()
    return trace
