"""
Policies - Orderings of masked positions used by choose-then-sample drivers
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping, Optional, Protocol, Sequence, Tuple

import numpy as np
from scipy.stats import qmc

from config import CONFIDENCE_JITTER, HALTON_BASES, POLICIES
from src.core_engine import (
    ArgumentError,
    Categorical,
    MaskState,
    confidence,
    gumbel_top_k,
    log_power_sum,
)
from .schedules import hybrid_m

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Ordering:
    """An ordered list of distinct positions; drivers unmask its prefixes."""

    positions: Tuple[int, ...]

    def __post_init__(self):
        positions = tuple(self.positions)
        if len(set(positions)) != len(positions):
            raise ArgumentError(f"ordering repeats a position: {positions}")
        object.__setattr__(self, "positions", positions)

    def __len__(self) -> int:
        return len(self.positions)

    def __iter__(self):
        return iter(self.positions)

    def prefix(self, n: int) -> Tuple[int, ...]:
        return self.positions[:n]


@dataclass(frozen=True)
class PolicyContext:
    """
    Everything a policy may look at in one round.

    ``conditionals`` holds p_{j|J}(. | x_J) for every masked position j.
    ``beta`` is the moment exponent of this round and ``selection_temperature``
    the Gumbel scale of adaptive rankings (0 makes them deterministic).
    """

    state: MaskState
    conditionals: Mapping[int, Categorical]
    step: int
    steps: int
    step_size: int
    beta: float = 1.0
    selection_temperature: float = 1.0

    def items(self) -> Sequence[Tuple[int, Categorical]]:
        return [(position, self.conditionals[position]) for position in self.state.masked]


class Policy(Protocol):
    name: str

    def order(self, context: PolicyContext, rng: np.random.Generator) -> Ordering:
        ...


def _positions_and_probs(probs: Iterable[Tuple[int, Categorical]]):
    pairs = list(probs)
    if not pairs:
        raise ArgumentError("cannot order an empty set of positions")
    positions = [int(position) for position, _ in pairs]
    return positions, [p for _, p in pairs]


def order_random(masked: Iterable[int], rng: np.random.Generator) -> Ordering:
    """Uniformly random permutation of the masked positions."""
    masked = [int(i) for i in masked]
    if not masked:
        raise ArgumentError("cannot order an empty set of positions")
    return Ordering(tuple(int(i) for i in rng.permutation(masked)))


def order_confidence(
    probs: Iterable[Tuple[int, Categorical]],
    rng: np.random.Generator,
    jitter: float = CONFIDENCE_JITTER,
) -> Ordering:
    """Descending max-probability, exact ties broken by negligible Gumbel jitter."""
    positions, ps = _positions_and_probs(probs)
    scores = [confidence(p) for p in ps]
    selection = gumbel_top_k(scores, len(positions), jitter, rng)
    return Ordering(tuple(positions[i] for i in selection.indices))


def order_moment(
    probs: Iterable[Tuple[int, Categorical]],
    beta: float,
    rng: np.random.Generator,
    temperature: float = 1.0,
) -> Ordering:
    """Full ranking by log ||p_i||_beta^beta + Gumbel noise."""
    if beta < 1:
        raise ArgumentError(f"moment ordering needs beta >= 1, got {beta}")
    positions, ps = _positions_and_probs(probs)
    mu = [log_power_sum(p, beta) for p in ps]
    selection = gumbel_top_k(mu, len(positions), temperature, rng)
    return Ordering(tuple(positions[i] for i in selection.indices))


def _check_subset(masked: Iterable[int], length: int) -> set:
    masked = {int(i) for i in masked}
    outside = sorted(i for i in masked if not 0 <= i < length)
    if outside:
        raise ArgumentError(f"positions {outside} outside [0, {length})")
    return masked


def _cells(points: np.ndarray, sizes: Sequence[int]) -> np.ndarray:
    # rounding first removes float fuzz such as 0.999999 * 3 landing below a cell edge
    scaled = np.floor(np.round(points * np.asarray(sizes), 9)).astype(np.int64)
    return np.minimum(scaled, np.asarray(sizes) - 1)


def halton_sampler(dims: int) -> qmc.Halton:
    """
    Unscrambled Halton sampler whose axis l runs in base HALTON_BASES[l].

    scipy assigns the first d primes to the axes, so HALTON_BASES fixes how many
    grid axes the orderings support.
    """
    if not 1 <= dims <= len(HALTON_BASES):
        raise ArgumentError(f"Halton orderings support 1 to {len(HALTON_BASES)} grid axes, got {dims}")
    return qmc.Halton(d=dims, scramble=False)


@lru_cache(maxsize=64)
def _halton_permutation(sizes: Tuple[int, ...]) -> Tuple[int, ...]:
    """Every cell of the grid in first-visit order of the unscrambled Halton sequence."""
    total = math.prod(sizes)
    sampler = halton_sampler(len(sizes))
    order, seen = [], set()
    batch = 2 ** math.ceil(math.log2(max(total, 1))) if len(sizes) == 1 else 2 * total
    drawn = 0
    while len(order) < total and drawn < 1024 * total:
        cells = _cells(sampler.random(batch), sizes)
        drawn += batch
        for cell in cells:
            flat = int(np.ravel_multi_index(tuple(cell), sizes))
            if flat not in seen:
                seen.add(flat)
                order.append(flat)
    if len(order) < total:
        missing = [i for i in range(total) if i not in seen]
        logger.warning(f"Halton sequence left {len(missing)} cells unvisited; appending in index order")
        order.extend(missing)
    return tuple(order)


def order_halton_1d(length: int, masked: Iterable[int]) -> Ordering:
    """
    Base-2 van der Corput ordering of [0, D) filtered to the masked positions.

    Point v_t maps to position floor(v_t D); repeated positions are skipped.
    For D a power of two this is the bit-reversal permutation.
    """
    masked = _check_subset(masked, length)
    return Ordering(tuple(i for i in _halton_permutation((length,)) if i in masked))


def order_halton_2d(rows: int, cols: int, masked: Iterable[int], length: Optional[int] = None) -> Ordering:
    """
    Two-dimensional Halton ordering (base 2 rows, base 3 columns) of a row-major grid.

    Raises:
        ArgumentError: if ``length`` is given and differs from rows * cols
    """
    if rows < 1 or cols < 1:
        raise ArgumentError(f"grid must be at least 1x1, got {rows}x{cols}")
    if length is not None and length != rows * cols:
        raise ArgumentError(f"grid {rows}x{cols} does not cover a sequence of length {length}")
    masked = _check_subset(masked, rows * cols)
    return Ordering(tuple(i for i in _halton_permutation((rows, cols)) if i in masked))


def merge_orderings(i: Sequence, j: Sequence, n: int, m: int) -> Ordering:
    """
    Hybrid merge: the first m entries of ``i``, then ``j`` in order skipping taken entries.

    Only the first n entries are unmasked by the caller; the full merge is returned.

    Raises:
        ArgumentError: if i and j order different sets, or not 0 <= m <= n <= len(i)
    """
    i, j = list(i), list(j)
    if len(i) != len(j) or set(i) != set(j) or len(set(i)) != len(i):
        raise ArgumentError("merge needs two orderings of the same set")
    if not 0 <= m <= n <= len(i):
        raise ArgumentError(f"merge needs 0 <= m <= n <= {len(i)}, got m={m}, n={n}")
    head = i[:m]
    taken = set(head)
    return Ordering(tuple(head + [x for x in j if x not in taken]))


class RandomPolicy:
    """At-random index selection."""

    name = "random"

    def order(self, context: PolicyContext, rng: np.random.Generator) -> Ordering:
        return order_random(context.state.masked, rng)


class ConfidencePolicy:
    """Exploitation by maximum conditional probability."""

    name = "confidence"

    def order(self, context: PolicyContext, rng: np.random.Generator) -> Ordering:
        return order_confidence(context.items(), rng)


class MomentPolicy:
    """Moment ranking with the round's beta, recomputed from fresh conditionals."""

    name = "moment"

    def order(self, context: PolicyContext, rng: np.random.Generator) -> Ordering:
        return order_moment(context.items(), context.beta, rng, context.selection_temperature)


class HaltonPolicy:
    """
    Fixed low-discrepancy ordering.

    Uses the 1D van der Corput order unless a (rows, cols) grid is given.
    """

    name = "halton"

    def __init__(self, grid: Optional[Tuple[int, int]] = None):
        self.grid = grid

    def order(self, context: PolicyContext, rng: np.random.Generator) -> Ordering:
        masked = context.state.masked
        if self.grid is None:
            return order_halton_1d(context.state.length, masked)
        rows, cols = self.grid
        return order_halton_2d(rows, cols, masked, length=context.state.length)


class HybridPolicy:
    """
    Exploration ordering for the first m_n picks, exploitation ordering for the rest.

    m_n = round((1 - n/N) |I_n|) moves from pure exploration to pure exploitation.
    """

    name = "hybrid"

    def __init__(self, explore: Optional[Policy] = None, exploit: Optional[Policy] = None):
        self.explore = explore or HaltonPolicy()
        self.exploit = exploit or MomentPolicy()

    def order(self, context: PolicyContext, rng: np.random.Generator) -> Ordering:
        first = self.explore.order(context, rng)
        second = self.exploit.order(context, rng)
        m = hybrid_m(context.step, context.steps, context.step_size)
        return merge_orderings(first.positions, second.positions, context.step_size, m)


def make_policy(name: str, grid: Optional[Tuple[int, int]] = None) -> Policy:
    """Build a policy by name."""
    if name == "random":
        return RandomPolicy()
    if name == "confidence":
        return ConfidencePolicy()
    if name == "moment":
        return MomentPolicy()
    if name == "halton":
        return HaltonPolicy(grid)
    if name == "hybrid":
        return HybridPolicy(HaltonPolicy(grid), MomentPolicy())
    raise ArgumentError(f"unknown policy {name!r}; expected one of {POLICIES}")
