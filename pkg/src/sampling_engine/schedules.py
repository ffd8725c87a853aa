"""
Schedules - Unmasking sizes, Gumbel temperatures, caching half-steps and hybrid merge counts
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd

from config import SCHEDULE_KINDS
from src.core_engine import ArgumentError
from utils.helpers import GeneralHelpers

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class UnmaskSchedule:
    """
    Predetermined cumulative unmasked counts |J_0|, ..., |J_N|.

    |J_0| = 0, |J_N| = D and the counts never decrease.
    """

    kind: str
    length: int
    steps: int
    cumulative: Tuple[int, ...]

    def __post_init__(self):
        cumulative = tuple(int(c) for c in self.cumulative)
        if len(cumulative) != self.steps + 1:
            raise ArgumentError(f"expected {self.steps + 1} cumulative counts, got {len(cumulative)}")
        if cumulative[0] != 0 or cumulative[-1] != self.length:
            raise ArgumentError(f"schedule must run from 0 to {self.length}: {cumulative}")
        if any(b < a for a, b in zip(cumulative, cumulative[1:])):
            raise ArgumentError(f"schedule must be nondecreasing: {cumulative}")
        object.__setattr__(self, "cumulative", cumulative)

    @property
    def sizes(self) -> Tuple[int, ...]:
        """|I_n| for n = 1..N."""
        return tuple(b - a for a, b in zip(self.cumulative, self.cumulative[1:]))

    def step_size(self, n: int) -> int:
        return self.sizes[n - 1]

    def fraction(self, t: float) -> float:
        """Unrounded |J_t| / D at a (possibly fractional) step t."""
        return _schedule_fraction(self.kind, t / self.steps)


def _schedule_fraction(kind: str, ratio: float) -> float:
    if kind == "uniform":
        return ratio
    if kind == "cosine":
        return math.cos(0.5 * math.pi * (1.0 - ratio))
    raise ArgumentError(f"unknown schedule kind {kind!r}; expected one of {SCHEDULE_KINDS}")


def unmask_counts(kind: str, length: int, steps: int) -> UnmaskSchedule:
    """
    Build an unmasking schedule.

    uniform: |J_n| = round(D n / N); cosine: |J_n| = round(D cos(pi/2 (1 - n/N))).
    Rounding is half away from zero and the endpoints are forced to 0 and D.

    Raises:
        ArgumentError: unknown kind, or N outside [1, D]
    """
    if not 1 <= steps <= length:
        raise ArgumentError(f"steps must satisfy 1 <= N <= D={length}, got N={steps}")
    counts = [
        GeneralHelpers.round_half_away(length * _schedule_fraction(kind, n / steps))
        for n in range(steps + 1)
    ]
    counts[0], counts[-1] = 0, length
    counts = np.clip(np.maximum.accumulate(counts), 0, length)
    schedule = UnmaskSchedule(kind, length, steps, tuple(int(c) for c in counts))
    empty = schedule.sizes.count(0)
    if empty:
        logger.debug(f"{kind} schedule D={length}, N={steps} has {empty} empty steps")
    return schedule


def gumbel_temp(alpha: float, n: int, steps: int) -> float:
    """
    Gumbel temperature alpha (1 - n/N) of step n; exactly 0 at the final step.
    """
    if not 1 <= n <= steps:
        raise ArgumentError(f"step must satisfy 1 <= n <= N={steps}, got n={n}")
    if n == steps:
        return 0.0
    return alpha * (1.0 - n / steps)


def half_step_counts(schedule: UnmaskSchedule) -> List[int]:
    """
    |J_{n-1/2}| for n = 1..N, the same formula evaluated at n - 1/2 and clamped
    into [|J_{n-1}|, |J_n|].
    """
    halves = []
    for n in range(1, schedule.steps + 1):
        value = GeneralHelpers.round_half_away(schedule.length * schedule.fraction(n - 0.5))
        low, high = schedule.cumulative[n - 1], schedule.cumulative[n]
        halves.append(min(max(value, low), high))
    return halves


def hybrid_m(n: int, steps: int, step_size: int) -> int:
    """Indices taken from the exploration ordering at step n: round((1 - n/N) |I_n|)."""
    if not 1 <= n <= steps:
        raise ArgumentError(f"step must satisfy 1 <= n <= N={steps}, got n={n}")
    m = GeneralHelpers.round_half_away((1.0 - n / steps) * step_size)
    return min(max(m, 0), step_size)


def schedule_table(schedule: UnmaskSchedule, alpha: Optional[float] = None) -> pd.DataFrame:
    """Rows (n, J_n, I_n, tau_n) for n = 0..N; tau is empty when alpha is not given."""
    rows = []
    for n, count in enumerate(schedule.cumulative):
        step = schedule.sizes[n - 1] if n > 0 else 0
        tau = gumbel_temp(alpha, n, schedule.steps) if (alpha is not None and n > 0) else None
        rows.append({"n": n, "J_n": count, "I_n": step, "tau_n": tau})
    return pd.DataFrame(rows, columns=["n", "J_n", "I_n", "tau_n"])
