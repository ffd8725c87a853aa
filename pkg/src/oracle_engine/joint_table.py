"""
Joint Table - Explicit joint distributions over S^D and their exact conditionals
"""

import json
import logging
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple, Union

import numpy as np

from config import JOINT_CAPACITY, JOINT_SUM_TOL
from src.core_engine import (
    ArgumentError,
    CapacityError,
    Categorical,
    ConditioningError,
    InvalidDistributionError,
    MaskState,
    check_query,
)

logger = logging.getLogger(__name__)


def _check_capacity(length: int, alphabet_size: int) -> None:
    if alphabet_size < 1 or length < 1:
        raise ArgumentError("joint tables need D >= 1 and |S| >= 1")
    if alphabet_size**length > JOINT_CAPACITY:
        raise CapacityError(f"|S|^D = {alphabet_size}^{length} exceeds the joint capacity {JOINT_CAPACITY}")


@dataclass(eq=False)
class JointTable:
    """
    Dense joint distribution q over S^D.

    ``probs`` has shape (|S|,) * D; axis d is coordinate d and the flat
    row-major layout puts coordinate 0 slowest.
    """

    length: int
    alphabet_size: int
    probs: np.ndarray

    def __post_init__(self):
        _check_capacity(self.length, self.alphabet_size)
        probs = np.array(self.probs, dtype=np.float64).reshape((self.alphabet_size,) * self.length)
        if np.any(probs < 0) or not np.all(np.isfinite(probs)):
            raise InvalidDistributionError("joint probabilities must be finite and non-negative")
        total = float(probs.sum())
        if abs(total - 1.0) > JOINT_SUM_TOL:
            raise InvalidDistributionError(f"joint table sums to {total!r}, not 1")
        probs.setflags(write=False)
        self.probs = probs

    @classmethod
    def random(
        cls,
        length: int,
        alphabet_size: int,
        rng: np.random.Generator,
        concentration: float = 1.0,
    ) -> "JointTable":
        """Dirichlet(concentration) draw over all |S|^D outcomes."""
        _check_capacity(length, alphabet_size)
        weights = rng.dirichlet(np.full(alphabet_size**length, concentration))
        return cls(length, alphabet_size, weights / weights.sum())

    @classmethod
    def product(cls, marginals: Sequence[Categorical]) -> "JointTable":
        """Independent coordinates with the given marginals."""
        table = np.ones(())
        for p in marginals:
            table = np.multiply.outer(table, p.probs)
        return cls(len(marginals), marginals[0].size, table)

    @classmethod
    def from_dict(cls, payload: Mapping) -> "JointTable":
        return cls(int(payload["D"]), int(payload["S"]), np.asarray(payload["probs"], dtype=np.float64))

    @classmethod
    def from_json(cls, text: str) -> "JointTable":
        return cls.from_dict(json.loads(text))

    @classmethod
    def load(cls, path: Union[str, Path]) -> "JointTable":
        return cls.from_json(Path(path).read_text())

    def to_dict(self) -> Dict:
        return {"D": self.length, "S": self.alphabet_size, "probs": self.probs.reshape(-1).tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(self.to_json())
        logger.info(f"Joint table D={self.length}, |S|={self.alphabet_size} written to {path}")

    def prob(self, sequence: Sequence[int]) -> float:
        return float(self.probs[tuple(sequence)])

    def pmf(self) -> Dict[Tuple[int, ...], float]:
        """Outcome -> probability over the support."""
        return {tuple(int(i) for i in index): float(p) for index, p in np.ndenumerate(self.probs) if p > 0}

    def marginal(self, positions: Sequence[int]) -> np.ndarray:
        """Joint law of ``positions``, with axes in the order given."""
        positions = [int(i) for i in positions]
        if len(set(positions)) != len(positions):
            raise ArgumentError(f"marginal positions repeat: {positions}")
        others = tuple(d for d in range(self.length) if d not in positions)
        summed = self.probs.sum(axis=others) if others else self.probs
        kept = sorted(positions)
        return np.transpose(summed, [kept.index(i) for i in positions])

    def marginal_categorical(self, position: int) -> Categorical:
        return Categorical(self.marginal([position]))


def conditional(q: JointTable, position: int, given: Mapping[int, int]) -> Categorical:
    """
    Exact q_{i|J}(. | x_J) by summation over the unconstrained coordinates.

    Args:
        q: Joint table
        position: Query coordinate i (not in J)
        given: Conditioning tokens x_J as position -> token

    Raises:
        ArgumentError: if i is in J
        ConditioningError: if the conditioning event has probability zero
    """
    if position in given:
        raise ArgumentError(f"query position {position} is in the conditioning set")
    index = tuple(given[d] if d in given else slice(None) for d in range(q.length))
    sub = q.probs[index]
    free = [d for d in range(q.length) if d not in given]
    axis = free.index(position)
    weights = sub.sum(axis=tuple(a for a in range(sub.ndim) if a != axis))
    total = float(weights.sum())
    if total <= 0:
        raise ConditioningError(f"conditioning event {dict(given)} has probability zero")
    return Categorical(weights / total)


class ExactConditionalModel:
    """
    ProductModel backed by a JointTable: p_{i|J} = q_{i|J} exactly.

    Conditionals are memoized per unmasked configuration.
    """

    def __init__(self, q: JointTable):
        self.q = q
        self.length = q.length
        self.alphabet_size = q.alphabet_size
        self._memo: Dict[Tuple[Tuple[int, int], ...], Dict[int, Categorical]] = {}
        self._lock = threading.Lock()

    def conditional(self, state: MaskState, position: int) -> Categorical:
        check_query(state, position)
        return self.conditionals(state)[position]

    def conditionals(self, state: MaskState, positions: Optional[Iterable[int]] = None) -> Dict[int, Categorical]:
        key = tuple(state.tokens.items())
        with self._lock:
            cached = self._memo.get(key)
        if cached is None:
            cached = {i: conditional(self.q, i, state.tokens) for i in state.masked}
            with self._lock:
                self._memo[key] = cached
        if positions is None:
            return dict(cached)
        for position in positions:
            check_query(state, position)
        return {i: cached[i] for i in positions}
