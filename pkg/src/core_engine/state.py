"""
Mask State - Partially unmasked sequences and the product-model interface
"""

import hashlib
from dataclasses import dataclass, field
from typing import Dict, Iterable, Mapping, Optional, Protocol, Tuple, runtime_checkable

import numpy as np

from .categorical import Categorical
from .errors import ArgumentError


@dataclass(frozen=True)
class MaskState:
    """
    A length-D sequence with tokens fixed on the unmasked set J.

    ``tokens`` maps position -> token for exactly the positions in J.
    Instances are immutable; ``commit`` returns a new state.
    """

    length: int
    tokens: Mapping[int, int] = field(default_factory=dict)

    def __post_init__(self):
        if self.length < 1:
            raise ArgumentError(f"sequence length must be positive, got {self.length}")
        tokens = {int(i): int(x) for i, x in dict(self.tokens).items()}
        for position in tokens:
            if not 0 <= position < self.length:
                raise ArgumentError(f"position {position} outside [0, {self.length})")
        object.__setattr__(self, "tokens", dict(sorted(tokens.items())))

    @classmethod
    def empty(cls, length: int) -> "MaskState":
        return cls(length, {})

    @property
    def unmasked(self) -> Tuple[int, ...]:
        return tuple(self.tokens)

    @property
    def masked(self) -> Tuple[int, ...]:
        return tuple(i for i in range(self.length) if i not in self.tokens)

    @property
    def complete(self) -> bool:
        return len(self.tokens) == self.length

    def is_masked(self, position: int) -> bool:
        return position not in self.tokens

    def commit(self, updates: Mapping[int, int]) -> "MaskState":
        """Return a new state with ``updates`` unmasked."""
        overlap = [i for i in updates if i in self.tokens]
        if overlap:
            raise ArgumentError(f"positions already unmasked: {overlap}")
        merged = dict(self.tokens)
        merged.update(updates)
        return MaskState(self.length, merged)

    def as_array(self, mask_token: int) -> np.ndarray:
        """Token ids with ``mask_token`` at masked positions."""
        array = np.full(self.length, mask_token, dtype=np.int64)
        for position, token in self.tokens.items():
            array[position] = token
        return array

    def sequence(self) -> Tuple[int, ...]:
        """The full token sequence; only defined once every position is unmasked."""
        if not self.complete:
            raise ArgumentError(f"{len(self.masked)} positions are still masked")
        return tuple(self.tokens[i] for i in range(self.length))

    def fingerprint(self) -> str:
        payload = f"{self.length}|" + ",".join(f"{i}:{x}" for i, x in self.tokens.items())
        return hashlib.sha1(payload.encode("ascii")).hexdigest()


@runtime_checkable
class ProductModel(Protocol):
    """
    Per-position conditional provider p_{i|J}(. | x_J).

    Implementations return distributions over the same alphabet for every
    position and never for an unmasked position.
    """

    alphabet_size: int
    length: int

    def conditional(self, state: MaskState, position: int) -> Categorical:
        ...

    def conditionals(self, state: MaskState, positions: Optional[Iterable[int]] = None) -> Dict[int, Categorical]:
        ...


def check_query(state: MaskState, position: int) -> None:
    """Reject conditionals queried at an already unmasked position."""
    if not state.is_masked(position):
        raise ArgumentError(f"position {position} is unmasked; conditionals exist only for masked positions")
