"""
Transformer Product Model - Nanoformer conditionals behind the ProductModel interface
"""

import logging
from typing import Dict, Iterable, Mapping, Optional, Sequence, Tuple

from src.core_engine import Categorical, MaskState, check_query
from .nanoformer import FlopCounter, KVCache, TransformerParams, full_forward, partial_forward

logger = logging.getLogger(__name__)


class TransformerProductModel:
    """
    ProductModel whose p_{i|J} are the nanoformer's per-position softmax outputs.

    Exposes ``forward_with_cache`` and ``refresh`` for the partially cached driver
    and counts forward FLOPs in ``counter``.
    """

    def __init__(self, params: TransformerParams, counter: Optional[FlopCounter] = None):
        self.params = params
        self.length = params.config.seq_len
        self.alphabet_size = params.config.alphabet_size
        self.counter = counter if counter is not None else FlopCounter()

    def conditionals(self, state: MaskState, positions: Optional[Iterable[int]] = None) -> Dict[int, Categorical]:
        conditionals, _ = self.forward_with_cache(state)
        if positions is None:
            return conditionals
        wanted = list(positions)
        for position in wanted:
            check_query(state, position)
        return {i: conditionals[i] for i in wanted}

    def conditional(self, state: MaskState, position: int) -> Categorical:
        check_query(state, position)
        return self.conditionals(state)[position]

    def forward_with_cache(self, state: MaskState) -> Tuple[Dict[int, Categorical], KVCache]:
        """Masked-position conditionals and the KV cache of one full forward."""
        outputs, cache = full_forward(self.params, state, self.counter)
        return {i: outputs[i] for i in state.masked}, cache

    def refresh(
        self,
        cache: KVCache,
        positions: Sequence[int],
        committed: Mapping[int, int],
        state: Optional[MaskState] = None,
    ) -> Dict[int, Categorical]:
        """Conditionals on positions \\ committed after committing A, from a partial forward over I."""
        refreshed = partial_forward(self.params, cache, positions, committed, state=state, counter=self.counter)
        logger.debug(f"refreshed {len(refreshed)} of {len(positions)} positions after committing {len(committed)}")
        return refreshed
