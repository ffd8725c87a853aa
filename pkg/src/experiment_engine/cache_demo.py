"""
Cache Demo - Error and cost of partial KV caching against a fresh full forward
"""

import logging
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.core_engine import MaskState
from src.model_engine import FlopCounter, TransformerConfig, full_logits, init_params, partial_logits
from src.research_tools import RunLedger
from utils.helpers import GeneralHelpers
from .experiment_config import ExperimentConfig
from .seeding import run_replications, stream_int

logger = logging.getLogger(__name__)

CACHE_COLUMNS = [
    "layers",
    "a_fraction",
    "a_size",
    "round_size",
    "length",
    "trials",
    "mean_error",
    "max_error",
    "mean_stale_error",
    "refresh_wins",
    "flop_ratio",
    "expected_flop_ratio",
]


def random_round(
    rng: np.random.Generator, length: int, alphabet_size: int, round_size: int, a_size: int
) -> Tuple[MaskState, List[int], Dict[int, int]]:
    """A random partial state, a round I of masked positions and committed tokens on its first a_size entries."""
    unmasked_count = int(rng.integers(0, length - round_size + 1))
    order = rng.permutation(length)
    unmasked = order[:unmasked_count]
    state = MaskState(length, {int(i): int(rng.integers(alphabet_size)) for i in unmasked})
    positions = [int(i) for i in order[unmasked_count : unmasked_count + round_size]]
    committed = {i: int(rng.integers(alphabet_size)) for i in positions[:a_size]}
    return state, positions, committed


def cache_trial(
    transformer: TransformerConfig,
    seed: int,
    rng: np.random.Generator,
    round_size: int,
    a_size: int,
) -> Dict[str, float]:
    """
    One paired comparison on a fresh seeded model.

    The oracle is a full forward on the state with A committed. The refreshed
    logits on B come from a partial forward; the stale ones from the cached pass.
    """
    params = init_params(seed, transformer)
    state, positions, committed = random_round(rng, transformer.seq_len, transformer.alphabet_size, round_size, a_size)
    counter = FlopCounter()
    cached, cache = full_logits(params, state, counter)
    full_attention = counter.attention
    refreshed = partial_logits(params, cache, positions, committed, state=state, counter=counter)
    oracle, _ = full_logits(params, state.commit(committed))

    rest = [row for row, i in enumerate(positions) if i not in committed]
    rest_positions = [positions[row] for row in rest]
    error = float((refreshed[rest] - oracle[rest_positions]).abs().max())
    stale = float((cached[rest_positions] - oracle[rest_positions]).abs().max())
    return {"error": error, "stale": stale, "flop_ratio": counter.attention / full_attention}


def cache_demo_row(config: ExperimentConfig, layers: int, fraction: float) -> Dict:
    overrides = {"alphabet_size": config.alphabet_size, "seq_len": config.length, **config.transformer, "layers": layers}
    transformer = TransformerConfig.from_dict(overrides)
    round_size = min(config.round_size, config.length)
    a_size = GeneralHelpers.round_half_away(fraction * round_size)
    a_size = min(a_size, round_size - 1)
    stream = f"cache/{layers}/{fraction}"

    def task(rep: int, rng: np.random.Generator) -> Dict[str, float]:
        return cache_trial(transformer, stream_int(config.seed, stream, rep), rng, round_size, a_size)

    trials = run_replications(task, config.trials, config.seed, stream, config.workers)
    errors = np.array([t["error"] for t in trials])
    stale = np.array([t["stale"] for t in trials])
    return {
        "layers": layers,
        "a_fraction": fraction,
        "a_size": a_size,
        "round_size": round_size,
        "length": config.length,
        "trials": config.trials,
        "mean_error": float(errors.mean()),
        "max_error": float(errors.max()),
        "mean_stale_error": float(stale.mean()),
        "refresh_wins": int(np.sum(errors < stale)),
        "flop_ratio": float(np.mean([t["flop_ratio"] for t in trials])),
        "expected_flop_ratio": 1.0 + round_size / config.length,
    }


@GeneralHelpers.timer
def run_cache_demo(config: ExperimentConfig, ledger: Optional[RunLedger] = None) -> pd.DataFrame:
    """Rows for every (L, A-fraction) pair, including L = 1 exactness and A = empty rows."""
    rows = []
    for layers in config.layers:
        for fraction in config.fractions:
            rows.append(cache_demo_row(config, layers, fraction))
            logger.info(
                f"cache-demo L={layers} A-fraction={fraction}: mean error={rows[-1]['mean_error']:.3g} "
                f"stale={rows[-1]['mean_stale_error']:.3g}"
            )
            if ledger is not None:
                ledger.log_event("row", {"layers": layers, "a_fraction": fraction})
    return pd.DataFrame(rows, columns=CACHE_COLUMNS).sort_values(["layers", "a_fraction"], kind="mergesort").reset_index(drop=True)
