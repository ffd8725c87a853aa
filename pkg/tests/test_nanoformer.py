"""Tests for the nanoformer, its partial KV-cache forward and the transformer-backed model."""

import numpy as np
import pytest
import torch

from conftest import small_transformer
from src.core_engine import ArgumentError, CacheInvalidError, MaskState
from src.experiment_engine import cache_trial, run_replications
from src.model_engine import (
    FlopCounter,
    TransformerConfig,
    TransformerProductModel,
    full_forward,
    full_logits,
    init_params,
    load_params,
    partial_forward,
    partial_logits,
    save_params,
)


def random_state(rng, length, alphabet_size, unmasked):
    positions = rng.choice(length, size=unmasked, replace=False)
    return MaskState(length, {int(i): int(rng.integers(alphabet_size)) for i in positions})


def refresh_gap(params, state, positions, committed):
    _, cache = full_logits(params, state)
    refreshed = partial_logits(params, cache, positions, committed, state=state)
    oracle, _ = full_logits(params, state.commit(committed))
    rows = [r for r, i in enumerate(positions) if i not in committed]
    return float((refreshed[rows] - oracle[[positions[r] for r in rows]]).abs().max())


def test_params_are_a_function_of_the_seed():
    config = small_transformer()
    assert init_params(1, config).checksum == init_params(1, config).checksum
    assert init_params(1, config).checksum != init_params(2, config).checksum


def test_config_rejects_unknown_fields():
    with pytest.raises(ArgumentError):
        TransformerConfig.from_dict({"layers": 2, "depth": 3})
    with pytest.raises(ArgumentError):
        TransformerConfig(dtype="float16")


def test_full_forward_gives_distributions(small_params):
    conditionals, cache = full_forward(small_params, MaskState(8, {2: 1}))
    assert len(conditionals) == 8
    assert all(abs(p.probs.sum() - 1.0) < 1e-12 for p in conditionals.values())
    assert len(cache.keys) == small_params.config.layers


def test_single_layer_refresh_is_exact(rng):
    """L=1: refreshed logits on B equal a fresh forward with A committed."""
    for trial in range(50):
        params = init_params(trial, small_transformer(layers=1))
        state = random_state(rng, 8, 4, int(rng.integers(0, 4)))
        masked = list(state.masked)
        positions = [int(i) for i in rng.choice(masked, size=4, replace=False)]
        committed = {i: int(rng.integers(4)) for i in positions[:2]}
        assert refresh_gap(params, state, positions, committed) <= 1e-12


@pytest.mark.parametrize("layers", [1, 2, 3])
def test_refresh_with_nothing_committed_is_exact(rng, layers):
    params = init_params(11, small_transformer(layers=layers))
    for _ in range(10):
        state = random_state(rng, 8, 4, 2)
        positions = list(state.masked)[:3]
        assert refresh_gap(params, state, positions, {}) <= 1e-12


def test_deep_refresh_beats_stale_logits():
    """L=3: the refreshed logits on B are closer to the oracle than the stale ones."""
    config = small_transformer(layers=3, seq_len=16, alphabet_size=8)
    wins = 0
    for trial in range(100):
        result = cache_trial(config, 1000 + trial, np.random.default_rng(trial), round_size=4, a_size=2)
        wins += result["error"] < result["stale"]
    assert wins >= 90


def test_attention_flop_ratio(small_params):
    counter = FlopCounter()
    state = MaskState.empty(8)
    _, cache = full_logits(small_params, state, counter)
    full = counter.attention
    partial_logits(small_params, cache, [0, 3, 5], {0: 1}, state=state, counter=counter)
    assert counter.attention / full == pytest.approx(1 + 3 / 8)
    assert counter.full_passes == 1 and counter.partial_passes == 1


def test_stale_cache_is_rejected(small_params):
    _, cache = full_logits(small_params, MaskState.empty(8))
    with pytest.raises(CacheInvalidError):
        partial_logits(small_params, cache, [1, 2], {}, state=MaskState(8, {0: 1}))
    other = init_params(99, small_params.config)
    with pytest.raises(CacheInvalidError):
        partial_logits(other, cache, [1, 2], {})


def test_partial_forward_argument_checks(small_params):
    state = MaskState(8, {0: 2})
    _, cache = full_logits(small_params, state)
    with pytest.raises(ArgumentError):
        partial_logits(small_params, cache, [1, 2], {3: 0})
    with pytest.raises(ArgumentError):
        partial_logits(small_params, cache, [0, 1], {})
    with pytest.raises(ArgumentError):
        partial_logits(small_params, cache, [1, 1], {})


def test_partial_forward_returns_only_the_uncommitted_part(small_params):
    state = MaskState.empty(8)
    _, cache = full_logits(small_params, state)
    refreshed = partial_forward(small_params, cache, [1, 4, 6], {4: 0}, state=state)
    assert set(refreshed) == {1, 6}


def test_save_and_load(tmp_path, small_params):
    path = tmp_path / "params.bin"
    save_params(small_params, path)
    loaded = load_params(path)
    assert loaded.checksum == small_params.checksum
    state = MaskState(8, {3: 1})
    assert torch.equal(full_logits(loaded, state)[0], full_logits(small_params, state)[0])


def test_single_precision_option():
    params = init_params(5, small_transformer(dtype="float32"))
    logits, _ = full_logits(params, MaskState.empty(8))
    assert logits.dtype == torch.float32


def test_token_prior_skews_the_unigram_law():
    params = init_params(5, small_transformer(layers=1, token_prior=2.0))
    assert params["out_bias"][0] > params["out_bias"][-1]
    flat = init_params(5, small_transformer(layers=1, token_prior=0.0))
    assert torch.all(flat["out_bias"] == 0)


def test_product_model_interface(small_params):
    model = TransformerProductModel(small_params)
    state = MaskState(8, {0: 1, 7: 3})
    conditionals = model.conditionals(state)
    assert sorted(conditionals) == list(state.masked)
    with pytest.raises(ArgumentError):
        model.conditional(state, 0)
    refreshed = model.refresh(model.forward_with_cache(state)[1], [1, 2], {1: 0}, state=state)
    assert set(refreshed) == {2}
    assert model.counter.partial_passes == 1


def test_shared_counter_totals_do_not_depend_on_workers(small_params):
    """Replications on worker threads add to one counter without losing updates."""

    def task(rep, rng):
        state = random_state(rng, 8, 4, int(rng.integers(0, 6)))
        conditionals, cache = model.forward_with_cache(state)
        masked = list(state.masked)[:2]
        model.refresh(cache, masked, {masked[0]: 0}, state=state)
        return len(conditionals)

    totals = []
    for workers in (1, 4):
        model = TransformerProductModel(small_params)
        run_replications(task, 200, 3, "shared-counter", workers=workers)
        counter = model.counter
        totals.append((counter.attention, counter.dense, counter.full_passes, counter.partial_passes))
    assert totals[0] == totals[1]
    assert totals[0][2] == 200 and totals[0][3] == 200


def test_counter_reset():
    counter = FlopCounter()
    counter.add(10, 20, partial=True)
    counter.reset()
    assert (counter.attention, counter.dense, counter.full_passes, counter.partial_passes) == (0, 0, 0, 0)


def test_without_positions_the_network_is_permutation_equivariant(rng):
    params = init_params(11, small_transformer(layers=2, positional=False))
    state = random_state(rng, 8, 4, 3)
    perm = rng.permutation(8)
    permuted = MaskState(8, {int(perm[i]): x for i, x in state.tokens.items()})
    logits, _ = full_logits(params, state)
    moved, _ = full_logits(params, permuted)
    assert torch.allclose(moved[torch.as_tensor(perm)], logits, atol=1e-10)
