"""Tests for position orderings and the policies built on them."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from config import HALTON_BASES
from src.core_engine import ArgumentError, Categorical, MaskState, log_power_sum, top_k_prefix_pmf
from src.research_tools import EmpiricalPmf, tv_empirical
from src.sampling_engine import (
    ConfidencePolicy,
    HaltonPolicy,
    HybridPolicy,
    MomentPolicy,
    PolicyContext,
    RandomPolicy,
    halton_sampler,
    make_policy,
    merge_orderings,
    order_confidence,
    order_halton_1d,
    order_halton_2d,
    order_moment,
    order_random,
)


def context_for(state, conditionals, step=1, steps=4, step_size=2, beta=2.0, temperature=1.0):
    return PolicyContext(state, conditionals, step, steps, step_size, beta, temperature)


def test_merge_worked_example():
    merged = merge_orderings((2, 3, 6, 5, 1, 4), (4, 3, 1, 5, 6, 2), 4, 2)
    assert merged.positions == (2, 3, 4, 1, 5, 6)
    assert merged.prefix(4) == (2, 3, 4, 1)


@given(st.permutations(list(range(8))), st.permutations(list(range(8))), st.data())
@settings(max_examples=150, deadline=None)
def test_merge_properties(i, j, data):
    n = data.draw(st.integers(0, 8))
    m = data.draw(st.integers(0, n))
    merged = merge_orderings(i, j, n, m).positions
    assert sorted(merged) == list(range(8))
    assert merged[:m] == tuple(i[:m])
    assert merge_orderings(i, i, n, m).positions == tuple(i)
    assert merge_orderings(i, j, n, 0).positions == tuple(j)


def test_merge_rejects_mismatched_sets():
    with pytest.raises(ArgumentError):
        merge_orderings((0, 1, 2), (0, 1, 3), 2, 1)
    with pytest.raises(ArgumentError):
        merge_orderings((0, 1, 2), (2, 1, 0), 2, 3)


def test_halton_1d_is_bit_reversal():
    assert order_halton_1d(8, range(8)).positions == (0, 4, 2, 6, 1, 5, 3, 7)


def test_halton_1d_filters_masked_positions():
    assert order_halton_1d(8, [1, 2, 6, 7]).positions == (2, 6, 1, 7)


@given(st.integers(1, 6), st.integers(1, 6))
@settings(max_examples=36, deadline=None)
def test_halton_2d_is_a_permutation(rows, cols):
    order = order_halton_2d(rows, cols, range(rows * cols)).positions
    assert sorted(order) == list(range(rows * cols))


def test_halton_2d_grid_mismatch():
    with pytest.raises(ArgumentError):
        order_halton_2d(2, 3, range(6), length=8)


@given(st.integers(2, 12), st.data())
@settings(max_examples=100, deadline=None)
def test_adaptive_orderings_are_permutations(length, data):
    masked = data.draw(st.lists(st.integers(0, length - 1), min_size=1, unique=True))
    rng = np.random.default_rng(length)
    probs = [(i, Categorical(rng.dirichlet(np.ones(3)))) for i in masked]
    for ordering in (
        order_random(masked, rng),
        order_confidence(probs, rng),
        order_moment(probs, 2.0, rng),
        order_halton_1d(length, masked),
    ):
        assert sorted(ordering.positions) == sorted(masked)


def test_confidence_orders_by_max_probability(rng):
    probs = [(3, Categorical(np.array([0.5, 0.5]))), (5, Categorical(np.array([0.9, 0.1]))), (7, Categorical(np.array([0.3, 0.7])))]
    assert order_confidence(probs, rng).positions == (5, 7, 3)


def test_moment_zero_temperature_is_deterministic(rng):
    probs = [(0, Categorical.uniform(4)), (1, Categorical.one_hot(4, 2)), (2, Categorical(np.array([0.7, 0.1, 0.1, 0.1])))]
    assert order_moment(probs, 2.0, rng, temperature=0.0).positions == (1, 2, 0)
    with pytest.raises(ArgumentError):
        order_moment(probs, 0.5, rng)


def test_policies_only_order_masked_positions(rng):
    state = MaskState(6, {1: 0, 4: 1})
    conditionals = {i: Categorical(rng.dirichlet(np.ones(2))) for i in state.masked}
    context = context_for(state, conditionals)
    for policy in (RandomPolicy(), ConfidencePolicy(), MomentPolicy(), HaltonPolicy(), HybridPolicy(), HaltonPolicy((2, 3))):
        assert sorted(policy.order(context, rng).positions) == [0, 2, 3, 5]


def test_hybrid_takes_exploration_head(rng):
    state = MaskState.empty(8)
    conditionals = {i: Categorical(rng.dirichlet(np.ones(2))) for i in range(8)}
    context = context_for(state, conditionals, step=1, steps=2, step_size=4)
    ordering = HybridPolicy().order(context, rng)
    assert ordering.positions[:2] == (0, 4)


def test_make_policy():
    assert make_policy("hybrid").name == "hybrid"
    assert make_policy("halton", (2, 4)).grid == (2, 4)
    with pytest.raises(ArgumentError):
        make_policy("greedy")


def radical_inverse(n, base):
    value, scale = 0.0, 1.0 / base
    while n:
        n, digit = divmod(n, base)
        value += digit * scale
        scale /= base
    return value


def test_halton_axes_use_the_configured_bases():
    points = halton_sampler(len(HALTON_BASES)).random(40)
    expected = [[radical_inverse(n, base) for base in HALTON_BASES] for n in range(40)]
    assert np.allclose(points, expected, atol=1e-12)
    with pytest.raises(ArgumentError):
        halton_sampler(len(HALTON_BASES) + 1)
    with pytest.raises(ArgumentError):
        order_halton_2d(0, 3, [0])


def test_random_order_is_uniform_over_permutations(rng):
    samples = EmpiricalPmf.from_samples(order_random([4, 7, 9], rng).positions for _ in range(60_000))
    uniform = {perm: 1 / 6 for perm in itertools.permutations([4, 7, 9])}
    assert tv_empirical(samples, uniform) < 0.02


def test_confidence_ties_are_broken_uniformly(rng):
    probs = [(i, Categorical(np.array([0.6, 0.4]))) for i in range(3)]
    samples = EmpiricalPmf.from_samples(order_confidence(probs, rng).positions for _ in range(60_000))
    uniform = {perm: 1 / 6 for perm in itertools.permutations(range(3))}
    assert tv_empirical(samples, uniform) < 0.02


def test_moment_order_prefix_law(rng):
    """Two-position prefixes of the moment ranking follow Gumbel-top-k on log power sums."""
    ps = [Categorical(rng.dirichlet(np.ones(3))) for _ in range(4)]
    mu = [log_power_sum(p, 2.0) for p in ps]
    probs = list(enumerate(ps))
    samples = EmpiricalPmf.from_samples(order_moment(probs, 2.0, rng).prefix(2) for _ in range(60_000))
    exact = {prefix: top_k_prefix_pmf(mu, prefix) for prefix in itertools.permutations(range(4), 2)}
    assert tv_empirical(samples, exact) < 0.03
