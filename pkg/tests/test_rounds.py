"""Tests for single MaskGIT and moment rounds and their exact laws."""

import itertools
import math

import numpy as np
import pytest

from src.core_engine import ArgumentError, CapacityError, Categorical
from src.research_tools import EmpiricalPmf, tv_empirical, tv_exact
from src.sampling_engine import (
    RoundOutcome,
    maskgit_round,
    maskgit_round_batch,
    maskgit_round_exact_pmf,
    moment_beta,
    moment_round,
    moment_round_batch,
    moment_round_exact_pmf,
    tv_theorem_bound,
)


def random_ps(rng, n, size):
    return [Categorical(rng.dirichlet(np.ones(size))) for _ in range(n)]


def test_moment_beta():
    assert moment_beta(1.0) == 2.0
    assert moment_beta(math.inf) == 1.0
    with pytest.raises(ArgumentError):
        moment_beta(0.0)


def test_round_outcome_rejects_repeats():
    with pytest.raises(ArgumentError):
        RoundOutcome((1, 1), (0, 0))


def test_rounds_validate_k(rng):
    ps = random_ps(rng, 3, 2)
    with pytest.raises(ArgumentError):
        maskgit_round(ps, 4, 1.0, rng)
    with pytest.raises(ArgumentError):
        moment_round(ps, 0, 1.0, 2.0, rng)


def test_round_outputs_are_valid(rng):
    ps = random_ps(rng, 5, 3)
    for _ in range(100):
        outcome = moment_round(ps, 3, 2.0, 1.5, rng)
        assert len(set(outcome.indices)) == 3
        assert all(0 <= x < 3 for x in outcome.tokens)
        outcome = maskgit_round(ps, 2, 1.0, rng)
        assert len(set(outcome.indices)) == 2


def test_moment_example():
    """One certain and one uniform binary position: the certain one is picked first w.p. 2/3."""
    pmf = moment_round_exact_pmf([Categorical.one_hot(2, 0), Categorical.uniform(2)], 1, 1.0, 2.0)
    assert pmf.index_marginal()[(0,)] == pytest.approx(2 / 3, abs=1e-12)
    assert pmf[((0,), (0,))] == pytest.approx(2 / 3, abs=1e-12)


def test_exact_pmfs_sum_to_one(rng):
    ps = random_ps(rng, 4, 3)
    assert moment_round_exact_pmf(ps, 2, 1.0, 2.0).total() == pytest.approx(1.0, abs=1e-12)
    assert maskgit_round_exact_pmf(ps, 2, 1.0).total() == pytest.approx(1.0, abs=1e-12)


def test_moment_exact_matches_monte_carlo(rng):
    """N=6, k=2, |S|=3, alpha=1, gamma=beta: 10^6 batch draws within TV 0.01."""
    ps = random_ps(rng, 6, 3)
    exact = moment_round_exact_pmf(ps, 2, 1.0, 2.0)
    indices, tokens = moment_round_batch(ps, 2, 1.0, 2.0, rng, 10**6)
    assert tv_empirical(EmpiricalPmf.from_round_arrays(indices, tokens), exact.table) < 0.01


def test_maskgit_exact_matches_monte_carlo(rng):
    ps = random_ps(rng, 4, 2)
    exact = maskgit_round_exact_pmf(ps, 2, 1.0)
    indices, tokens = maskgit_round_batch(ps, 2, 1.0, rng, 10**6)
    assert tv_empirical(EmpiricalPmf.from_round_arrays(indices, tokens), exact.table) < 0.01


def test_single_round_matches_exact_law(rng):
    ps = random_ps(rng, 3, 2)
    exact = moment_round_exact_pmf(ps, 2, 2.0, 1.0)
    samples = EmpiricalPmf.from_samples(moment_round(ps, 2, 2.0, 1.0, rng).key for _ in range(50_000))
    assert tv_empirical(samples, exact.table) < 0.03


def test_infinite_alpha_selects_at_random(rng):
    ps = [Categorical(np.array([0.99, 0.01])), Categorical.uniform(2), Categorical(np.array([0.3, 0.7]))]
    indices, _ = maskgit_round_batch(ps, 1, math.inf, rng, 300_000)
    frequencies = np.bincount(indices[:, 0], minlength=3) / 300_000
    assert np.allclose(frequencies, 1 / 3, atol=0.005)


def test_capacity_guard():
    ps = [Categorical.uniform(4) for _ in range(12)]
    with pytest.raises(CapacityError):
        maskgit_round_exact_pmf(ps, 1, 1.0)


def test_token_marginal_of_moment_round():
    ps = [Categorical(np.array([0.8, 0.2])), Categorical(np.array([0.5, 0.5]))]
    pmf = moment_round_exact_pmf(ps, 1, 1.0, 2.0)
    assert np.allclose(pmf.token_marginal(0, 2), [16 / 17, 1 / 17])


def test_unordered_marginal_merges_orders():
    ps = [Categorical.one_hot(2, 0), Categorical.one_hot(2, 1)]
    unordered = moment_round_exact_pmf(ps, 2, 1.0, 1.0).unordered()
    assert unordered == {frozenset({(0, 0), (1, 1)}): pytest.approx(1.0)}


def test_bound_examples():
    assert tv_theorem_bound(4, 2, 1, 1.0) == pytest.approx(5.0)
    assert tv_theorem_bound(25, 1, 1, 1.0) == pytest.approx(1 + math.sqrt(math.log(25)))
    with pytest.raises(ArgumentError):
        tv_theorem_bound(0, 1, 2, 1.0)


def test_tv_decreases_with_n():
    """k=1, |S|=2, alpha=1: exact TV between MaskGIT and moment rounds falls as N grows."""
    pool = [(0.9, 0.1), (0.7, 0.3), (0.6, 0.4), (0.2, 0.8)]
    values = []
    for n in (4, 8, 12, 16):
        ps = [Categorical(np.array(pool[i % 4])) for i in range(n)]
        tv = tv_exact(maskgit_round_exact_pmf(ps, 1, 1.0).table, moment_round_exact_pmf(ps, 1, 1.0, 2.0).table)
        assert tv <= min(1.0, tv_theorem_bound(n, 1, 2, 1.0))
        values.append(tv)
    assert all(b < a for a, b in zip(values, values[1:]))


@pytest.mark.parametrize("alpha", [0.5, 1.0, math.inf])
def test_maskgit_round_over_every_position_is_the_product_law(rng, alpha):
    ps = random_ps(rng, 3, 3)
    pmf = maskgit_round_exact_pmf(ps, 3, alpha)
    joint = {}
    for (indices, tokens), prob in pmf.items():
        sequence = tuple(x for _, x in sorted(zip(indices, tokens)))
        joint[sequence] = joint.get(sequence, 0.0) + prob
    for sequence in itertools.product(range(3), repeat=3):
        expected = math.prod(p.probs[x] for p, x in zip(ps, sequence))
        assert joint.get(sequence, 0.0) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("alpha", [0.5, 2.0, math.inf])
def test_unit_gamma_moment_round_keeps_token_marginals(rng, alpha):
    ps = random_ps(rng, 4, 3)
    pmf = moment_round_exact_pmf(ps, 2, alpha, 1.0)
    for position, p in enumerate(ps):
        assert np.allclose(pmf.token_marginal(position, 3), p.probs, atol=1e-12)
