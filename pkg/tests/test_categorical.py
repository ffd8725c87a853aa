"""Tests for Categorical and the distribution functionals."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import categoricals
from src.core_engine import (
    ArgumentError,
    Categorical,
    InvalidDistributionError,
    confidence,
    entropy,
    inverse_cdf,
    log_power_sum,
    power_sum,
    sample_many,
    sample_table,
    temper,
)


def test_rejects_invalid_vectors():
    with pytest.raises(InvalidDistributionError):
        Categorical(np.array([0.5, 0.6]))
    with pytest.raises(InvalidDistributionError):
        Categorical(np.array([1.2, -0.2]))
    with pytest.raises(InvalidDistributionError):
        Categorical(np.array([]))


def test_probs_are_read_only():
    p = Categorical(np.array([0.25, 0.75]))
    with pytest.raises(ValueError):
        p.probs[0] = 1.0


def test_entropy_examples():
    assert entropy(Categorical.uniform(4)) == pytest.approx(math.log(4), abs=1e-12)
    assert entropy(Categorical.one_hot(3, 1)) == 0.0
    assert entropy(Categorical(np.array([0.5, 0.25, 0.25]))) == pytest.approx(1.5 * math.log(2), abs=1e-12)


def test_power_sum_examples():
    p = Categorical(np.array([0.8, 0.2]))
    assert power_sum(p, 2.0) == pytest.approx(0.68, abs=1e-12)
    assert power_sum(p, 1.0) == pytest.approx(1.0, abs=1e-12)
    assert log_power_sum(Categorical.one_hot(5, 2), 3.0) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(ArgumentError):
        power_sum(p, 0.0)


def test_temper_examples():
    p = Categorical(np.array([0.8, 0.2]))
    assert temper(p, 2.0).probs[0] == pytest.approx(16 / 17, abs=1e-12)
    assert temper(p, 1.0) is p
    assert np.allclose(temper(Categorical(np.array([0.4, 0.4, 0.2])), math.inf).probs, [0.5, 0.5, 0.0])
    assert np.allclose(temper(Categorical(np.array([0.0, 0.3, 0.7])), 3.0).probs[0], 0.0)


def test_temper_rejects_bad_inputs():
    with pytest.raises(ArgumentError):
        temper(Categorical.uniform(2), 0.0)
    with pytest.raises(InvalidDistributionError):
        temper(np.zeros(3), 2.0)


@given(categoricals(), st.floats(0.2, 4.0), st.floats(0.2, 4.0))
@settings(max_examples=200, deadline=None)
def test_temper_composes_multiplicatively(p, a, b):
    """temper(temper(p, a), b) == temper(p, a * b)."""
    assert np.allclose(temper(temper(p, a), b).probs, temper(p, a * b).probs, atol=1e-9)


@given(categoricals(max_size=10), st.sampled_from([1.0, 3.0, 12.0]))
@settings(max_examples=300, deadline=None)
def test_holder_lower_bound(p, alpha):
    """power_sum(p, 1 + 1/alpha) >= |S|^(-1/alpha)."""
    assert power_sum(p, 1.0 + 1.0 / alpha) >= p.size ** (-1.0 / alpha) * (1 - 1e-12)


def test_holder_bound_on_dirichlet_draws(rng):
    for alpha in (1.0, 3.0, 12.0):
        for _ in range(1000):
            size = int(rng.integers(1, 10))
            p = Categorical(rng.dirichlet(np.ones(size)))
            assert power_sum(p, 1.0 + 1.0 / alpha) >= size ** (-1.0 / alpha) * (1 - 1e-12)


@given(categoricals(min_size=2))
@settings(max_examples=100, deadline=None)
def test_entropy_non_increasing_in_gamma(p):
    values = [entropy(temper(p, g)) for g in (1.0, 1.5, 3.0, 6.0)]
    assert all(b <= a + 1e-12 for a, b in zip(values, values[1:]))


def test_confidence_is_max_probability():
    assert confidence(Categorical(np.array([0.1, 0.7, 0.2]))) == pytest.approx(0.7)


def test_inverse_cdf_skips_zero_mass():
    p = Categorical(np.array([0.5, 0.0, 0.5]))
    assert inverse_cdf(p, 0.0) == 0
    assert inverse_cdf(p, 0.4999) == 0
    assert inverse_cdf(p, 0.5) == 2
    assert inverse_cdf(p, 0.9999999) == 2


def test_sample_many_frequency(rng):
    draws = sample_many(Categorical(np.array([0.9, 0.1])), rng, 10**6)
    assert np.mean(draws == 0) == pytest.approx(0.9, abs=4 * math.sqrt(0.09 / 10**6))


def test_sample_table_rows_are_independent_laws(rng):
    table = np.array([[0.2, 0.8], [1.0, 0.0], [0.5, 0.5]])
    tokens = sample_table(table, rng, 200_000)
    assert tokens.shape == (200_000, 3)
    assert np.all(tokens[:, 1] == 0)
    assert np.mean(tokens[:, 0] == 1) == pytest.approx(0.8, abs=0.005)
    assert np.mean(tokens[:, 2] == 1) == pytest.approx(0.5, abs=0.005)
