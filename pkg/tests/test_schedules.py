"""Tests for unmasking schedules, Gumbel temperatures and merge counts."""

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from src.core_engine import ArgumentError
from src.sampling_engine import (
    UnmaskSchedule,
    gumbel_temp,
    half_step_counts,
    hybrid_m,
    schedule_table,
    unmask_counts,
)


def test_uniform_example():
    schedule = unmask_counts("uniform", 10, 5)
    assert schedule.cumulative == (0, 2, 4, 6, 8, 10)
    assert schedule.sizes == (2, 2, 2, 2, 2)


def test_cosine_example_front_loads():
    assert unmask_counts("cosine", 10, 5).cumulative == (0, 3, 6, 8, 10, 10)


def test_single_step_and_full_steps():
    assert unmask_counts("cosine", 7, 1).cumulative == (0, 7)
    assert unmask_counts("uniform", 4, 4).sizes == (1, 1, 1, 1)


def test_invalid_arguments():
    with pytest.raises(ArgumentError):
        unmask_counts("uniform", 4, 5)
    with pytest.raises(ArgumentError):
        unmask_counts("linear", 4, 2)
    with pytest.raises(ArgumentError):
        UnmaskSchedule("uniform", 3, 2, (0, 2, 1))


@given(st.sampled_from(["uniform", "cosine"]), st.integers(1, 64), st.data())
@settings(max_examples=200, deadline=None)
def test_schedules_are_monotone_with_fixed_endpoints(kind, length, data):
    steps = data.draw(st.integers(1, length))
    schedule = unmask_counts(kind, length, steps)
    assert schedule.cumulative[0] == 0
    assert schedule.cumulative[-1] == length
    assert all(b >= a for a, b in zip(schedule.cumulative, schedule.cumulative[1:]))
    assert sum(schedule.sizes) == length


def test_gumbel_temp():
    assert gumbel_temp(12.0, 2, 8) == pytest.approx(9.0)
    assert gumbel_temp(6.0, 4, 4) == 0.0
    assert gumbel_temp(math.inf, 4, 4) == 0.0
    assert math.isinf(gumbel_temp(math.inf, 1, 4))
    with pytest.raises(ArgumentError):
        gumbel_temp(1.0, 0, 4)


def test_half_steps_uniform():
    assert half_step_counts(unmask_counts("uniform", 10, 5)) == [1, 3, 5, 7, 9]


@given(st.sampled_from(["uniform", "cosine"]), st.integers(1, 40), st.data())
@settings(max_examples=150, deadline=None)
def test_half_steps_are_clamped(kind, length, data):
    schedule = unmask_counts(kind, length, data.draw(st.integers(1, length)))
    for n, half in enumerate(half_step_counts(schedule), start=1):
        assert schedule.cumulative[n - 1] <= half <= schedule.cumulative[n]


def test_hybrid_m():
    assert hybrid_m(1, 4, 4) == 3
    assert hybrid_m(2, 4, 3) == 2
    assert hybrid_m(4, 4, 4) == 0


def test_schedule_table():
    frame = schedule_table(unmask_counts("uniform", 8, 4), alpha=2.0)
    assert list(frame.columns) == ["n", "J_n", "I_n", "tau_n"]
    assert frame["J_n"].tolist() == [0, 2, 4, 6, 8]
    assert frame["tau_n"].iloc[1] == pytest.approx(1.5)
    assert frame["tau_n"].iloc[-1] == 0.0
