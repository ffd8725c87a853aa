"""Tests for distances, empirical pmfs, diversity metrics and run ledgers."""

import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import categoricals
from src.core_engine import ArgumentError
from src.sampling_engine import RoundPmf
from src.research_tools import (
    DiversityMetrics,
    EmpiricalPmf,
    PmfComparison,
    RunLedger,
    estimation_error_scale,
    sequence_entropy,
    tv_empirical,
    tv_exact,
    unordered_outcomes,
)


def test_tv_examples():
    assert tv_exact([0.5, 0.5], [1.0, 0.0]) == pytest.approx(0.5)
    assert tv_exact({"a": 1.0}, {"b": 1.0}) == 1.0
    assert tv_exact({"a": 0.3, "b": 0.7}, {"a": 0.3, "b": 0.7}) == 0.0


@given(categoricals(3, 3), categoricals(3, 3), categoricals(3, 3))
@settings(max_examples=100, deadline=None)
def test_tv_is_a_metric(p, q, r):
    assert tv_exact(p.probs, q.probs) == pytest.approx(tv_exact(q.probs, p.probs))
    assert tv_exact(p.probs, r.probs) <= tv_exact(p.probs, q.probs) + tv_exact(q.probs, r.probs) + 1e-12
    assert 0.0 <= tv_exact(p.probs, q.probs) <= 1.0


def test_sequence_entropy_examples():
    assert sequence_entropy([3, 3, 3, 3]) == 0.0
    assert sequence_entropy([0, 1, 0, 1]) == pytest.approx(math.log(2))
    assert sequence_entropy([0, 1, 2, 3]) == pytest.approx(math.log(4))
    with pytest.raises(ArgumentError):
        sequence_entropy([])


@given(st.lists(st.integers(0, 5), min_size=1, max_size=20), st.randoms())
@settings(max_examples=100, deadline=None)
def test_sequence_entropy_ignores_order(sequence, random):
    shuffled = list(sequence)
    random.shuffle(shuffled)
    assert sequence_entropy(shuffled) == pytest.approx(sequence_entropy(sequence))
    assert 0.0 <= sequence_entropy(sequence) <= math.log(len(sequence)) + 1e-12


def test_empirical_pmf_from_rows():
    samples = EmpiricalPmf.from_rows(np.array([[0, 1], [0, 1], [1, 1], [0, 1]]))
    assert samples.total == 4
    assert samples.support == 2
    assert samples.to_pmf() == {(0, 1): 0.75, (1, 1): 0.25}


def test_empirical_pmf_from_round_arrays():
    samples = EmpiricalPmf.from_round_arrays(np.array([[2, 0], [2, 0], [0, 2]]), np.array([[1, 0], [1, 0], [0, 1]]))
    assert samples.counts[((2, 0), (1, 0))] == 2
    assert samples.counts[((0, 2), (0, 1))] == 1


def test_empirical_pmf_merge_keeps_totals():
    left = EmpiricalPmf.from_samples(["a", "a", "b"])
    right = EmpiricalPmf.from_samples(["b", "c"])
    merged = left.merge(right)
    assert merged.total == left.total + right.total
    assert merged.counts["b"] == 2
    with pytest.raises(ArgumentError):
        EmpiricalPmf().to_pmf()


def test_tv_empirical_single_sample():
    samples = EmpiricalPmf.from_samples([(0, 1)])
    assert tv_empirical(samples, {(0, 1): 1.0}) == 0.0
    assert tv_empirical(samples, {(0, 1): 0.25, (1, 1): 0.75}) == pytest.approx(0.75)
    with pytest.raises(ArgumentError):
        tv_empirical(EmpiricalPmf(), {(0, 1): 1.0})


def test_estimation_error_scale():
    samples = EmpiricalPmf.from_samples([0, 1, 1, 2])
    assert estimation_error_scale(samples) == pytest.approx(math.sqrt(3 / 4))
    assert estimation_error_scale(samples, support=16) == pytest.approx(2.0)


def test_diversity_report():
    report = DiversityMetrics().get_entropy_report([[0, 0, 0, 0], [0, 1, 0, 1]])
    assert report["generations"] == 2
    assert report["entropy_mean"] == pytest.approx(math.log(2) / 2)
    assert report["entropy_bits"] == pytest.approx(0.5)
    assert report["entropy_min"] == 0.0
    with pytest.raises(ArgumentError):
        DiversityMetrics().get_entropy_report([])


def test_unordered_outcomes_merges_orders():
    merged = unordered_outcomes({((0, 1), (1, 0)): 0.25, ((1, 0), (0, 1)): 0.5, ((0, 1), (0, 0)): 0.25})
    assert merged[frozenset({(0, 1), (1, 0)})] == pytest.approx(0.75)
    assert len(merged) == 2


def test_round_pmf_and_comparison_share_the_unordered_merge():
    table = {((0, 1), (1, 0)): 0.25, ((1, 0), (0, 1)): 0.5, ((0, 1), (0, 0)): 0.25}
    assert RoundPmf(dict(table)).unordered() == unordered_outcomes(table)
    p = {((0, 1), (1, 0)): 0.5, ((1, 0), (0, 1)): 0.5}
    comparison = PmfComparison().compare_pmfs(p, table, round_outcomes=True)
    expected = tv_exact(RoundPmf(p).unordered(), RoundPmf(dict(table)).unordered())
    assert comparison["tv_unordered"] == pytest.approx(expected)


def test_pmf_comparison():
    p = {((0, 1), (1, 0)): 0.5, ((1, 0), (0, 1)): 0.5}
    q = {((0, 1), (1, 0)): 1.0}
    comparison = PmfComparison().compare_pmfs(p, q, round_outcomes=True)
    assert comparison["tv"] == pytest.approx(0.5)
    assert comparison["tv_unordered"] == 0.0
    assert comparison["kl_qp"] == pytest.approx(math.log(2))
    assert math.isinf(comparison["kl_pq"])
    assert comparison["support_p"] == 2 and comparison["support_q"] == 1


def test_comparison_report_lists_every_sampler():
    report = PmfComparison().generate_comparison_report({"maskgit": [0.6, 0.4], "moment": [0.5, 0.5]}, [0.5, 0.5])
    assert "maskgit" in report and "moment" in report
    assert "tv" in report.splitlines()[0]


def test_run_ledger_export(tmp_path):
    ledger = RunLedger("tv-curve", {"seed": 3})
    ledger.log_event("done", {"rows": 4})
    record = json.loads(ledger.save(tmp_path / "run.ledger.json").read_text())
    assert record["config"] == {"seed": 3}
    assert [event["event_type"] for event in record["events"]] == ["start", "done"]
    assert "Total Events Logged: 2" in ledger.generate_report()
