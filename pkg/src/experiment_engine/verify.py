"""
Verify - Runtime property suites with a pass/fail report
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Sequence

import numpy as np

from src.core_engine import (
    CacheInvalidError,
    Categorical,
    MaskState,
    entropy,
    gumbel_top_k_batch,
    power_sum,
    sample_gumbel,
    sample_many,
    temper,
    top_k_prefix_pmf,
)
from src.model_engine import FlopCounter, TransformerConfig, full_logits, init_params, partial_logits
from src.oracle_engine import (
    ExactConditionalModel,
    JointTable,
    conditional,
    entropy_weighted_kernel,
    exact_cts_distribution,
    kl_decomposition_terms,
    phi_weight,
    uniform_kernel,
)
from src.research_tools import EmpiricalPmf, PmfComparison, sequence_entropy, tv_empirical, tv_exact
from src.sampling_engine import (
    HaltonPolicy,
    MomentPolicy,
    RandomPolicy,
    constant_gamma,
    gumbel_temp,
    half_step_counts,
    maskgit_round_exact_pmf,
    merge_orderings,
    moment_round_batch,
    moment_round_exact_pmf,
    order_halton_1d,
    run_cts,
    tv_theorem_bound,
    unmask_counts,
)
from utils.formatters import ReportFormatter
from .experiment_config import ExperimentConfig
from .seeding import stream_int, stream_rng
from .tv_curve import instance_pool, tiled_instance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class CheckResult:
    suite: str
    check: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> Dict:
        return {"suite": self.suite, "check": self.check, "passed": self.passed, "detail": self.detail}


Check = Callable[[ExperimentConfig], str]


def _close(value: float, expected: float, tol: float, label: str) -> str:
    if not abs(value - expected) <= tol:
        raise AssertionError(f"{label}: {value!r} differs from {expected!r} by more than {tol}")
    return f"{label}={ReportFormatter.format_number(value)}"


def _random_probs(rng: np.random.Generator, size: int) -> Categorical:
    return Categorical(rng.dirichlet(np.ones(size)))


# dist


def check_dist_examples(config: ExperimentConfig) -> str:
    _close(entropy(Categorical.uniform(4)), math.log(4), 1e-12, "H(uniform4)")
    _close(entropy(Categorical(np.array([0.5, 0.25, 0.25]))), 1.5 * math.log(2), 1e-12, "H")
    _close(power_sum(Categorical(np.array([0.8, 0.2])), 2.0), 0.68, 1e-12, "power_sum")
    tempered = temper(Categorical(np.array([0.8, 0.2])), 2.0)
    return _close(float(tempered.probs[0]), 16 / 17, 1e-12, "temper")


def check_temper_composition(config: ExperimentConfig) -> str:
    rng = stream_rng(config.seed, "verify/dist/compose", 0)
    worst = 0.0
    for _ in range(200):
        p = _random_probs(rng, 5)
        a, b = rng.uniform(0.2, 4.0, size=2)
        worst = max(worst, float(np.max(np.abs(temper(temper(p, a), b).probs - temper(p, a * b).probs))))
    return _close(worst, 0.0, 1e-9, "max gap")


def check_holder_bound(config: ExperimentConfig) -> str:
    rng = stream_rng(config.seed, "verify/dist/holder", 0)
    for alpha in (1.0, 3.0, 12.0):
        beta = 1.0 + 1.0 / alpha
        for _ in range(1000):
            size = int(rng.integers(1, 10))
            p = _random_probs(rng, size)
            if power_sum(p, beta) < size ** (-1.0 / alpha) * (1 - 1e-12):
                raise AssertionError(f"Hölder bound fails at alpha={alpha}, |S|={size}")
    return "3000 distributions"


def check_entropy_monotone(config: ExperimentConfig) -> str:
    rng = stream_rng(config.seed, "verify/dist/entropy", 0)
    for _ in range(200):
        p = _random_probs(rng, 6)
        values = [entropy(temper(p, g)) for g in (1, 2, 4, 8)]
        if any(b > a + 1e-12 for a, b in zip(values, values[1:])):
            raise AssertionError(f"entropy increased along gamma: {values}")
    return "200 distributions"


def check_sample_frequency(config: ExperimentConfig) -> str:
    rng = stream_rng(config.seed, "verify/dist/sample", 0)
    draws = sample_many(Categorical(np.array([0.9, 0.1])), rng, config.draws)
    tol = 4.0 * math.sqrt(0.09 / config.draws)
    return _close(float(np.mean(draws == 0)), 0.9, tol, "freq(0)")


# gumbel


def check_gumbel_moments(config: ExperimentConfig) -> str:
    xi = sample_gumbel(stream_rng(config.seed, "verify/gumbel/moments", 0), config.draws)
    _close(float(np.mean(xi)), np.euler_gamma, 0.01, "mean")
    return _close(float(np.median(xi)), -math.log(math.log(2)), 0.01, "median")


def check_top_k_law(config: ExperimentConfig) -> str:
    rng = stream_rng(config.seed, "verify/gumbel/law", 0)
    mu = rng.normal(size=5)
    samples = EmpiricalPmf.from_rows(gumbel_top_k_batch(mu, 3, 1.0, rng, config.draws))
    exact = {prefix: top_k_prefix_pmf(mu, prefix) for prefix in itertools.permutations(range(5), 3)}
    tv = tv_empirical(samples, exact)
    if not tv < 0.01:
        raise AssertionError(f"prefix TV {tv:.4g} >= 0.01")
    return f"tv={tv:.4g}"


def check_prefix_examples(config: ExperimentConfig) -> str:
    _close(top_k_prefix_pmf([0.0, 0.0, 0.0], [0, 1, 2]), 1 / 6, 1e-12, "uniform")
    return _close(top_k_prefix_pmf(np.log([1.0, 2.0, 3.0]), [2]), 0.5, 1e-12, "softmax")


# rounds


def check_moment_exact_vs_mc(config: ExperimentConfig) -> str:
    rng = stream_rng(config.seed, "verify/rounds/moment", 0)
    ps = [_random_probs(rng, 3) for _ in range(6)]
    exact = moment_round_exact_pmf(ps, 2, 1.0, 2.0)
    indices, tokens = moment_round_batch(ps, 2, 1.0, 2.0, rng, config.draws)
    tv = tv_empirical(EmpiricalPmf.from_round_arrays(indices, tokens), exact.table)
    if not tv < 0.01:
        raise AssertionError(f"moment TV {tv:.4g} >= 0.01")
    return f"tv={tv:.4g}"


def check_moment_example(config: ExperimentConfig) -> str:
    pmf = moment_round_exact_pmf([Categorical.one_hot(2, 0), Categorical.uniform(2)], 1, 1.0, 2.0)
    return _close(pmf.index_marginal()[(0,)], 2 / 3, 1e-12, "P(index 0)")


def check_tv_trend(config: ExperimentConfig) -> str:
    pool = instance_pool(2, config.seed)
    values = []
    for n in (4, 8, 12, 16):
        ps = tiled_instance(pool, n)
        tv = tv_exact(maskgit_round_exact_pmf(ps, 1, 1.0).table, moment_round_exact_pmf(ps, 1, 1.0, 2.0).table)
        if tv > min(1.0, tv_theorem_bound(n, 1, 2, 1.0)):
            raise AssertionError(f"tv {tv} above the bound at N={n}")
        values.append(tv)
    if any(b >= a for a, b in zip(values, values[1:])):
        raise AssertionError(f"tv not strictly decreasing: {values}")
    return "tv=" + ",".join(f"{v:.3g}" for v in values)


def check_unordered_tv(config: ExperimentConfig) -> str:
    rng = stream_rng(config.seed, "verify/rounds/unordered", 0)
    ps = [_random_probs(rng, 2) for _ in range(4)]
    comparison = PmfComparison().compare_pmfs(
        maskgit_round_exact_pmf(ps, 2, 1.0).table, moment_round_exact_pmf(ps, 2, 1.0, 2.0).table, round_outcomes=True
    )
    if comparison["tv_unordered"] > comparison["tv"] + 1e-12:
        raise AssertionError(f"unordered tv {comparison['tv_unordered']} above ordered tv {comparison['tv']}")
    return f"tv={comparison['tv']:.4g} unordered={comparison['tv_unordered']:.4g}"


def check_bound_examples(config: ExperimentConfig) -> str:
    _close(tv_theorem_bound(4, 2, 1, 1.0), 5.0, 1e-12, "threshold")
    return _close(tv_theorem_bound(25, 1, 1, 1.0), 1 + math.sqrt(math.log(25)), 1e-12, "N=25")


# schedules


def check_schedule_examples(config: ExperimentConfig) -> str:
    if unmask_counts("uniform", 10, 5).cumulative != (0, 2, 4, 6, 8, 10):
        raise AssertionError("uniform D=10, N=5 schedule")
    cosine = unmask_counts("cosine", 17, 6)
    if cosine.cumulative[0] != 0 or cosine.cumulative[-1] != 17:
        raise AssertionError("cosine endpoints")
    _close(gumbel_temp(12.0, 2, 8), 9.0, 1e-12, "alpha_n")
    return _close(gumbel_temp(6.0, 4, 4), 0.0, 0.0, "final")


def check_half_steps(config: ExperimentConfig) -> str:
    for kind in ("uniform", "cosine"):
        for length in (5, 16, 33):
            for steps in range(1, length + 1, 3):
                schedule = unmask_counts(kind, length, steps)
                for n, half in enumerate(half_step_counts(schedule), start=1):
                    if not schedule.cumulative[n - 1] <= half <= schedule.cumulative[n]:
                        raise AssertionError(f"{kind} D={length} N={steps} n={n}: {half}")
    return "clamped"


# policies


def check_merge_example(config: ExperimentConfig) -> str:
    merged = merge_orderings((2, 3, 6, 5, 1, 4), (4, 3, 1, 5, 6, 2), 4, 2)
    if merged.positions != (2, 3, 4, 1, 5, 6):
        raise AssertionError(f"merge gave {merged.positions}")
    return "(2,3,4,1,5,6)"


def check_halton_bit_reversal(config: ExperimentConfig) -> str:
    order = order_halton_1d(8, range(8)).positions
    if order != (0, 4, 2, 6, 1, 5, 3, 7):
        raise AssertionError(f"van der Corput order {order}")
    return str(order)


# oracle


def check_conditional_example(config: ExperimentConfig) -> str:
    q = JointTable(2, 2, np.array([0.4, 0.1, 0.2, 0.3]))
    return _close(float(conditional(q, 1, {0: 0}).probs[0]), 0.8, 1e-12, "q(x2=0|x1=0)")


def check_phi_normalization(config: ExperimentConfig) -> str:
    for parent in range(9):
        total = math.fsum(math.comb(parent, s) * phi_weight(parent, s) for s in range(parent + 1))
        _close(total, 1.0, 1e-12, f"parent {parent}")
    return "sizes 0..8"


def check_kl_ledger(config: ExperimentConfig) -> str:
    rng = stream_rng(config.seed, "verify/oracle/kl", 0)
    for _ in range(20):
        q = JointTable.random(4, 2, rng)
        terms = kl_decomposition_terms(q, (0, 1))
        _close(terms.chain_gap, 0.0, 1e-10, "chain")
        _close(terms.term_b, terms.term_b_literal, 1e-10, "term b")
        if terms.chain_lhs > terms.bound + 1e-10:
            raise AssertionError(f"KL {terms.chain_lhs} above bound {terms.bound}")
    return "20 joints"


def check_cts_unbiased(config: ExperimentConfig) -> str:
    rng = stream_rng(config.seed, "verify/oracle/cts", 0)
    worst = 0.0
    for _ in range(5):
        q = JointTable.random(3, 2, rng)
        model = ExactConditionalModel(q)
        for kernel in (uniform_kernel, entropy_weighted_kernel):
            worst = max(worst, tv_exact(exact_cts_distribution(model, kernel, 1.0, 3, 2), q.pmf()))
    _close(worst, 0.0, 1e-10, "max tv")
    biased = tv_exact(exact_cts_distribution(ExactConditionalModel(q), uniform_kernel, 2.0, 3, 2), q.pmf())
    if not biased > 0.01:
        raise AssertionError(f"gamma=2 law too close to the joint: {biased}")
    return f"gamma=2 tv={biased:.3g}"


# cts


def check_trace_coverage(config: ExperimentConfig) -> str:
    rng = stream_rng(config.seed, "verify/cts/coverage", 0)
    q = JointTable.random(5, 2, rng)
    model = ExactConditionalModel(q)
    for policy in (RandomPolicy(), MomentPolicy(), HaltonPolicy()):
        for steps in (1, 2, 5):
            trace = run_cts(model, policy, unmask_counts("cosine", 5, steps), constant_gamma(1.0), rng)
            trace.check_coverage()
    return "9 runs"


def check_cts_determinism(config: ExperimentConfig) -> str:
    q = JointTable.random(4, 3, stream_rng(config.seed, "verify/cts/joint", 0))
    model = ExactConditionalModel(q)
    schedule = unmask_counts("uniform", 4, 2)
    runs = [
        run_cts(model, MomentPolicy(), schedule, constant_gamma(2.0), stream_rng(config.seed, "verify/cts/det", 0)).to_json()
        for _ in range(2)
    ]
    if runs[0] != runs[1]:
        raise AssertionError("same seed gave different traces")
    return "identical"


# nanoformer


def _small_transformer(layers: int) -> TransformerConfig:
    return TransformerConfig(layers=layers, d_model=16, d_k=8, d_ff=32, alphabet_size=4, seq_len=8)


def check_cache_exactness(config: ExperimentConfig) -> str:
    worst = 0.0
    for trial in range(10):
        rng = stream_rng(config.seed, "verify/nano/exact", trial)
        for layers, committed_count in ((1, 2), (1, 0), (2, 0), (3, 0)):
            params = init_params(stream_int(config.seed, "verify/nano/params", trial), _small_transformer(layers))
            state = MaskState(8, {0: int(rng.integers(4)), 5: int(rng.integers(4))})
            positions = [1, 3, 6, 7]
            committed = {i: int(rng.integers(4)) for i in positions[:committed_count]}
            _, cache = full_logits(params, state)
            refreshed = partial_logits(params, cache, positions, committed, state=state)
            oracle, _ = full_logits(params, state.commit(committed))
            rows = [r for r, i in enumerate(positions) if i not in committed]
            gap = float((refreshed[rows] - oracle[[positions[r] for r in rows]]).abs().max())
            worst = max(worst, gap)
    return _close(worst, 0.0, 1e-12, "max gap")


def check_flop_ratio(config: ExperimentConfig) -> str:
    params = init_params(config.seed, _small_transformer(2))
    state = MaskState.empty(8)
    counter = FlopCounter()
    _, cache = full_logits(params, state, counter)
    full = counter.attention
    partial_logits(params, cache, [0, 1, 2], {0: 1}, state=state, counter=counter)
    return _close(counter.attention / full, 1.0 + 3 / 8, 1e-12, "ratio")


def check_stale_cache(config: ExperimentConfig) -> str:
    params = init_params(config.seed, _small_transformer(1))
    _, cache = full_logits(params, MaskState.empty(8))
    try:
        partial_logits(params, cache, [1, 2], {}, state=MaskState(8, {0: 1}))
    except CacheInvalidError:
        return "rejected"
    raise AssertionError("stale cache was accepted")


# metrics


def check_metric_examples(config: ExperimentConfig) -> str:
    _close(tv_exact([0.7, 0.3], [0.5, 0.5]), 0.2, 1e-12, "tv")
    _close(tv_exact({"a": 1.0}, {"b": 1.0}), 1.0, 0.0, "disjoint")
    _close(sequence_entropy([0, 0, 1, 2]), 1.5 * math.log(2), 1e-12, "entropy")
    return _close(sequence_entropy([3, 1, 4, 0, 2]), math.log(5), 1e-12, "distinct")


SUITES: Dict[str, Sequence[Check]] = {
    "dist": [check_dist_examples, check_temper_composition, check_holder_bound, check_entropy_monotone, check_sample_frequency],
    "gumbel": [check_gumbel_moments, check_top_k_law, check_prefix_examples],
    "rounds": [check_moment_exact_vs_mc, check_moment_example, check_tv_trend, check_unordered_tv, check_bound_examples],
    "schedules": [check_schedule_examples, check_half_steps],
    "policies": [check_merge_example, check_halton_bit_reversal],
    "oracle": [check_conditional_example, check_phi_normalization, check_kl_ledger, check_cts_unbiased],
    "cts": [check_trace_coverage, check_cts_determinism],
    "nanoformer": [check_cache_exactness, check_flop_ratio, check_stale_cache],
    "metrics": [check_metric_examples],
}


def run_check(suite: str, check: Check, config: ExperimentConfig) -> CheckResult:
    name = check.__name__.replace("check_", "")
    try:
        detail = check(config)
    except Exception as exc:
        logger.error(f"verify {suite}/{name} failed: {exc}")
        return CheckResult(suite, name, False, f"{type(exc).__name__}: {exc}")
    logger.debug(f"verify {suite}/{name} passed: {detail}")
    return CheckResult(suite, name, True, detail)


def run_verify(config: ExperimentConfig) -> List[CheckResult]:
    """Run the selected suites in a fixed order."""
    results = []
    for suite in config.suites:
        for check in SUITES[suite]:
            results.append(run_check(suite, check, config))
    passed = sum(r.passed for r in results)
    logger.info(f"verify: {passed}/{len(results)} checks passed")
    return results
