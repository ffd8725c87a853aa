"""
Sampling Engine - Rounds, schedules, ordering policies and multi-round drivers
"""

from .rounds import (
    RoundOutcome,
    RoundPmf,
    maskgit_round,
    maskgit_round_batch,
    maskgit_round_exact_pmf,
    moment_beta,
    moment_round,
    moment_round_batch,
    moment_round_exact_pmf,
    tv_theorem_bound,
    unordered_outcomes,
)
from .schedules import (
    UnmaskSchedule,
    gumbel_temp,
    half_step_counts,
    hybrid_m,
    schedule_table,
    unmask_counts,
)
from .policies import (
    ConfidencePolicy,
    HaltonPolicy,
    HybridPolicy,
    MomentPolicy,
    Ordering,
    Policy,
    PolicyContext,
    RandomPolicy,
    make_policy,
    merge_orderings,
    order_confidence,
    order_halton_1d,
    halton_sampler,
    order_halton_2d,
    order_moment,
    order_random,
)
from .cts import (
    GenerationTrace,
    RoundRecord,
    constant_gamma,
    moment_gamma,
    run_cts,
    run_cts_cached,
    run_maskgit_chain,
    run_moment_chain,
)

__all__ = [
    "RoundOutcome",
    "RoundPmf",
    "maskgit_round",
    "maskgit_round_batch",
    "maskgit_round_exact_pmf",
    "moment_beta",
    "moment_round",
    "moment_round_batch",
    "moment_round_exact_pmf",
    "tv_theorem_bound",
    "unordered_outcomes",
    "UnmaskSchedule",
    "gumbel_temp",
    "half_step_counts",
    "hybrid_m",
    "schedule_table",
    "unmask_counts",
    "ConfidencePolicy",
    "HaltonPolicy",
    "HybridPolicy",
    "MomentPolicy",
    "Ordering",
    "Policy",
    "PolicyContext",
    "RandomPolicy",
    "make_policy",
    "merge_orderings",
    "order_confidence",
    "order_halton_1d",
    "halton_sampler",
    "order_halton_2d",
    "order_moment",
    "order_random",
    "GenerationTrace",
    "RoundRecord",
    "constant_gamma",
    "moment_gamma",
    "run_cts",
    "run_cts_cached",
    "run_maskgit_chain",
    "run_moment_chain",
]
