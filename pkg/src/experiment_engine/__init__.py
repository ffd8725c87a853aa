"""
Experiment Engine - Seeded streams, resolved configs and the command runners
"""

from .seeding import run_replications, stream_int, stream_rng, stream_seed
from .experiment_config import ExperimentConfig, load_config_file, resolve_config
from .tv_curve import TV_CURVE_COLUMNS, run_tv_curve
from .cts_experiment import CTS_COLUMNS, SEQUENCE_KEYS, SORT_KEYS, SweepPoint, run_cts_experiment, sweep_points
from .cache_demo import CACHE_COLUMNS, cache_trial, run_cache_demo
from .schedule_dump import run_schedule_dump
from .verify import SUITES, CheckResult, run_verify

__all__ = [
    "run_replications",
    "stream_int",
    "stream_rng",
    "stream_seed",
    "ExperimentConfig",
    "load_config_file",
    "resolve_config",
    "TV_CURVE_COLUMNS",
    "run_tv_curve",
    "CTS_COLUMNS",
    "SEQUENCE_KEYS",
    "SORT_KEYS",
    "SweepPoint",
    "run_cts_experiment",
    "sweep_points",
    "CACHE_COLUMNS",
    "cache_trial",
    "run_cache_demo",
    "run_schedule_dump",
    "SUITES",
    "CheckResult",
    "run_verify",
]
