"""
CTS Experiment - Sweeps of sampler presets, temperatures and step counts
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from src.core_engine import CapacityError, ConfigError, ProductModel
from src.model_engine import TransformerConfig, TransformerProductModel, init_params
from src.oracle_engine import (
    ExactConditionalModel,
    JointTable,
    exact_chain_distribution,
    maskgit_chain_law,
    moment_chain_law,
    random_chain_law,
)
from src.research_tools import DiversityMetrics, EmpiricalPmf, RunLedger, estimation_error_scale, tv_empirical, tv_exact
from src.sampling_engine import (
    GenerationTrace,
    UnmaskSchedule,
    constant_gamma,
    make_policy,
    moment_gamma,
    run_cts,
    run_cts_cached,
    run_maskgit_chain,
    unmask_counts,
)
from templates import SamplerPresets
from utils.helpers import GeneralHelpers
from .experiment_config import ExperimentConfig
from .seeding import run_replications, stream_int, stream_rng

logger = logging.getLogger(__name__)

CTS_COLUMNS = [
    "preset",
    "driver",
    "policy",
    "gamma_mode",
    "gamma",
    "steps",
    "schedule",
    "model",
    "generations",
    "entropy_mean",
    "entropy_std",
    "entropy_min",
    "entropy_max",
    "entropy_bits",
    "tv_joint_empirical",
    "tv_joint_exact",
    "error_scale",
]
SORT_KEYS = ["preset", "gamma", "steps"]
SEQUENCE_KEYS = SORT_KEYS + ["replication"]


@dataclass(frozen=True)
class SweepPoint:
    """One row of the sweep: a preset at a temperature and a step count."""

    preset: str
    gamma: Optional[float]
    steps: int

    @property
    def stream(self) -> str:
        return f"cts/{self.preset}/{self.gamma}/{self.steps}"


def build_model(config: ExperimentConfig) -> Tuple[ProductModel, Optional[JointTable]]:
    """The table-backed or transformer-backed model of the experiment."""
    if config.model == "table":
        rng = stream_rng(config.seed, "cts/joint", 0)
        q = JointTable.random(config.length, config.alphabet_size, rng, config.concentration)
        return ExactConditionalModel(q), q
    overrides = {"alphabet_size": config.alphabet_size, "seq_len": config.length, **config.transformer}
    params = init_params(stream_int(config.seed, "cts/params", 0), TransformerConfig.from_dict(overrides))
    return TransformerProductModel(params), None


def sweep_points(config: ExperimentConfig) -> List[SweepPoint]:
    """Fixed-temperature presets are swept over gammas; the others appear once per step count."""
    points = []
    for name in config.presets:
        preset = SamplerPresets.get_preset(name)
        gammas = config.gammas if preset["gamma_mode"] == "fixed" else [None]
        for gamma in gammas:
            for steps in config.steps:
                points.append(SweepPoint(name, gamma, steps))
    return points


def _gamma_schedule(preset: Dict, gamma: Optional[float], alpha: float):
    if preset["gamma_mode"] == "moment":
        return moment_gamma(alpha)
    if preset["gamma_mode"] == "unit":
        return constant_gamma(1.0)
    return constant_gamma(gamma)


def make_runner(
    config: ExperimentConfig,
    point: SweepPoint,
    model: ProductModel,
    schedule: UnmaskSchedule,
) -> Callable[[int, np.random.Generator], GenerationTrace]:
    """A function (replication, rng) -> trace for one sweep point."""
    preset = SamplerPresets.get_preset(point.preset)
    driver = preset["driver"]
    if driver == "maskgit-chain":
        return lambda rep, rng: run_maskgit_chain(model, schedule, config.alpha, rng)
    grid = tuple(config.grid) if config.grid else None
    policy = make_policy(preset["policy"], grid)
    gamma_schedule = _gamma_schedule(preset, point.gamma, config.alpha)
    if driver == "cts-cached":
        if not isinstance(model, TransformerProductModel):
            raise ConfigError(f"preset {point.preset!r} needs a transformer-backed model")
        return lambda rep, rng: run_cts_cached(
            model,
            policy,
            schedule,
            gamma_schedule,
            rng,
            alpha=config.alpha,
            split=config.split,
            final_selection_noise=config.final_selection_noise,
        )
    return lambda rep, rng: run_cts(
        model,
        policy,
        schedule,
        gamma_schedule,
        rng,
        alpha=config.alpha,
        final_selection_noise=config.final_selection_noise,
    )


def exact_law(model: ExactConditionalModel, point: SweepPoint, schedule: UnmaskSchedule, alpha: float):
    """Exact output law when the preset's rounds have a known closed form, else None."""
    preset = SamplerPresets.get_preset(point.preset)
    if preset["driver"] == "maskgit-chain":
        law = maskgit_chain_law(alpha)
    elif preset["driver"] == "cts" and preset["policy"] == "moment" and preset["gamma_mode"] != "fixed":
        law = moment_chain_law(alpha, unbiased=preset["gamma_mode"] == "unit")
    elif preset["driver"] == "cts" and preset["policy"] == "random":
        law = random_chain_law(_gamma_schedule(preset, point.gamma, alpha))
    else:
        return None
    try:
        return exact_chain_distribution(model, schedule, law)
    except CapacityError as exc:
        logger.warning(f"cts-experiment: no exact law for {point.preset} at N={point.steps}: {exc}")
        return None


def run_point(
    config: ExperimentConfig,
    point: SweepPoint,
    model: ProductModel,
    q: Optional[JointTable],
) -> Tuple[Dict, List[GenerationTrace]]:
    """Generate ``config.generations`` sequences for one sweep point; returns the summary row and every trace."""
    preset = SamplerPresets.get_preset(point.preset)
    schedule = unmask_counts(config.schedule, config.length, point.steps)
    runner = make_runner(config, point, model, schedule)
    traces = run_replications(runner, config.generations, config.seed, point.stream, config.workers)
    sequences = [trace.sequence for trace in traces]

    row = {
        "preset": point.preset,
        "driver": preset["driver"],
        "policy": preset["policy"] or "",
        "gamma_mode": preset["gamma_mode"],
        "gamma": point.gamma if point.gamma is not None else math.nan,
        "steps": point.steps,
        "schedule": config.schedule,
        "model": config.model,
        "generations": config.generations,
        **{key: value for key, value in DiversityMetrics().get_entropy_report(sequences).items() if key != "generations"},
        "tv_joint_empirical": math.nan,
        "tv_joint_exact": math.nan,
        "error_scale": math.nan,
    }
    if q is not None:
        joint = q.pmf()
        samples = EmpiricalPmf.from_samples(sequences)
        row["tv_joint_empirical"] = tv_empirical(samples, joint)
        row["error_scale"] = estimation_error_scale(samples, len(joint))
        law = exact_law(model, point, schedule, config.alpha)
        if law is not None:
            row["tv_joint_exact"] = tv_exact(law, joint)
    logger.info(
        f"cts-experiment {point.preset} gamma={point.gamma} N={point.steps}: "
        f"entropy={row['entropy_mean']:.4f}"
    )
    return row, traces


def sequence_rows(point: SweepPoint, traces: List[GenerationTrace]) -> List[Dict]:
    """One row per generation: the sweep point, the replication and tokens x_0..x_{D-1}."""
    gamma = point.gamma if point.gamma is not None else math.nan
    rows = []
    for replication, trace in enumerate(traces):
        tokens = {f"x_{i}": token for i, token in enumerate(trace.sequence)}
        rows.append({"preset": point.preset, "gamma": gamma, "steps": point.steps, "replication": replication, **tokens})
    return rows


@GeneralHelpers.timer
def run_cts_experiment(
    config: ExperimentConfig,
    ledger: Optional[RunLedger] = None,
) -> Tuple[pd.DataFrame, Dict[str, List[Dict]], pd.DataFrame]:
    """
    Sweep presets x gammas x step counts.

    Returns:
        (summary rows sorted by preset, gamma and steps;
        the first ``trace_limit`` traces of every row as JSON-ready dicts;
        every generated sequence, one row per generation, sorted by point and replication)
    """
    model, q = build_model(config)
    rows, traces, sequences = [], {}, []
    for point in sweep_points(config):
        row, generated = run_point(config, point, model, q)
        rows.append(row)
        traces[point.stream] = [trace.to_dict() for trace in generated[: config.trace_limit]]
        sequences.extend(sequence_rows(point, generated))
        if ledger is not None:
            ledger.log_event("row", {"preset": point.preset, "gamma": point.gamma, "steps": point.steps})
    frame = pd.DataFrame(rows, columns=CTS_COLUMNS)
    frame = frame.sort_values(SORT_KEYS, kind="mergesort", na_position="first").reset_index(drop=True)
    columns = SEQUENCE_KEYS + [f"x_{i}" for i in range(config.length)]
    generations = pd.DataFrame(sequences, columns=columns)
    generations = generations.sort_values(SEQUENCE_KEYS, kind="mergesort", na_position="first").reset_index(drop=True)
    return frame, traces, generations
