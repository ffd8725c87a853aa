"""
Schedule Dump - Per-step table of an unmasking schedule
"""

import logging

import pandas as pd

from src.sampling_engine import half_step_counts, hybrid_m, schedule_table, unmask_counts
from .experiment_config import ExperimentConfig

logger = logging.getLogger(__name__)


def run_schedule_dump(config: ExperimentConfig, steps: int) -> pd.DataFrame:
    """Rows (n, J_n, I_n, tau_n, J_half, m_n) for n = 0..N; step 0 has empty half-step and merge counts."""
    schedule = unmask_counts(config.schedule, config.length, steps)
    frame = schedule_table(schedule, config.alpha)
    halves = half_step_counts(schedule)
    frame["J_half"] = [None] + halves
    frame["m_n"] = [None] + [hybrid_m(n, steps, size) for n, size in enumerate(schedule.sizes, start=1)]
    logger.info(f"{config.schedule} schedule D={config.length}, N={steps}: {list(schedule.cumulative)}")
    return frame
