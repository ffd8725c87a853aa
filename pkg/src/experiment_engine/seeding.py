"""
Seeding - Named random streams and layout-independent parallel replications
"""

import logging
import zlib
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, TypeVar

import numpy as np

logger = logging.getLogger(__name__)

T = TypeVar("T")


def stream_seed(master: int, experiment: str, replication: int) -> np.random.SeedSequence:
    """Seed of the stream (experiment, replication) under one master seed."""
    return np.random.SeedSequence(int(master), spawn_key=(zlib.crc32(experiment.encode("utf-8")), int(replication)))


def stream_rng(master: int, experiment: str, replication: int) -> np.random.Generator:
    return np.random.default_rng(stream_seed(master, experiment, replication))


def stream_int(master: int, experiment: str, replication: int) -> int:
    """A 32-bit integer seed for consumers such as torch generators."""
    return int(stream_seed(master, experiment, replication).generate_state(1)[0])


def run_replications(
    task: Callable[[int, np.random.Generator], T],
    replications: int,
    master: int,
    experiment: str,
    workers: int = 1,
) -> List[T]:
    """
    Run ``task(replication, rng)`` for every replication on its own stream.

    Results come back in replication order, so they do not depend on the
    number of workers.
    """

    def one(replication: int) -> T:
        return task(replication, stream_rng(master, experiment, replication))

    if workers <= 1 or replications <= 1:
        return [one(r) for r in range(replications)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(one, range(replications)))
    logger.debug(f"{experiment}: {replications} replications on {workers} workers")
    return results
