"""
Helpers - General numeric utility functions
"""

import math
import time
import logging
from functools import wraps

logger = logging.getLogger(__name__)


class GeneralHelpers:
    """General helper functions."""

    @staticmethod
    def round_half_away(value: float) -> int:
        """Round to the nearest integer, halves away from zero."""
        return int(math.copysign(math.floor(abs(value) + 0.5), value))

    @staticmethod
    def timer(func):
        """Decorator to log function execution time."""
        @wraps(func)
        def wrapper(*args, **kwargs):
            start = time.perf_counter()
            result = func(*args, **kwargs)
            elapsed = time.perf_counter() - start
            logger.info(f"{func.__name__} took {elapsed:.2f} seconds")
            return result
        return wrapper
