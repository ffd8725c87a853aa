"""
Formatters - Console tables for verification and experiment summaries
"""

import math
from typing import Iterable, Mapping, Optional, Sequence

import pandas as pd
from tabulate import tabulate


class ReportFormatter:
    """Format results for the terminal."""

    @staticmethod
    def truncate(text: str, max_length: int, suffix: str = "...") -> str:
        """Truncate text to max length."""
        if len(text) <= max_length:
            return text
        return text[:max_length - len(suffix)] + suffix

    @staticmethod
    def format_number(value: Optional[float], digits: int = 6) -> str:
        """Compact number formatting; None prints as a dash."""
        if value is None:
            return "-"
        if isinstance(value, float) and math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return f"{value:.{digits}g}"

    @staticmethod
    def verify_table(results: Iterable[Mapping]) -> str:
        """Pass/fail table of verification checks."""
        rows = [
            [r["suite"], r["check"], "PASS" if r["passed"] else "FAIL", ReportFormatter.truncate(str(r.get("detail", "")), 60)]
            for r in results
        ]
        return tabulate(rows, headers=["suite", "check", "status", "detail"], tablefmt="simple")

    @staticmethod
    def frame_table(frame: pd.DataFrame, columns: Optional[Sequence[str]] = None, max_rows: int = 40) -> str:
        """Tabulate the first rows of a DataFrame."""
        view = frame[list(columns)] if columns else frame
        return tabulate(view.head(max_rows), headers="keys", tablefmt="simple", showindex=False, floatfmt=".6g")
