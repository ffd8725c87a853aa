"""
Utils - File handling, report formatting and numeric helpers
"""

from .file_handlers import FileHandler
from .formatters import ReportFormatter
from .helpers import GeneralHelpers

__all__ = [
    "FileHandler",
    "ReportFormatter",
    "GeneralHelpers",
]
