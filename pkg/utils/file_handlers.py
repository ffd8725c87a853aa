"""
File Handlers - CSV and JSON artifacts with the resolved config embedded
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Sequence, Tuple, Union

import pandas as pd

from config import CSV_COMMENT_PREFIX, FLOAT_FORMAT

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class FileHandler:
    """Handle experiment file operations."""

    @staticmethod
    def ensure_parent(path: PathLike) -> Path:
        """Create the parent directory of ``path`` if needed."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        return path

    @staticmethod
    def config_line(config: Dict[str, Any]) -> str:
        """The first CSV line: the resolved config as compact sorted JSON."""
        return CSV_COMMENT_PREFIX + json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)

    @staticmethod
    def write_csv(
        frame: pd.DataFrame,
        path: PathLike,
        config: Dict[str, Any],
        sort_by: Optional[Sequence[str]] = None,
    ) -> Path:
        """
        Write rows after a config comment line.

        Rows are sorted by ``sort_by`` so the file does not depend on the
        order replications finished in.
        """
        path = FileHandler.ensure_parent(path)
        if sort_by:
            frame = frame.sort_values(list(sort_by), kind="mergesort").reset_index(drop=True)
        with open(path, "w", newline="") as handle:
            handle.write(FileHandler.config_line(config) + "\n")
            frame.to_csv(handle, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        logger.info(f"Wrote {len(frame)} rows to {path}")
        return path

    @staticmethod
    def read_csv(path: PathLike) -> Tuple[Dict[str, Any], pd.DataFrame]:
        """Return the embedded config and the data rows."""
        with open(path) as handle:
            first = handle.readline().rstrip("\n")
        if not first.startswith(CSV_COMMENT_PREFIX):
            raise ValueError(f"{path} does not start with an embedded config line")
        config = json.loads(first[len(CSV_COMMENT_PREFIX):])
        return config, pd.read_csv(path, skiprows=1)

    @staticmethod
    def data_lines(path: PathLike) -> list:
        """Header and data lines without the config line; equal across reruns."""
        with open(path) as handle:
            return handle.read().splitlines()[1:]

    @staticmethod
    def write_json(payload: Any, path: PathLike) -> Path:
        path = FileHandler.ensure_parent(path)
        path.write_text(json.dumps(payload, indent=2, sort_keys=True, default=str))
        logger.info(f"Wrote {path}")
        return path

    @staticmethod
    def read_json(path: PathLike) -> Any:
        return json.loads(Path(path).read_text())
