"""
Experiment Config - Resolved command configuration from a JSON file plus flags
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

from config import (
    DEFAULT_DRAWS,
    DEFAULT_GENERATIONS,
    DEFAULT_SCHEDULE,
    DEFAULT_SEED,
    DEFAULT_WORKERS,
    FINAL_SELECTION_NOISE,
    SCHEDULE_KINDS,
    TRACE_LIMIT,
    TRANSFORMER_DEFAULTS,
    VERIFY_SUITES,
)
from src.core_engine import ConfigError
from templates import SamplerPresets

logger = logging.getLogger(__name__)

MODES = ["exact", "montecarlo"]
MODEL_KINDS = ["table", "transformer"]
SPLITS = ["schedule", "half", "none"]


@dataclass
class ExperimentConfig:
    """
    Every parameter a command may read; each command uses its own subset.

    The whole resolved config is embedded in every file a command writes.
    """

    seed: int = DEFAULT_SEED
    workers: int = DEFAULT_WORKERS
    out: str = ""
    draws: int = DEFAULT_DRAWS
    # tv-curve
    k: int = 1
    alphabet_size: int = 2
    alpha: float = 1.0
    n_list: List[int] = field(default_factory=lambda: [4, 8, 12, 16])
    mode: str = "exact"
    # cts-experiment
    length: int = 8
    steps: List[int] = field(default_factory=lambda: [4])
    schedule: str = DEFAULT_SCHEDULE
    presets: List[str] = field(default_factory=lambda: ["moment", "u-moment", "hybrid"])
    gammas: List[float] = field(default_factory=lambda: [1.0])
    generations: int = DEFAULT_GENERATIONS
    model: str = "transformer"
    concentration: float = 1.0
    transformer: Dict[str, Any] = field(default_factory=dict)
    trace_limit: int = TRACE_LIMIT
    split: str = "schedule"
    grid: List[int] = field(default_factory=list)
    final_selection_noise: bool = FINAL_SELECTION_NOISE
    # cache-demo
    layers: List[int] = field(default_factory=lambda: [1, 2, 3])
    fractions: List[float] = field(default_factory=lambda: [0.0, 0.25, 0.5, 0.75])
    trials: int = 50
    round_size: int = 4
    # verify
    suites: List[str] = field(default_factory=lambda: list(VERIFY_SUITES))

    def to_dict(self) -> Dict[str, Any]:
        resolved = asdict(self)
        if math.isinf(self.alpha):
            resolved["alpha"] = "inf"
        return resolved

    def validate(self) -> "ExperimentConfig":
        """Check value ranges and names; raises ConfigError naming the field."""
        positive = ["draws", "k", "alphabet_size", "length", "generations", "trials", "round_size"]
        for name in positive:
            if getattr(self, name) < 1:
                raise ConfigError(f"field {name!r} must be >= 1, got {getattr(self, name)}")
        if self.workers < 1:
            raise ConfigError(f"field 'workers' must be >= 1, got {self.workers}")
        if not self.alpha > 0:
            raise ConfigError(f"field 'alpha' must be positive, got {self.alpha}")
        if self.concentration <= 0:
            raise ConfigError(f"field 'concentration' must be positive, got {self.concentration}")
        if self.mode not in MODES:
            raise ConfigError(f"field 'mode' must be one of {MODES}, got {self.mode!r}")
        if self.model not in MODEL_KINDS:
            raise ConfigError(f"field 'model' must be one of {MODEL_KINDS}, got {self.model!r}")
        if self.schedule not in SCHEDULE_KINDS:
            raise ConfigError(f"field 'schedule' must be one of {SCHEDULE_KINDS}, got {self.schedule!r}")
        if self.split not in SPLITS:
            raise ConfigError(f"field 'split' must be one of {SPLITS}, got {self.split!r}")
        for name in self.presets:
            SamplerPresets.get_preset(name)
        unknown_suites = [s for s in self.suites if s not in VERIFY_SUITES]
        if unknown_suites:
            raise ConfigError(f"field 'suites' has unknown suites {unknown_suites}; expected {VERIFY_SUITES}")
        if any(n < 1 for n in self.n_list):
            raise ConfigError("field 'n_list' must hold positive sizes")
        if any(s < 1 or s > self.length for s in self.steps):
            raise ConfigError(f"field 'steps' must lie in [1, length={self.length}]")
        if any(g <= 0 for g in self.gammas):
            raise ConfigError("field 'gammas' must be positive")
        if any(not 0 <= f < 1 for f in self.fractions):
            raise ConfigError("field 'fractions' must lie in [0, 1)")
        if any(l < 1 for l in self.layers):
            raise ConfigError("field 'layers' must be positive")
        if self.grid and (len(self.grid) != 2 or self.grid[0] * self.grid[1] != self.length):
            raise ConfigError(f"field 'grid' must be [rows, cols] with rows * cols = length {self.length}")
        unknown_transformer = sorted(set(self.transformer) - set(TRANSFORMER_DEFAULTS))
        if unknown_transformer:
            raise ConfigError(f"field 'transformer' has unknown keys {unknown_transformer}")
        return self


def _coerce(name: str, value: Any, default: Any) -> Any:
    """Type-check a file value against the field default."""
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"field {name!r} must be a boolean, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"field {name!r} must be an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if value == "inf":
            return math.inf
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"field {name!r} must be a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"field {name!r} must be a string, got {value!r}")
        return value
    if isinstance(default, list):
        if not isinstance(value, list):
            raise ConfigError(f"field {name!r} must be a list, got {value!r}")
        if default:
            return [_coerce(f"{name}[{i}]", item, default[0]) for i, item in enumerate(value)]
        return list(value)
    if isinstance(default, dict):
        if not isinstance(value, dict):
            raise ConfigError(f"field {name!r} must be an object, got {value!r}")
        return dict(value)
    return value


def load_config_file(path: Union[str, Path]) -> Dict[str, Any]:
    """
    Read a JSON config file.

    Raises:
        ConfigError: unreadable file, or JSON syntax error with line and column
    """
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        values = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if not isinstance(values, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    return values


def resolve_config(
    file_values: Optional[Mapping[str, Any]] = None,
    flag_values: Optional[Mapping[str, Any]] = None,
) -> ExperimentConfig:
    """
    Merge defaults, file values and flags (flags win), then validate.

    Flags that are None were not given and leave the file value in place.
    """
    defaults = ExperimentConfig()
    known = {f.name for f in fields(ExperimentConfig)}
    values: Dict[str, Any] = {}
    for name, value in (file_values or {}).items():
        if name not in known:
            raise ConfigError(f"unknown field {name!r}")
        values[name] = _coerce(name, value, getattr(defaults, name))
    for name, value in (flag_values or {}).items():
        if value is None:
            continue
        if name not in known:
            raise ConfigError(f"unknown field {name!r}")
        values[name] = value
    config = ExperimentConfig(**values).validate()
    logger.debug(f"resolved config: {config.to_dict()}")
    return config
