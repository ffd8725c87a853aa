"""
Masked-Diffusion Sampler Toolkit - Command-line entry point
Verification suites and reproducible experiment sweeps
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
import torch

from config import ENABLE_LOGGING, LOG_FILE, LOG_FORMAT, LOG_LEVEL, TORCH_THREADS, VERIFY_SUITES
from src.core_engine import ConfigError, MDSamplerError
from src.experiment_engine import (
    ExperimentConfig,
    SORT_KEYS,
    load_config_file,
    resolve_config,
    run_cache_demo,
    run_cts_experiment,
    run_schedule_dump,
    run_tv_curve,
    run_verify,
)
from src.research_tools import RunLedger
from utils import FileHandler, ReportFormatter

logger = logging.getLogger("mdsampler")

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_USAGE = 2


def setup_logging(level: str = LOG_LEVEL) -> None:
    """Configure the root logger once; a log file is added when enabled in config."""
    handlers: List[logging.Handler] = [logging.StreamHandler(sys.stderr)]
    if ENABLE_LOGGING:
        handlers.append(logging.FileHandler(LOG_FILE))
    logging.basicConfig(level=level.upper(), format=LOG_FORMAT, handlers=handlers, force=True)


# ==================== ARGUMENTS ====================


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="Master seed")
    common.add_argument("--out", type=str, default=None, help="Output CSV path (prints a table when omitted)")
    common.add_argument("--config", dest="config_file", type=str, default=None, help="JSON config file")
    common.add_argument("--workers", type=int, default=None, help="Worker threads for replications")
    common.add_argument("--log-level", dest="log_level", type=str, default=None, help="Logging level")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(prog="mdsampler", description="Masked-diffusion sampler toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    verify = commands.add_parser("verify", parents=[common], help="Run property suites")
    verify.add_argument("--suite", dest="suites", action="append", default=None, help=f"One of {VERIFY_SUITES}; repeatable")
    verify.add_argument("--draws", type=int, default=None)

    tv = commands.add_parser("tv-curve", parents=[common], help="TV between one MaskGIT and one moment round")
    tv.add_argument("--k", type=int, default=None)
    tv.add_argument("--alphabet-size", dest="alphabet_size", type=int, default=None)
    tv.add_argument("--alpha", type=float, default=None, help="Gumbel temperature; 'inf' allowed")
    tv.add_argument("--n-list", dest="n_list", type=int, nargs="+", default=None)
    tv.add_argument("--mode", choices=["exact", "montecarlo"], default=None)
    tv.add_argument("--draws", type=int, default=None)

    cts = commands.add_parser("cts-experiment", parents=[common], help="Sweep sampler presets")
    cts.add_argument("--presets", nargs="+", default=None)
    cts.add_argument("--gammas", type=float, nargs="+", default=None)
    cts.add_argument("--steps", type=int, nargs="+", default=None)
    cts.add_argument("--length", type=int, default=None)
    cts.add_argument("--alphabet-size", dest="alphabet_size", type=int, default=None)
    cts.add_argument("--alpha", type=float, default=None)
    cts.add_argument("--schedule", default=None)
    cts.add_argument("--model", choices=["table", "transformer"], default=None)
    cts.add_argument("--generations", type=int, default=None)
    cts.add_argument("--concentration", type=float, default=None)
    cts.add_argument("--split", default=None)
    cts.add_argument("--grid", type=int, nargs=2, default=None, metavar=("ROWS", "COLS"))
    cts.add_argument("--trace-limit", dest="trace_limit", type=int, default=None)
    cts.add_argument("--final-selection-noise", dest="final_selection_noise", action="store_const", const=True, default=None)

    cache = commands.add_parser("cache-demo", parents=[common], help="Partial KV caching error and cost")
    cache.add_argument("--layers", type=int, nargs="+", default=None)
    cache.add_argument("--fractions", type=float, nargs="+", default=None)
    cache.add_argument("--trials", type=int, default=None)
    cache.add_argument("--round-size", dest="round_size", type=int, default=None)
    cache.add_argument("--length", type=int, default=None)
    cache.add_argument("--alphabet-size", dest="alphabet_size", type=int, default=None)

    dump = commands.add_parser("schedule-dump", parents=[common], help="Per-step table of a schedule")
    dump.add_argument("--length", type=int, default=None)
    dump.add_argument("--steps", type=int, nargs="+", default=None)
    dump.add_argument("--schedule", default=None)
    dump.add_argument("--alpha", type=float, default=None)
    return parser


def flag_values(args: argparse.Namespace) -> Dict[str, Any]:
    """Namespace entries that are ExperimentConfig fields; unset flags stay None."""
    fields = ExperimentConfig.__dataclass_fields__
    values = {name: value for name, value in vars(args).items() if name in fields}
    if values.get("grid") is not None:
        values["grid"] = list(values["grid"])
    return values


# ==================== COMMANDS ====================


def _emit(frame, config: ExperimentConfig, sort_by: Optional[List[str]] = None) -> None:
    if config.out:
        FileHandler.write_csv(frame, config.out, config.to_dict(), sort_by=sort_by)
    else:
        print(ReportFormatter.frame_table(frame))


def cmd_verify(config: ExperimentConfig) -> int:
    results = run_verify(config)
    print(ReportFormatter.verify_table(r.to_dict() for r in results))
    if config.out:
        FileHandler.write_json({"config": config.to_dict(), "results": [r.to_dict() for r in results]}, config.out)
    return EXIT_OK if all(r.passed for r in results) else EXIT_FAILED


def cmd_tv_curve(config: ExperimentConfig) -> int:
    ledger = RunLedger("tv-curve", config.to_dict())
    frame = run_tv_curve(config, ledger)
    _emit(frame, config, sort_by=["N"])
    if config.out:
        ledger.save(Path(config.out).with_suffix(".ledger.json"))
    return EXIT_OK


def cmd_cts_experiment(config: ExperimentConfig) -> int:
    ledger = RunLedger("cts-experiment", config.to_dict())
    frame, traces, generations = run_cts_experiment(config, ledger)
    if config.out:
        FileHandler.write_csv(frame, config.out, config.to_dict())
        FileHandler.write_csv(generations, Path(config.out).with_suffix(".sequences.csv"), config.to_dict())
        FileHandler.write_json({"config": config.to_dict(), "traces": traces}, Path(config.out).with_suffix(".traces.json"))
        ledger.save(Path(config.out).with_suffix(".ledger.json"))
    else:
        print(ReportFormatter.frame_table(frame, columns=SORT_KEYS + ["entropy_mean", "tv_joint_empirical", "tv_joint_exact"]))
    return EXIT_OK


def cmd_cache_demo(config: ExperimentConfig) -> int:
    ledger = RunLedger("cache-demo", config.to_dict())
    _emit(run_cache_demo(config, ledger), config)
    if config.out:
        ledger.save(Path(config.out).with_suffix(".ledger.json"))
    return EXIT_OK


def cmd_schedule_dump(config: ExperimentConfig) -> int:
    frames = []
    for steps in config.steps:
        frame = run_schedule_dump(config, steps)
        frame.insert(0, "N", steps)
        frames.append(frame)
    _emit(pd.concat(frames, ignore_index=True), config)
    return EXIT_OK


COMMANDS = {
    "verify": cmd_verify,
    "tv-curve": cmd_tv_curve,
    "cts-experiment": cmd_cts_experiment,
    "cache-demo": cmd_cache_demo,
    "schedule-dump": cmd_schedule_dump,
}


# ==================== MAIN EXECUTION ====================


def main(argv: Optional[List[str]] = None) -> int:
    """Parse arguments, resolve the config and run one command; returns the exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    setup_logging(args.log_level or LOG_LEVEL)
    torch.set_num_threads(TORCH_THREADS)

    try:
        file_values = load_config_file(args.config_file) if args.config_file else {}
        config = resolve_config(file_values, flag_values(args))
    except ConfigError as exc:
        logger.error(f"configuration error: {exc}")
        print(f"mdsampler: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    logger.info(f"{args.command} started (seed={config.seed}, workers={config.workers})")
    try:
        code = COMMANDS[args.command](config)
    except ConfigError as exc:
        logger.error(f"configuration error: {exc}")
        print(f"mdsampler: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except MDSamplerError as exc:
        logger.error(f"{args.command} failed: {exc}")
        return EXIT_FAILED
    logger.info(f"{args.command} finished with exit code {code}")
    return code


if __name__ == "__main__":
    sys.exit(main())
