"""Tests for config resolution, seeded streams and the experiment sweeps."""

import json
import math

import numpy as np
import pytest

from src.core_engine import ConfigError
from src.experiment_engine import (
    CACHE_COLUMNS,
    SEQUENCE_KEYS,
    TV_CURVE_COLUMNS,
    ExperimentConfig,
    SweepPoint,
    load_config_file,
    resolve_config,
    run_cache_demo,
    run_cts_experiment,
    run_replications,
    run_schedule_dump,
    run_tv_curve,
    run_verify,
    stream_int,
    stream_rng,
    sweep_points,
)
from templates import SamplerPresets


# ==================== CONFIG ====================


def test_flags_override_file_values():
    config = resolve_config({"seed": 3, "length": 6, "steps": [2]}, {"seed": 9, "length": None})
    assert config.seed == 9
    assert config.length == 6
    assert config.steps == [2]


def test_config_type_errors():
    with pytest.raises(ConfigError, match="unknown field"):
        resolve_config({"seeds": 1})
    with pytest.raises(ConfigError, match="integer"):
        resolve_config({"seed": "1"})
    with pytest.raises(ConfigError, match="steps"):
        resolve_config({"steps": [1, "two"]})
    with pytest.raises(ConfigError, match="mode"):
        resolve_config({"mode": "approximate"})
    with pytest.raises(ConfigError):
        resolve_config({"presets": ["greedy"]})


def test_alpha_accepts_infinity():
    config = resolve_config({"alpha": "inf"})
    assert math.isinf(config.alpha)
    assert config.to_dict()["alpha"] == "inf"


def test_json_syntax_error_names_line_and_column(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{\n  "seed": 1,\n}\n')
    with pytest.raises(ConfigError, match=r"bad\.json:\d+:\d+:"):
        load_config_file(path)


def test_grid_must_match_length():
    with pytest.raises(ConfigError, match="grid"):
        resolve_config({"length": 8, "grid": [3, 3]})
    assert resolve_config({"length": 8, "grid": [2, 4]}).grid == [2, 4]


# ==================== SEEDING ====================


def test_streams_are_named_and_independent():
    a = stream_rng(0, "cts/moment", 0).random(4)
    assert np.array_equal(a, stream_rng(0, "cts/moment", 0).random(4))
    assert not np.array_equal(a, stream_rng(0, "cts/moment", 1).random(4))
    assert not np.array_equal(a, stream_rng(0, "cts/hybrid", 0).random(4))
    assert stream_int(5, "x", 2) == stream_int(5, "x", 2)


def test_replications_do_not_depend_on_workers():
    def task(rep, rng):
        return rep, float(rng.random())

    serial = run_replications(task, 32, 7, "demo", workers=1)
    threaded = run_replications(task, 32, 7, "demo", workers=8)
    assert serial == threaded
    assert [rep for rep, _ in serial] == list(range(32))


# ==================== TV CURVE ====================


def test_exact_tv_curve_decreases_within_bound():
    frame = run_tv_curve(resolve_config({"n_list": [4, 8, 12, 16]}))
    assert list(frame.columns) == TV_CURVE_COLUMNS
    tv = frame["tv"].tolist()
    assert all(b < a for a, b in zip(tv, tv[1:]))
    assert frame["within_bound"].all()


def test_montecarlo_tv_curve_reports_error_scale():
    frame = run_tv_curve(resolve_config({"n_list": [4], "mode": "montecarlo", "draws": 20_000}))
    row = frame.iloc[0]
    assert row["draws"] == 20_000
    assert 0 < row["error_scale"] < 0.1


def test_tv_curve_skips_n_below_k():
    frame = run_tv_curve(resolve_config({"n_list": [1, 4], "k": 2}))
    assert frame["N"].tolist() == [4]


# ==================== CTS EXPERIMENT ====================


def test_sweep_points_only_sweep_fixed_temperature_presets():
    config = resolve_config({"presets": ["moment", "halton"], "gammas": [1.0, 2.0], "steps": [2, 4]})
    points = sweep_points(config)
    assert SweepPoint("moment", None, 2) in points
    assert len([p for p in points if p.preset == "halton"]) == 4
    assert len(points) == 6


def test_table_experiment_reports_exact_laws():
    config = resolve_config(
        {
            "model": "table",
            "length": 3,
            "alphabet_size": 2,
            "steps": [3],
            "presets": ["random", "u-moment", "maskgit", "hybrid"],
            "generations": 4000,
        }
    )
    frame, traces, generations = run_cts_experiment(config)
    rows = frame.set_index("preset")
    assert rows.loc["random", "tv_joint_exact"] < 1e-10
    assert rows.loc["u-moment", "tv_joint_exact"] < 1e-10
    assert not math.isnan(rows.loc["maskgit", "tv_joint_exact"])
    assert math.isnan(rows.loc["hybrid", "tv_joint_exact"])
    assert rows.loc["random", "tv_joint_empirical"] < 0.05
    assert all(len(kept) == config.trace_limit for kept in traces.values())
    assert list(generations.columns) == SEQUENCE_KEYS + ["x_0", "x_1", "x_2"]
    assert len(generations) == 4 * 4000
    per_point = generations.groupby("preset")["replication"]
    assert (per_point.count() == 4000).all() and (per_point.max() == 3999).all()
    first = generations[generations["preset"] == "random"].iloc[0]
    assert first["replication"] == 0
    assert tuple(first[["x_0", "x_1", "x_2"]]) == tuple(traces["cts/random/None/3"][0]["sequence"])


def test_cached_preset_needs_a_transformer():
    config = resolve_config({"model": "table", "length": 3, "alphabet_size": 2, "steps": [2], "presets": ["moment-cache"]})
    with pytest.raises(ConfigError):
        run_cts_experiment(config)


def test_gamma_sweep_lowers_diversity():
    """Sharper token temperatures give lower mean sequence entropy."""
    config = resolve_config(
        {
            "model": "transformer",
            "length": 8,
            "alphabet_size": 16,
            "steps": [4],
            "presets": ["halton"],
            "gammas": [1.0, 2.0, 4.0],
            "generations": 1024,
        }
    )
    frame, _, _ = run_cts_experiment(config)
    entropies = frame.sort_values("gamma")["entropy_mean"].tolist()
    assert all(b <= a for a, b in zip(entropies, entropies[1:]))
    assert entropies[-1] < entropies[0]


def test_cts_experiment_is_independent_of_workers():
    values = {"model": "table", "length": 4, "alphabet_size": 2, "steps": [2], "presets": ["moment", "hybrid"], "generations": 200}
    serial, _, serial_sequences = run_cts_experiment(resolve_config({**values, "workers": 1}))
    threaded, _, threaded_sequences = run_cts_experiment(resolve_config({**values, "workers": 8}))
    assert serial.equals(threaded)
    assert serial_sequences.equals(threaded_sequences)


# ==================== CACHE DEMO AND SCHEDULES ====================


def test_cache_demo_rows():
    config = resolve_config(
        {"layers": [1, 3], "fractions": [0.0, 0.5], "trials": 8, "length": 8, "alphabet_size": 4, "round_size": 4}
    )
    frame = run_cache_demo(config)
    assert list(frame.columns) == CACHE_COLUMNS
    assert len(frame) == 4
    assert (frame.loc[frame["layers"] == 1, "max_error"] <= 1e-12).all()
    assert (frame.loc[frame["a_fraction"] == 0.0, "max_error"] <= 1e-12).all()
    assert frame["flop_ratio"].tolist() == pytest.approx([1.5] * 4)
    assert frame.loc[frame["a_fraction"] == 0.5, "a_size"].tolist() == [2, 2]


def test_schedule_dump_columns():
    frame = run_schedule_dump(resolve_config({"length": 10, "schedule": "uniform"}), 5)
    assert list(frame.columns) == ["n", "J_n", "I_n", "tau_n", "J_half", "m_n"]
    assert frame["J_half"].tolist()[1:] == [1, 3, 5, 7, 9]
    assert len(frame) == 6


# ==================== VERIFY AND PRESETS ====================


def test_verify_suites_pass():
    results = run_verify(resolve_config({"suites": ["schedules", "policies", "metrics"]}))
    assert results and all(r.passed for r in results)
    assert {r.suite for r in results} == {"schedules", "policies", "metrics"}


def test_every_preset_names_a_known_driver():
    for name in SamplerPresets.get_preset_names():
        preset = SamplerPresets.get_preset(name)
        assert preset["driver"] in {"cts", "maskgit-chain", "cts-cached"}
        assert preset["gamma_mode"] in {"moment", "unit", "fixed"}
    with pytest.raises(ConfigError):
        SamplerPresets.get_preset("nosuch")


def test_config_dict_is_json_ready():
    payload = json.dumps(ExperimentConfig().to_dict(), sort_keys=True)
    assert json.loads(payload)["seed"] == ExperimentConfig().seed
