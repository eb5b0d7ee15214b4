"""Command line: grid parsing, config merging, output shape, exit codes."""

from __future__ import annotations

import json
import os
import subprocess
import sys

import pytest
from hypothesis import given
from hypothesis import strategies as st

from fibspec.cli import (
    _preprocess_argv,
    build_parser,
    format_cell,
    main,
    parse_grid,
    resolve_config,
)


def test_grid_inclusive_endpoints():
    assert parse_grid("1:2:0.5") == [1.0, 1.5, 2.0]
    grid = parse_grid("-1:2:0.01")
    assert len(grid) == 301
    assert grid[0] == -1.0
    assert grid[-1] == 2.0  # endpoint snapped despite float drift
    grid = parse_grid("0.05:16:0.05")
    assert len(grid) == 320
    assert grid[-1] == 16.0


def test_grid_other_spellings():
    assert parse_grid("1,2,4") == [1.0, 2.0, 4.0]
    assert parse_grid("3.5") == [3.5]
    assert parse_grid(2) == [2.0]
    assert parse_grid([1, "2"]) == [1.0, 2.0]


@given(
    st.floats(min_value=-100, max_value=100, allow_nan=False),
    st.integers(min_value=1, max_value=400),
    st.floats(min_value=1e-3, max_value=10, allow_nan=False),
)
def test_grid_point_count_matches_span(start, count, step):
    stop = start + count * step
    grid = parse_grid(f"{start!r}:{stop!r}:{step!r}")
    assert len(grid) in (count, count + 1)  # float drift may lose the endpoint
    assert grid[0] == start
    assert all(b > a for a, b in zip(grid, grid[1:]))


def test_grid_rejects_bad_input():
    with pytest.raises(ValueError):
        parse_grid("1:2")
    with pytest.raises(ValueError):
        parse_grid("2:1:0.5")
    with pytest.raises(ValueError):
        parse_grid("1:2:-0.5")
    with pytest.raises(ValueError):
        parse_grid("1:2:0")


def test_negative_grid_values_survive_argument_parsing():
    argv = _preprocess_argv(["pressure", "--lambda", "2", "--t", "-1:2:0.01"])
    assert "--t=-1:2:0.01" in argv
    args = build_parser().parse_args(argv + ["--level", "8"])
    assert vars(args)["t"] == "-1:2:0.01"


def test_config_file_fills_gaps_and_flags_win(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"lambda": 2.0, "level": 6, "m_max": 3}))
    args = build_parser().parse_args(
        ["gaps", "--config", str(cfg), "--m-max", "20"]
    )
    run = resolve_config(args)
    assert run.command == "gaps"
    assert run.payload == {"lambda": 2.0, "level": 6, "m_max": 20}


def test_missing_required_options_are_reported():
    args = build_parser().parse_args(["gaps"])
    with pytest.raises(ValueError, match="--lambda"):
        resolve_config(args)


def test_defaults_applied_per_command():
    args = build_parser().parse_args(["comb"])
    run = resolve_config(args)
    assert run.payload == {"k_max": 60}
    args = build_parser().parse_args(["dims", "--lambda-grid", "2"])
    assert resolve_config(args).payload == {"lambdas": [2.0], "k_max": 18}


def test_cell_formatting_is_full_precision():
    assert format_cell(0.1) == "0.10000000000000001"
    assert format_cell(2.0) == "2"
    assert format_cell(17) == "17"
    assert format_cell("A") == "A"


def test_comb_csv_output(capsys):
    code = main(["comb", "--k-max", "25"])
    out = capsys.readouterr().out
    assert code == 0
    head = [line for line in out.splitlines() if line.startswith("#")]
    data = [line for line in out.splitlines() if not line.startswith("#")]
    assert any(line.startswith("# schema: fibspec.comb.v1") for line in head)
    assert any(line.startswith("# wall_time_s:") for line in head)
    assert data[0] == "k,fib,a_total,b_total,A,B,C,ratio"
    assert len(data) == 27  # header row + levels 0..25


def test_json_output_carries_the_full_response(capsys):
    code = main(["orbits", "--lambda-grid", "1,2", "--format", "json"])
    out = capsys.readouterr().out
    assert code == 0
    doc = json.loads(out)
    assert doc["command"] == "orbits"
    assert doc["result"]["schema_name"] == "fibspec.orbits.v1"
    assert len(doc["result"]["rows"]) == 2


def test_rows_are_deterministic_across_reruns(tmp_path, capsys):
    texts = []
    for _ in range(2):
        main(["gaps", "--lambda", "2", "--level", "8"])
        out = capsys.readouterr().out
        rows = [l for l in out.splitlines() if not l.startswith("#")]
        texts.append("\n".join(rows))
    assert texts[0] == texts[1]


def test_output_file_and_exit_codes(tmp_path, capsys):
    target = tmp_path / "dims.csv"
    code = main(
        ["dims", "--lambda-grid", "2", "--k-max", "12", "--output", str(target)]
    )
    # shallow hierarchies cannot certify the strict chain: exit code 2
    assert code == 2
    assert "INCONCLUSIVE" in capsys.readouterr().err
    content = target.read_text()
    assert "# status: INCONCLUSIVE" in content


def test_estimates_below_rigorous_bounds_exit_one(capsys):
    # at k_max = 10 the extrapolation window is so shallow that the
    # estimate drops under the closed-form lower bound: hard error
    code = main(["dims", "--lambda-grid", "2", "--k-max", "10"])
    assert code == 1
    assert "fibspec.errors.StructureViolation" in capsys.readouterr().err


def test_computation_errors_exit_one(capsys):
    code = main(["gaps", "--lambda", "-2", "--level", "8"])
    assert code == 1
    err = capsys.readouterr().err
    assert "fibspec.errors.DomainError" in err


def test_bad_config_file_exits_one(tmp_path, capsys):
    cfg = tmp_path / "broken.json"
    cfg.write_text("not json")
    code = main(["comb", "--config", str(cfg)])
    assert code == 1
    assert "error" in capsys.readouterr().err.lower()


def test_usage_errors_exit_one():
    with pytest.raises(SystemExit) as exc_info:
        main(["gaps", "--no-such-flag"])
    assert exc_info.value.code == 1


def _probe_thread_env(extra_env):
    probe = (
        "import fibspec, os; "
        "print(os.environ.get('OMP_NUM_THREADS'), "
        "os.environ.get('OPENBLAS_NUM_THREADS'))"
    )
    env = {k: v for k, v in os.environ.items() if not k.endswith("_NUM_THREADS")}
    env.update(extra_env)
    out = subprocess.run(
        [sys.executable, "-c", probe], env=env, capture_output=True, text=True
    )
    return out.stdout.strip()


def test_thread_count_variable_seeds_blas_knobs():
    assert _probe_thread_env({"FIBSPEC_THREADS": "3"}) == "3 3"
    # explicit per-library settings win over the package variable
    assert (
        _probe_thread_env({"FIBSPEC_THREADS": "3", "OMP_NUM_THREADS": "5"})
        == "5 3"
    )
