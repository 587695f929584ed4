import json
from pathlib import Path

import numpy as np
import pytest

from conftest import assert_traces_equal, build_los_trace
from rayblock.cli import (
    SweepGeometry,
    main,
    parse_run_spec,
    run_crossing_sweep,
    run_position_sweep,
    run_spec_to_dict,
)
from rayblock.errors import ConfigError
from rayblock.trace import export_scenario, import_scenario


def minimal_spec(scenario_dir, output_dir, **extra) -> dict:
    spec = {
        "scenario_dir": str(scenario_dir),
        "output_dir": str(output_dir),
        "obstacles": [],
        "models_to_compare": [],
    }
    spec.update(extra)
    return spec


def obstacle_entry(**overrides) -> dict:
    entry = {
        "shape": {"kind": "ortho_screen", "width": 0.2, "height": 1.7},
        "mobility": {"kind": "linear", "start": [5.0, 0.0, 0.85],
                     "velocity": [0.0, 1.2, 0.0]},
        "model": {"kind": "dked"},
    }
    entry.update(overrides)
    return entry


@pytest.fixture
def small_scenario(tmp_path):
    scenario = tmp_path / "scenario"
    trace = build_los_trace((1, 3, 1.6), (9, 3, 1.6), num_steps=20, time_step=0.0034)
    export_scenario(trace, scenario)
    return scenario


def write_spec(tmp_path, data) -> Path:
    path = tmp_path / "spec.json"
    path.write_text(json.dumps(data, indent=1))
    return path


def test_validate_ok(tmp_path, small_scenario, capsys):
    spec = write_spec(tmp_path, minimal_spec(small_scenario, tmp_path / "out",
                                             obstacles=[obstacle_entry()]))
    assert main(["validate", str(spec)]) == 0
    assert "ok" in capsys.readouterr().out


def test_validate_unknown_key_exits_2(tmp_path, small_scenario, capsys):
    data = minimal_spec(small_scenario, tmp_path / "out")
    data["surprise"] = 1
    spec = write_spec(tmp_path, data)
    assert main(["validate", str(spec)]) == 2
    assert "config-error" in capsys.readouterr().err


def test_validate_unknown_nested_key_exits_2(tmp_path, small_scenario):
    data = minimal_spec(small_scenario, tmp_path / "out",
                        obstacles=[obstacle_entry(typo_field=3)])
    assert main(["validate", str(write_spec(tmp_path, data))]) == 2


def test_validate_bad_json_exits_2(tmp_path):
    path = tmp_path / "spec.json"
    path.write_text("{not json")
    assert main(["validate", str(path)]) == 2


def test_spec_round_trip(tmp_path, small_scenario):
    data = minimal_spec(
        small_scenario, tmp_path / "out",
        obstacles=[
            obstacle_entry(),
            {
                "shape": {"kind": "sphere", "radius": 0.3},
                "mobility": {"kind": "waypoints",
                             "waypoints": [[0.0, [1, 2, 0.5]], [2.0, [3, 2, 0.5]]]},
                "model": {"kind": "obstruction", "loss_db": 12.0},
                "threshold": 2.5,
                "fallback": True,
            },
        ],
        models_to_compare=["metis", "dked"],
        link_budget={"carrier_frequency_hz": 28e9, "tx_array": {"rows": 4, "cols": 2}},
        sampling={"time_step": 0.0034, "num_steps": 20},
        removal_floor_db=-400.0,
        max_clamp_events=100,
    )
    spec = parse_run_spec(data)
    assert parse_run_spec(run_spec_to_dict(spec)) == spec


def test_run_zero_obstacles_identity(tmp_path, small_scenario, capsys):
    out_dir = tmp_path / "out"
    spec = write_spec(tmp_path, minimal_spec(small_scenario, out_dir))
    assert main(["run", str(spec)]) == 0
    stdout = capsys.readouterr().out
    assert "pairs: 1" in stdout
    assert "steps: 20" in stdout

    original = import_scenario(small_scenario)
    produced = import_scenario(out_dir / "trace")
    assert_traces_equal(original, produced)

    snr = (out_dir / "snr_timeline.csv").read_text().splitlines()
    assert snr[0] == "tx_id,rx_id,t_seconds,snr_db_baseline,snr_db"
    assert len(snr) == 21
    manifest = json.loads((out_dir / "manifest.json").read_text())
    assert set(manifest) == {"tool_version", "spec_sha256", "trace_sha256", "outputs"}


def test_run_with_model_comparison_outputs(tmp_path, small_scenario):
    out_dir = tmp_path / "out"
    spec = write_spec(tmp_path, minimal_spec(
        small_scenario, out_dir,
        obstacles=[obstacle_entry()],
        models_to_compare=["obstruction", "metis"],
    ))
    assert main(["run", str(spec)]) == 0
    header = (out_dir / "snr_timeline.csv").read_text().splitlines()[0]
    assert header.endswith("snr_db_obstruction,snr_db_metis")
    for name in ("obstruction", "metis"):
        lines = (out_dir / f"loss_timeline_{name}.csv").read_text().splitlines()
        assert lines[0] == "tx_id,rx_id,t_seconds,loss_db"
        assert len(lines) == 21


def test_run_malformed_scenario_exits_3(tmp_path, capsys):
    bad = tmp_path / "broken"
    (bad / "Output" / "Ns3" / "QdFiles").mkdir(parents=True)
    (bad / "Output" / "Ns3" / "QdFiles" / "Tx0Rx1.txt").write_text("not a count\n")
    spec = write_spec(tmp_path, minimal_spec(bad, tmp_path / "out"))
    assert main(["run", str(spec)]) == 3
    assert "Tx0Rx1" in capsys.readouterr().err


def test_run_missing_scenario_dir_exits_3(tmp_path):
    spec = write_spec(tmp_path, minimal_spec(tmp_path / "nowhere", tmp_path / "out"))
    assert main(["run", str(spec)]) == 3


def test_run_sampling_mismatch_exits_2(tmp_path, small_scenario):
    spec = write_spec(tmp_path, minimal_spec(
        small_scenario, tmp_path / "out",
        sampling={"time_step": 0.0034, "num_steps": 99}))
    assert main(["run", str(spec)]) == 2


def test_run_clamp_budget_exit_4(tmp_path, small_scenario, capsys):
    # a budget nothing can satisfy exercises the numeric-failure exit path
    spec = write_spec(tmp_path, minimal_spec(
        small_scenario, tmp_path / "out", max_clamp_events=-1))
    assert main(["run", str(spec)]) == 4
    assert "numeric-failure" in capsys.readouterr().err


def test_output_dir_flag_overrides_spec(tmp_path, small_scenario):
    spec = write_spec(tmp_path, minimal_spec(small_scenario, tmp_path / "ignored"))
    override = tmp_path / "flagged"
    assert main(["run", str(spec), "--output-dir", str(override)]) == 0
    assert (override / "snr_timeline.csv").exists()
    assert not (tmp_path / "ignored").exists()


def test_rerun_is_byte_identical(tmp_path, small_scenario):
    spec = write_spec(tmp_path, minimal_spec(
        small_scenario, tmp_path / "unused",
        obstacles=[obstacle_entry()], models_to_compare=["dked"]))
    out_a, out_b = tmp_path / "a", tmp_path / "b"
    assert main(["run", str(spec), "--output-dir", str(out_a)]) == 0
    assert main(["run", str(spec), "--output-dir", str(out_b)]) == 0
    files_a = sorted(p.relative_to(out_a) for p in out_a.rglob("*") if p.is_file())
    files_b = sorted(p.relative_to(out_b) for p in out_b.rglob("*") if p.is_file())
    assert files_a == files_b
    for rel in files_a:
        assert (out_a / rel).read_bytes() == (out_b / rel).read_bytes(), rel


def test_inspect_summarizes(small_scenario, capsys):
    assert main(["inspect", str(small_scenario)]) == 0
    out = capsys.readouterr().out
    assert "pairs: 1" in out
    assert "steps: 20" in out
    assert "Tx0Rx1" in out


def test_sweep_crossing_writes_csv(tmp_path):
    out = tmp_path / "crossing.csv"
    assert main(["sweep", "crossing", "-o", str(out), "--span", "0.3",
                 "--step", "0.01", "--models", "obstruction,dked"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "offset_m,loss_db_obstruction,loss_db_dked,blocked"
    assert len(lines) == 62  # 61 offsets + header


def test_sweep_position_writes_csv(tmp_path):
    out = tmp_path / "position.csv"
    assert main(["sweep", "position", "-o", str(out), "--samples", "21",
                 "--models", "metis"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "position_m,loss_db_metis"
    assert len(lines) == 22


def test_sweep_frequency_writes_csv(tmp_path):
    out = tmp_path / "freq.csv"
    assert main(["sweep", "frequency", "-o", str(out), "--span", "0.2", "--step", "0.02",
                 "--frequencies-ghz", "30,60", "--models", "dked"]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "frequency_ghz,offset_m,loss_db_dked,blocked"
    assert len(lines) == 2 * 21 + 1


def test_sweep_rejects_unknown_model(tmp_path):
    assert main(["sweep", "crossing", "-o", str(tmp_path / "x.csv"),
                 "--models", "nonsense"]) == 2


def test_position_sweep_requires_odd_samples():
    with pytest.raises(ConfigError):
        run_position_sweep(SweepGeometry(), samples=10)


def test_crossing_sweep_obstruction_is_two_valued():
    cols = run_crossing_sweep(SweepGeometry(), offsets=np.linspace(-0.4, 0.4, 81),
                              models=("obstruction",))
    values = set(np.round(cols["loss_db_obstruction"], 12))
    assert values == {0.0, 10.0}
