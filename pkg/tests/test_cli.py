import json
from pathlib import Path

import pytest

from urllcbeam.cli import (
    ENSEMBLE_CSV_HEADER,
    EXIT_CONFIG,
    EXIT_NO_SOLUTION,
    EXIT_OK,
    SWEEP_CSV_HEADER,
    TABLE_CSV_HEADER,
    main,
)

FAST_CONFIG = {
    "num_antennas": 6,
    "num_embb": 2,
    "embb_sinr_target_db": 10,
    "max_power_dbm": 47,
    "noise_power_dbm": -104,
    "urllc_sinr_target_db": -11.44,
    "outage_target": 0.05,
    "num_candidates": 40,
    "history_len": 50,
    "mc_samples": 3000,
    "rng_seed": 3,
}


@pytest.fixture
def fast_config_path(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(FAST_CONFIG))
    return str(path)


def read_csv_lines(path: Path):
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# manifest=")
    return lines


def test_solve_writes_report(fast_config_path, tmp_path):
    out = tmp_path / "run"
    code = main(["solve", "--config", fast_config_path, "--out-dir", str(out)])
    assert code == EXIT_OK
    report = json.loads((out / "solution.json").read_text())
    assert report["certified"] is True
    assert report["total_power_dbm"] <= 47.0
    manifest = json.loads((out / "manifest.json").read_text())
    assert report["manifest_hash"] == manifest["config_hash"]
    assert manifest["counters"]["candidates_evaluated"] == 40


def test_solve_exit_code_when_uncertifiable(fast_config_path, tmp_path):
    # a power budget below any serviceable level leaves no feasible candidate
    cfg = json.loads(Path(fast_config_path).read_text())
    cfg.update({"num_candidates": 1, "outage_target": 1e-9, "max_power_dbm": -100})
    path = Path(fast_config_path).with_name("hard.json")
    path.write_text(json.dumps(cfg))
    code = main(["solve", "--config", str(path), "--out-dir", str(tmp_path / "r")])
    assert code == EXIT_NO_SOLUTION
    report = json.loads((tmp_path / "r" / "solution.json").read_text())
    assert report["certified"] is False
    assert report["counters"]["candidates_evaluated"] == 1
    assert report["counters"]["candidates_certified"] == 0


def test_solve_deterministic_reports(fast_config_path, tmp_path):
    main(["solve", "--config", fast_config_path, "--out-dir", str(tmp_path / "a")])
    main(["solve", "--config", fast_config_path, "--out-dir", str(tmp_path / "b")])
    a = json.loads((tmp_path / "a" / "solution.json").read_text())
    b = json.loads((tmp_path / "b" / "solution.json").read_text())
    a.pop("timestamp"), b.pop("timestamp")
    assert a == b


def test_config_error_exit_codes(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{ not json")
    assert main(["solve", "--config", str(bad), "--out-dir", str(tmp_path)]) == EXIT_CONFIG
    unknown = tmp_path / "unknown.json"
    unknown.write_text(json.dumps({"bandwidth": 10}))
    assert main(["solve", "--config", str(unknown), "--out-dir", str(tmp_path)]) == EXIT_CONFIG
    invalid = tmp_path / "invalid.json"
    invalid.write_text(json.dumps({"num_embb": 9, "num_antennas": 4}))
    assert main(["solve", "--config", str(invalid), "--out-dir", str(tmp_path)]) == EXIT_CONFIG


def test_sweep_csv_schema(fast_config_path, tmp_path):
    out = tmp_path / "sweepdir"
    code = main([
        "sweep", "--config", fast_config_path, "--axis", "kappa0",
        "--values", "0,2,5,10", "--out-dir", str(out), "--mc-samples", "2000",
    ])
    assert code == EXIT_OK
    lines = read_csv_lines(out / "sweep_kappa0.csv")
    assert lines[1] == SWEEP_CSV_HEADER
    assert len(lines) == 2 + 4
    first = lines[2].split(",")
    assert first[0] == "kappa0" and first[2] == "zf"


def test_sweep_round_trip_reproducible(fast_config_path, tmp_path):
    args = [
        "sweep", "--config", fast_config_path, "--axis", "r",
        "--values", "5,10", "--mc-samples", "2000",
    ]
    main(args + ["--out-dir", str(tmp_path / "x")])
    main(args + ["--out-dir", str(tmp_path / "y")])
    a = (tmp_path / "x" / "sweep_r.csv").read_bytes()
    b = (tmp_path / "y" / "sweep_r.csv").read_bytes()
    assert a == b


def test_ensemble_outputs(fast_config_path, tmp_path):
    out = tmp_path / "ens"
    code = main([
        "ensemble", "--config", fast_config_path, "--realizations", "6",
        "--out-dir", str(out), "--threads", "1",
    ])
    assert code == EXIT_OK
    lines = read_csv_lines(out / "ensemble.csv")
    assert lines[1] == ENSEMBLE_CSV_HEADER
    assert len(lines) == 2 + 6
    summary = json.loads((out / "ensemble_summary.json").read_text())
    for key in ("mv", "sd", "cv_percent", "mean_power_dbm", "realizations_used"):
        assert key in summary
    manifest = json.loads((out / "manifest.json").read_text())
    assert summary["manifest_hash"] == manifest["config_hash"]
    assert set(manifest["outputs"]) == {"ensemble.csv", "ensemble_summary.json"}


def test_reproduce_table_grid(fast_config_path, tmp_path):
    out = tmp_path / "tab"
    code = main([
        "reproduce-table3", "--config", fast_config_path, "--realizations", "2",
        "--num-candidates", "25", "--mc-samples", "1500",
        "--out-dir", str(out), "--threads", "1",
    ])
    assert code == EXIT_OK
    lines = read_csv_lines(out / "table3.csv")
    assert lines[1] == TABLE_CSV_HEADER
    rows = [line.split(",") for line in lines[2:]]
    assert len(rows) == 24
    keys = {(r[0], r[1], r[2], r[3]) for r in rows}
    assert len(keys) == 24
    assert {r[0] for r in rows} == {"zf", "tpm"}
    assert {r[2] for r in rows} == {"250", "500"}
    assert {r[3] for r in rows} == {"8", "16"}


def test_seed_override_changes_hash(fast_config_path, tmp_path):
    main(["solve", "--config", fast_config_path, "--out-dir", str(tmp_path / "s1")])
    main(["solve", "--config", fast_config_path, "--seed", "77", "--out-dir", str(tmp_path / "s2")])
    h1 = json.loads((tmp_path / "s1" / "manifest.json").read_text())["config_hash"]
    h2 = json.loads((tmp_path / "s2" / "manifest.json").read_text())["config_hash"]
    assert h1 != h2
