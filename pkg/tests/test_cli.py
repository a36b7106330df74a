import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from chronogen import cli
from chronogen.config import DEFAULT_TOLERANCES, parse_config, serialize_config
from chronogen.exceptions import ConfigParseError, ConfigValidationError


def write_cfg(tmp_path, doc, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(path)


def test_minimal_config_defaults():
    cfg = parse_config('{"mode": "example"}')
    assert cfg.grid.start == 0 and cfg.grid.stop == pytest.approx(2 * math.pi) and cfg.grid.points == 2001
    assert cfg.spec == {"builtin": "paper_example"}
    assert cfg.tolerances == DEFAULT_TOLERANCES
    assert cfg.seed == 0 and cfg.threads == 1


def test_empty_document_is_default():
    assert parse_config("") == parse_config("{}")


@pytest.mark.parametrize("doc", [
    {"grid": {"points": 1}},
    {"grid": {"start": 1.0, "stop": 1.0}},
    {"mode": "fly"},
    {"spec": {"builtin": "nope"}},
    {"spec": {"h_system": [[1]]}},
    {"threads": 0},
    {"tolerances": {"infidelity": -1}},
    {"grid": {"points": 10.5}},
    {"extra": 1},
    {"grid": {"start": 0, "steps": 3}},
    {"chi0": [[1, 2, 3]]},
])
def test_invalid_configs(doc):
    with pytest.raises(ConfigValidationError):
        parse_config(json.dumps(doc))


@pytest.mark.parametrize("text", ["{", "[1, 2]", "mode: example", b"\xff\xfe"])
def test_malformed_configs(text):
    with pytest.raises(ConfigParseError):
        parse_config(text)


def test_round_trip():
    doc = {
        "mode": "verify",
        "spec": {"h_system": [[1, 0], [0, -1]], "h_clock": [[0, [0, -1]], [[0, 1], 0]],
                 "v_interaction": np.eye(4).tolist()},
        "eigenstate": {"energy_index": 1, "coefficients": [[0.5, 0.25], 1]},
        "chi0": [1, [0, 1]],
        "grid": {"start": -1, "stop": 2.5, "points": 17},
        "readout": {"observable": [[0, 1], [1, 0]], "observed_value": 0.1},
        "seed": 42,
        "threads": 3,
    }
    cfg = parse_config(json.dumps(doc))
    again = parse_config(serialize_config(cfg))
    assert again == cfg
    assert serialize_config(again) == serialize_config(cfg)


def test_example_writes_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    code = cli.main(["example", "--grid", "0", "6.283185307179586", "2001", "--out", str(out)])
    assert code == cli.EXIT_OK
    assert "example: PASS" in capsys.readouterr().out
    with open(out / "trajectory.csv") as fh:
        rows = list(csv.reader(fh))
    assert tuple(rows[0]) == cli.CSV_COLUMNS_QUBIT
    assert len(rows) == 2002
    report = json.loads((out / "report.json").read_text())
    assert report["passed"] and report["exit_code"] == 0
    assert report["projected_vs_closed_form"]["max_infidelity"] <= 1e-9


def test_csv_byte_identical(tmp_path):
    for name in ("a", "b"):
        assert cli.main(["example", "--grid", "0", "3", "1001", "--out", str(tmp_path / name),
                         "--threads", "2" if name == "b" else "1"]) == 0
    assert (tmp_path / "a" / "trajectory.csv").read_bytes() == (tmp_path / "b" / "trajectory.csv").read_bytes()


def test_csv_round_trips_doubles(tmp_path):
    cli.main(["example", "--grid", "0", "1", "11", "--out", str(tmp_path)])
    with open(tmp_path / "trajectory.csv") as fh:
        rows = list(csv.DictReader(fh))
    lams = np.array([float(r["lambda"]) for r in rows])
    assert np.array_equal(lams, np.linspace(0, 1, 11))


def test_verify_failure_exit(tmp_path):
    cfg = write_cfg(tmp_path, {"tolerances": {"infidelity": 1e-15, "tdse_rtol": 1e-15, "norm_drift": 1e-15},
                               "grid": {"points": 51}})
    assert cli.main(["verify", "--config", cfg]) == cli.EXIT_VERIFICATION


def test_singular_overlap_exit(tmp_path, capsys):
    doc = {"spec": {"builtin": "degenerate_free"}, "chi0": [0, 1],
           "eigenstate": {"energy_index": 2, "coefficients": [1]}, "grid": {"points": 11, "stop": 1}}
    code = cli.main(["verify", "--config", write_cfg(tmp_path, doc), "--report", "json"])
    assert code == cli.EXIT_SINGULAR
    report = json.loads(capsys.readouterr().out)
    assert report["exit_code"] == 3 and "lambda" in report


def test_validation_and_parse_exits(tmp_path):
    assert cli.main(["example", "--config", write_cfg(tmp_path, {"grid": {"points": 1}})]) == cli.EXIT_CONFIG
    assert cli.main(["example", "--config", write_cfg(tmp_path, "{oops")]) == cli.EXIT_PARSE
    assert cli.main(["example", "--grid", "0", "1", "1"]) == cli.EXIT_CONFIG
    assert cli.main(["example", "--config", str(tmp_path / "missing.json")]) == cli.EXIT_CONFIG
    with pytest.raises(SystemExit) as info:
        cli.main(["warp"])
    assert info.value.code == cli.EXIT_CONFIG


def test_mode_conflict(tmp_path):
    assert cli.main(["readout", "--config", write_cfg(tmp_path, {"mode": "verify"})]) == cli.EXIT_CONFIG


def test_seed_env_override():
    args = cli.build_parser().parse_args(["verify"])
    assert cli.load_config(args, {"CHRONOGEN_SEED": "17"}).seed == 17
    assert cli.load_config(args, {}).seed == 0
    with pytest.raises(ConfigValidationError):
        cli.load_config(args, {"CHRONOGEN_SEED": "x"})


def test_random_spec_seed_changes_output(tmp_path, monkeypatch):
    doc = {"spec": {"random": {"d_system": 3, "d_clock": 4, "coupling_strength": 0.3}},
           "grid": {"points": 401, "stop": 1.0}}
    cfg = write_cfg(tmp_path, doc)
    dirs = []
    for seed in ("1", "1", "2"):
        monkeypatch.setenv("CHRONOGEN_SEED", seed)
        d = tmp_path / f"run{len(dirs)}"
        assert cli.main(["verify", "--config", cfg, "--out", str(d)]) == 0
        dirs.append(d)
    blobs = [(d / "potentials.json").read_bytes() for d in dirs]
    assert blobs[0] == blobs[1] and blobs[0] != blobs[2]
    with open(dirs[0] / "trajectory.csv") as fh:
        assert tuple(next(csv.reader(fh))) == cli.CSV_COLUMNS_GENERAL


def test_report_json(capsys):
    assert cli.main(["example", "--grid", "0", "1", "401", "--report", "json"]) == 0
    captured = capsys.readouterr()
    report = json.loads(captured.out)
    assert set(report["checks"]) == {"infidelity_proj_vs_int", "tdse_residual", "norm_drift"}
    assert "example: PASS" in captured.err


def test_generate_export(tmp_path):
    assert cli.main(["generate", "--out", str(tmp_path)]) == 0
    export = json.loads((tmp_path / "export.json").read_text())
    assert export["metadata"]["verification"]["passed"]
    assert len(export["records"]["lambda"]) == 2001


def test_generate_refusal(tmp_path):
    cfg = write_cfg(tmp_path, {"chi0": [2, 1]})
    assert cli.main(["generate", "--config", cfg, "--out", str(tmp_path / "o")]) == cli.EXIT_VERIFICATION
    assert not (tmp_path / "o" / "export.json").exists()


def test_readout_mode(tmp_path, capsys):
    doc = {"chi0": [1, 1], "readout": {"observed_value": 0.0}, "grid": {"stop": 1.5, "points": 301}}
    assert cli.main(["readout", "--config", write_cfg(tmp_path, doc), "--out", str(tmp_path),
                     "--report", "json"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["participation_ratio"] == pytest.approx(2)
    assert report["estimated_lambda"] == pytest.approx(math.pi / 4, abs=1.5 / 300)
    with open(tmp_path / "readout.csv") as fh:
        assert len(list(csv.reader(fh))) == 302


def test_readout_unusable(tmp_path):
    doc = {"chi0": [1, 1], "readout": {"observed_value": 0.0}}
    assert cli.main(["readout", "--config", write_cfg(tmp_path, doc)]) == cli.EXIT_VERIFICATION


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "chronogen", "example", "--grid", "0", "1", "401"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("example: PASS")
