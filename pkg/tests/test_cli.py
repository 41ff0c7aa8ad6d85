import json
import math

import pytest

from milnorian import cli


def run_cli(capsys, *argv):
    status = cli.main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def test_check_milnorian(tmp_path, capsys):
    status, out, _ = run_cli(capsys, "check", "--type", "B", "--rank", "2", "--weight", "1,0",
                             "--out", str(tmp_path))
    assert status == cli.EXIT_OK
    data = json.loads((tmp_path / "check.json").read_text())
    assert data == json.loads(out)
    assert data["report"]["verdict"] == "Milnorian"
    assert data["config"]["weight"] == [1, 0] and "out" not in data["config"]


def test_check_other_verdict(tmp_path, capsys):
    status, out, _ = run_cli(capsys, "check", "--type", "A", "--rank", "1", "--weight", "2",
                             "--out", str(tmp_path))
    assert status == cli.EXIT_OK
    assert json.loads(out)["report"]["verdict"] != "Milnorian"


@pytest.mark.parametrize("argv", [
    ["check", "--type", "B", "--rank", "2", "--weight", "1,,0"],
    ["check", "--type", "Q", "--rank", "2", "--weight", "1,0"],
    ["check", "--type", "B", "--rank", "2", "--weight", "1,0,0"],
    ["check", "--type", "B", "--rank", "2"],
    ["simulate", "--type", "B", "--rank", "2", "--weight", "1,0"],
    ["simulate", "--type", "B", "--rank", "2", "--weight", "1,0", "--seed", "1", "--n-max", "0"],
    ["witness"],
    ["scan"],
    ["frobnicate"],
])
def test_invalid_input_exit_code(tmp_path, capsys, argv):
    status, _, err = run_cli(capsys, *argv, "--out", str(tmp_path))
    assert status == cli.EXIT_INVALID
    assert json.loads(err)["exit_status"] == cli.EXIT_INVALID


def test_simulate_rejects_non_milnorian(tmp_path, capsys):
    status, _, err = run_cli(capsys, "simulate", "--type", "A", "--rank", "1", "--weight", "2",
                             "--seed", "1", "--out", str(tmp_path))
    assert status == cli.EXIT_INVALID and "Milnorian" in json.loads(err)["message"]


def test_scan_catalog(tmp_path, capsys):
    cat = tmp_path / "cat.toml"
    cat.write_text('[[entry]]\ngroup = "B1"\nweight = "2"\n\n'
                   '[[entry]]\ngroup = "B2"\nweight = "1,0"\n\n'
                   '[[entry]]\ngroup = "B3"\nweight = "1,0,0"\n')
    status, out, _ = run_cli(capsys, "scan", "--catalog", str(cat), "--out", str(tmp_path))
    assert status == cli.EXIT_OK
    data = json.loads((tmp_path / "scan.json").read_text())
    verdicts = [r["verdict"] for r in data["reports"]]
    assert verdicts[1] == "Milnorian" and verdicts[0] != "Milnorian" and verdicts[2] != "Milnorian"
    assert (tmp_path / "scan.txt").read_text() == out


def test_empty_catalog(tmp_path, capsys):
    cat = tmp_path / "empty.toml"
    cat.write_text("")
    status, _, _ = run_cli(capsys, "scan", "--catalog", str(cat), "--out", str(tmp_path))
    assert status == cli.EXIT_OK
    assert json.loads((tmp_path / "scan.json").read_text())["reports"] == []


def test_catalog_bad_weight_position(tmp_path, capsys):
    cat = tmp_path / "bad.toml"
    cat.write_text('[[entry]]\ngroup = "B2"\nweight = "1,,0"\n')
    status, _, err = run_cli(capsys, "scan", "--catalog", str(cat), "--out", str(tmp_path))
    payload = json.loads(err)
    assert status == cli.EXIT_INVALID
    assert (payload["line"], payload["column"]) == (3, 10)


def test_catalog_syntax_error_position(tmp_path):
    cat = tmp_path / "broken.toml"
    cat.write_text('[[entry]]\ngroup = "B2\n')
    with pytest.raises(cli.CatalogError) as info:
        cli.ingest_catalog(str(cat))
    assert info.value.line == 2


def test_config_file(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('type = "B"\nrank = 2\nweight = "1,0"\nseed = 3\nsamples = 40\n')
    values = cli.load_config_file(str(cfg))
    config = cli.build_config("simulate", values, {"seed": 5})
    assert config.seed == 5 and config.sample_count == 40 and config.weight == (1, 0)
    cfg.write_text('type = "B"\ncolour = "red"\n')
    with pytest.raises(cli.ConfigError):
        cli.load_config_file(str(cfg))


def test_float_format():
    assert cli.dumps(0.1) == "0.10000000000000001"
    assert cli.dumps([1.0, math.nan, math.inf]) == "[1, null, null]"
    assert json.loads(cli.dumps({"x": 1 / 3}))["x"] == 1 / 3


def test_simulate_and_witness(tmp_path, capsys):
    args = ["--type", "B", "--rank", "2", "--weight", "1,0", "--seed", "42", "--n-max", "4",
            "--samples", "40"]
    status, _, _ = run_cli(capsys, "simulate", *args, "--out", str(tmp_path))
    assert status == cli.EXIT_OK
    family = json.loads((tmp_path / "family.json").read_text())
    assert family["seed"] == 42 and family["config"]["n_max"] == 4
    rows = (tmp_path / "traces.csv").read_text().splitlines()
    assert rows[0].split(",") == list(cli.CSV_COLUMNS) and len(rows) == 5
    status, out, _ = run_cli(capsys, "witness", "--input", str(tmp_path / "family.json"),
                             "--out", str(tmp_path))
    assert status == cli.EXIT_OK
    report = json.loads((tmp_path / "witness.json").read_text())
    assert report["seed"] == 42 and report["witness"]["successes"] == 4
    # a tampered artifact no longer matches its own configuration
    family["traces"][0]["word"] = "ab"
    (tmp_path / "family.json").write_text(json.dumps(family))
    status, _, _ = run_cli(capsys, "witness", "--input", str(tmp_path / "family.json"),
                           "--out", str(tmp_path))
    assert status == cli.EXIT_CERTIFICATION
