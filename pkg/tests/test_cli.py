import csv
import json

import pytest

from cofsec.channel import sample_channel
from cofsec.cli import run


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(sample_channel(3, 42, P=1e6).to_json())
    return path


def test_rates_happy_path(config_file, tmp_path, capsys):
    before = config_file.read_bytes()
    assert run(["rates", "--config", str(config_file), "--T", "2", "--dump-cof"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert set(out["report"]) >= {"R", "leakage", "R_intended", "sumRate", "cof"}
    assert {"A", "sigma2", "R_comb", "decodeOrder"} <= set(out["report"]["cof"][0])
    assert config_file.read_bytes() == before


def test_rates_infeasible_exit_code(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(sample_channel(3, 1, P=0.01).to_json())
    assert run(["rates", "--config", str(path), "--T", "2"]) == 1


def test_rates_grid_file(config_file, tmp_path, capsys):
    grid = tmp_path / "g.json"
    grid.write_text(json.dumps({"deltas": [0.1], "share_steps": 3}))
    assert run(["rates", "--config", str(config_file), "--T", "2", "--grid-file", str(grid), "--dump-alloc"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert "Pm" in out["allocation"]


def test_sweep_rows(config_file, tmp_path):
    out = tmp_path / "s.csv"
    code = run(["--out", str(out), "sweep", "--config", str(config_file), "--T", "2",
                "--pmin", "1e4", "--pmax", "1e12", "--points", "9"])
    assert code == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == ["P", "R_1", "R_2", "R_3", "sumRate", "halfLog2_1pP", "ratio"]
    assert len(rows) == 10


def test_sdof_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    args = ["sdof", "--seed", "42", "--T", "2", "--points", "5"]
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    d = json.loads(a.read_text())
    assert d["seed"] == 42 and "slope" in d


def test_sdof_seed_range(capsys):
    assert run(["sdof", "--seeds", "1-2", "--T", "2", "--points", "4"]) == 0
    assert len(json.loads(capsys.readouterr().out)["runs"]) == 2


def test_align_stats(capsys):
    assert run(["align-stats", "--K", "2", "3", "--t-max", "4"]) == 0
    rows = list(csv.reader(capsys.readouterr().out.splitlines()))
    assert rows[0] == ["T", "K", "fraction_exact", "fraction_enumerated"]
    assert len(rows) == 1 + 2 * 3
    assert all(abs(float(r[2]) - float(r[3])) < 1e-12 for r in rows[1:])


@pytest.mark.parametrize("test", ["crypto", "entropy", "decomp"])
def test_lab(test, capsys):
    assert run(["lab", "--test", test, "--samples", "20000", "--seed", "3"]) == 0
    assert json.loads(capsys.readouterr().out)["passed"] is True


def test_oracle_check_quick(capsys):
    assert run(["oracle-check", "--quick"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("kernel backend:")
    assert all(line.startswith("PASS") for line in lines[1:])
    assert all("trials=" in line and "max_rel_err=" in line for line in lines[1:])


def test_oracle_negative_control(capsys):
    assert run(["oracle-check", "--quick", "--negative-control"]) == 1
    out = capsys.readouterr().out
    assert "FAIL  lll_vs_enumeration" in out


@pytest.mark.parametrize(
    "argv",
    [[], ["bogus"], ["rates", "--config", "/nonexistent.json"], ["sweep", "--pmin", "10", "--pmax", "1"],
     ["rates", "--K", "1"]],
)
def test_usage_errors(argv, capsys):
    assert run(argv) == 2
    assert "usage" in capsys.readouterr().err
