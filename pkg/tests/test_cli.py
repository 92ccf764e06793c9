import csv
import io
import json
import math
import subprocess
import sys

import pytest

from em_capacity import __version__
from em_capacity.cli import ConfigError, RunConfig, main, read_config_file, resolve


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    meta = {}
    body = []
    for line in text.splitlines():
        if line.startswith("# "):
            k, _, v = line[2:].partition(" = ")
            meta[k] = v
        else:
            body.append(line)
    return meta, list(csv.DictReader(io.StringIO("\n".join(body))))


def test_efficiency_sweep_csv(capsys):
    code, out, _ = run(["efficiency", "--eps-r", "16", "--tan-delta", "1e-4", "--sweep-r1", "0.01:1.2:120", "--n-max", "5"], capsys)
    assert code == 0
    meta, rows = parse_csv(out)
    assert list(rows[0]) == ["r1_over_lambda", "n", "l", "eta"]
    assert len(rows) == 120 * 5 * 2
    assert meta["version"] == __version__ and meta["tan_delta"] == "0.0001"
    etas = [float(r["eta"]) for r in rows]
    assert all(0 < e <= 1 + 1e-9 for e in etas)
    assert float(rows[0]["r1_over_lambda"]) == pytest.approx(0.01)
    assert float(rows[-1]["r1_over_lambda"]) == pytest.approx(1.2)


def test_gain_opt_json(capsys):
    code, out, _ = run(
        ["gain-opt", "--eps-r", "16", "--tan-delta", "1.2e-4", "--fc", "16.8e9", "--r1", "5e-3",
         "--q-bar", "33.6", "--n-max", "8", "--format", "json"],
        capsys,
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["argmax_n"] == 5
    assert doc["gain"] == pytest.approx(12.31, rel=0.05)
    assert doc["directivity"] == pytest.approx(12.36, rel=0.05)
    assert abs(doc["beamwidth_deg"] - 60) < 5
    assert doc["meta"]["q_bar"] == 33.6
    assert sum(r["is_argmax"] for r in doc["rows"]) == 1


def test_backscatter_ratio(capsys):
    code, out, _ = run(["backscatter", "--beta", "0.8", "--n", "80"], capsys)
    assert code == 0
    _, rows = parse_csv(out)
    assert float(rows[-1]["ratio"]) == pytest.approx(0.5, abs=0.02)


@pytest.mark.parametrize("cmd", ["efficiency", "qfactor", "capacity", "dof", "backscatter", "gain-opt", "sample-check"])
def test_dry_run_every_command(cmd, capsys):
    code, out, _ = run([cmd, "--dry-run", "--sweep-r1", "0.1:0.5:3"], capsys)
    assert code == 0
    assert f"command: {cmd}" in out
    assert "grid points: 3" in out


def test_invalid_config_exit_code_names_field(capsys):
    code, _, err = run(["efficiency", "--eps-r", "-2"], capsys)
    assert code == 2 and "eps_r" in err
    code, _, err = run(["efficiency", "--sweep-r1", "1:0.5:4"], capsys)
    assert code == 2 and "sweep_r1" in err
    code, _, err = run(["capacity", "--alpha", "1.5"], capsys)
    assert code == 2 and "alpha" in err
    code, _, _ = run(["no-such-command"], capsys)
    assert code == 2


def test_infeasible_q_bar_exit_code(capsys):
    code, _, err = run(["gain-opt", "--q-bar", "1e-3", "--n-max", "2"], capsys)
    assert code == 3
    assert "InfeasibleQ" in err and "minimum achievable" in err


def test_byte_identical_output(tmp_path, monkeypatch):
    # the header records the output path, so both runs use the same name
    (tmp_path / "1").mkdir()
    (tmp_path / "2").mkdir()
    a, b = tmp_path / "1" / "out.csv", tmp_path / "2" / "out.csv"
    args = ["qfactor", "--sweep-r1", "0.05:0.5:6", "--n-max", "3"]
    with monkeypatch.context() as mp:
        mp.chdir(tmp_path / "1")
        assert main(args + ["-o", "out.csv"]) == 0
        mp.chdir(tmp_path / "2")
        assert main(args + ["-o", "out.csv"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_threads_do_not_change_output(tmp_path, monkeypatch):
    (tmp_path / "1").mkdir()
    (tmp_path / "2").mkdir()
    a, b = tmp_path / "1" / "out.csv", tmp_path / "2" / "out.csv"
    args = ["efficiency", "--sweep-r1", "0.05:1.0:20", "--n-max", "4"]
    monkeypatch.chdir(tmp_path / "1")
    assert main(args + ["-o", "out.csv"]) == 0
    monkeypatch.setenv("EM_CAPACITY_THREADS", "4")
    monkeypatch.chdir(tmp_path / "2")
    assert main(args + ["-o", "out.csv"]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_config_file_and_flag_precedence(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("eps_r = 4\ntan_delta = 1e-3\n\n[capacity]\nalpha = 0.2\npower = 3\n")
    values = read_config_file(str(path), "capacity")
    assert values["eps_r"] == "4" and values["alpha"] == "0.2"
    cfg, dry = resolve(["capacity", "--config", str(path), "--power", "5"])
    assert not dry
    assert cfg.eps_r == 4.0 and cfg.tan_delta == 1e-3 and cfg.alpha == 0.2 and cfg.power == 5.0
    cfg, _ = resolve(["efficiency", "--config", str(path)])
    assert cfg.alpha == RunConfig("efficiency").alpha


def test_unknown_config_key(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("colour = blue\n")
    with pytest.raises(ConfigError):
        read_config_file(str(path), "efficiency")
    assert main(["efficiency", "--config", str(path)]) == 2


def test_capacity_bits_flag(capsys):
    base = ["capacity", "--sweep-r1", "0.1:0.3:3", "--n-max", "2", "--power", "2"]
    _, out_nats, _ = run(base, capsys)
    _, out_bits, _ = run(base + ["--bits"], capsys)
    _, nats = parse_csv(out_nats)
    _, bits = parse_csv(out_bits)
    for a, b in zip(nats, bits):
        assert float(b["capacity_bits"]) == pytest.approx(float(a["capacity_nats"]) / math.log(2), rel=1e-14)


def test_dof_command(capsys):
    code, out, _ = run(["dof", "--tan-delta", "1e-6", "--sweep-r1", "0.1:0.4:4", "--q-max", "1e8"], capsys)
    assert code == 0
    _, rows = parse_csv(out)
    counts = [int(r["dof"]) for r in rows]
    assert counts == sorted(counts)


def test_json_mirrors_csv_fields(capsys):
    base = ["qfactor", "--sweep-r1", "0.1:0.2:2", "--n-max", "1"]
    _, out_csv, _ = run(base, capsys)
    _, out_json, _ = run(base + ["--format", "json"], capsys)
    _, rows = parse_csv(out_csv)
    doc = json.loads(out_json)
    assert [list(r) for r in doc["rows"]][0] == list(rows[0])
    assert len(doc["rows"]) == len(rows)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "em_capacity", "backscatter", "--dry-run"], capture_output=True, text=True)
    assert proc.returncode == 0 and "command: backscatter" in proc.stdout
