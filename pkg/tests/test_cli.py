import json
import math

import pytest

from uvcc.circuit import count_gates, parse_qasm
from uvcc.cli import ConfigError, EXIT_CONFIG, EXIT_FAIL, EXIT_OK, load_config, main, parse_angle


def _write_bad(tmp_path, angles):
    text = (
        '[modes]\nlevels = [2, 2]\n\n[ansatz]\nreference = [0, 0]\n'
        'targets = [[1, 1], [1, 0]]\n'
        f'angles = {json.dumps(angles)}\n'
    )
    p = tmp_path / "bad.toml"
    p.write_text(text)
    return p


def test_parse_angle():
    assert parse_angle("7/8") == pytest.approx(7 * math.pi / 8)
    assert parse_angle(0.5) == pytest.approx(math.pi / 2)
    with pytest.raises(ValueError):
        parse_angle("pi/2")


def test_shipped_configs():
    s6 = load_config("s6")
    assert s6.ansatz.layout.width == 6
    assert len(s6.ansatz.terms) == 7
    assert s6.ansatz.terms[0].theta == pytest.approx(7 * math.pi / 8)
    s8 = load_config("s8")
    assert s8.ansatz.spec.levels == (2, 2, 4)
    assert len(s8.ansatz.terms) == 15
    assert s8.shots == 512


def test_angle_count_is_config_error(tmp_path, capsys):
    p = _write_bad(tmp_path, ["1/2"])
    with pytest.raises(ConfigError, match="line 7"):
        load_config(p)
    out = tmp_path / "out"
    assert main(["build", "--config", str(p), "--out", str(out)]) == EXIT_CONFIG
    assert not out.exists()
    assert "angles" in capsys.readouterr().err


def test_missing_config():
    assert main(["verify", "--config", "/nonexistent/x.toml"]) == EXIT_CONFIG


def test_build_writes_qasm_and_counts(tmp_path, capsys):
    counts = {}
    for method in ("redundant", "givens"):
        assert main(["build", "--config", "s6", "--method", method, "--out", str(tmp_path)]) == EXIT_OK
        qasm = (tmp_path / f"s6-{method}.qasm").read_text()
        side = json.loads((tmp_path / f"s6-{method}.counts.json").read_text())
        c = parse_qasm(qasm, width=6)
        assert c.width == 6
        assert count_gates(c).cx == side["counts"]["cx"]
        counts[method] = side["counts"]["cx"]
    capsys.readouterr()
    assert counts["redundant"] < counts["givens"]


def test_verify_pass_and_negative_control(capsys):
    assert main(["verify", "--config", "s6"]) == EXIT_OK
    assert main(["verify", "--config", "s8", "--method", "givens"]) == EXIT_OK
    capsys.readouterr()
    assert main(["verify", "--config", "s6", "--perturb", "0.01"]) == EXIT_FAIL
    report = json.loads(capsys.readouterr().out)
    assert report["worst_error"] > 1e-3


def test_simulate_deterministic(tmp_path, capsys):
    args = ["simulate", "--config", "s6", "--shots", "220", "--seed", "3", "--noise", "0.01"]
    assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_OK
    assert main(args + ["--out", str(tmp_path / "b")]) == EXIT_OK
    capsys.readouterr()
    a = (tmp_path / "a" / "simulate-s6-redundant.json").read_bytes()
    assert a == (tmp_path / "b" / "simulate-s6-redundant.json").read_bytes()
    rep = json.loads(a)
    assert rep["tvd_sampled"][0] < 0.2
    csv_rows = (tmp_path / "a" / "simulate-s6-redundant.csv").read_text().splitlines()
    assert csv_rows[0] == "bitstring,exact,method,value"


def test_simulate_large_shots_close(capsys):
    assert main(["simulate", "--config", "s6", "--shots", "1000000", "--seed", "1"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["tvd_sampled"][0] < 0.005


def test_simulate_rejects_bad_shots():
    assert main(["simulate", "--config", "s6", "--shots", "0"]) == EXIT_CONFIG


def test_tables_output(tmp_path, capsys):
    assert main(["tables", "--out", str(tmp_path)]) == EXIT_OK
    text = capsys.readouterr().out
    assert "28m-40" in text and "20m-32" in text
    rep = json.loads((tmp_path / "tables.json").read_text())
    assert rep["table1"]["counts"]["givens"]["4"] == 142
    assert main(["tables", "--A", "3", "--B", "1", "--toffoli", "full", "--json"]) == EXIT_OK
    rep = json.loads(capsys.readouterr().out)
    assert rep["table2"]["formulas"]["givens"] == f"{24 * 3 + 4}m{-24 * 3 - 12 + 2:+d}"
