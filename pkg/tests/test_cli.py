import json

import pytest

from zetamellin.cli import (
    ConfigError,
    ExperimentConfig,
    emit_plotdata,
    main,
    read_plotdata,
)


def _run(tmp_path, *argv):
    out = tmp_path / "out"
    code = main([*argv, "--out", str(out), "--cache-dir", str(tmp_path / "cache")])
    return code, out


def test_moment_row(tmp_path):
    code, out = _run(tmp_path, "moment", "--k", "1", "--T", "100")
    assert code == 0
    lines = (out / "moment.csv").read_text().splitlines()
    assert len(lines) == 2
    row = lines[1].split(",")
    assert row[:2] == ["1", "100"]
    # E_1(100) from an independent mpmath quadrature
    assert float(row[4]) == pytest.approx(3.4626541165, abs=1e-8)


def test_rerun_byte_identical(tmp_path):
    _, out = _run(tmp_path, "moment", "--k", "1", "--T", "100", "--T", "300")
    first = (out / "moment.csv").read_bytes()
    m1 = json.loads((out / "manifest.json").read_text())
    _, out = _run(tmp_path, "moment", "--k", "1", "--T", "100", "--T", "300")
    assert (out / "moment.csv").read_bytes() == first
    m2 = json.loads((out / "manifest.json").read_text())
    assert m1["artifact_blake2b"] == m2["artifact_blake2b"]


def test_manifest_keys(tmp_path):
    _, out = _run(tmp_path, "zeta", "--t", "14.134725", "--format", "json")
    m = json.loads((out / "manifest.json").read_text())
    assert {"config", "version", "artifact", "artifact_blake2b", "cache_checksums",
            "wall_time_s"} <= set(m)
    assert m["config"]["command"] == "zeta"
    rows = json.loads((out / m["artifact"]).read_text())
    assert isinstance(rows, list) and rows


@pytest.mark.parametrize("argv", [
    ["moment", "--k", "9", "--T", "100"],
    ["smooth", "--T", "50", "--xi", "0.1"],
    ["mellin", "--sigma", "0.3", "--t", "5"],
])
def test_validation_exit_code(tmp_path, argv, capsys):
    code, out = _run(tmp_path, *argv)
    assert code == 2
    assert "error:" in capsys.readouterr().err
    assert not (out / "manifest.json").exists()


def test_unknown_command_config():
    with pytest.raises(ConfigError):
        ExperimentConfig("plot")
    with pytest.raises(ConfigError):
        ExperimentConfig("zeta", format="xml")


def test_emit_plotdata_roundtrip(tmp_path):
    paths = emit_plotdata({"E_1 mean": [(1, 2.5), (2, -0.125)], "Z abs": [(0.5, 1e-300)]}, tmp_path)
    assert [p.name for p in paths] == ["e_1_mean.csv", "z_abs.csv"]
    assert read_plotdata(paths[0]) == [(1.0, 2.5), (2.0, -0.125)]
    assert read_plotdata(paths[1]) == [(0.5, 1e-300)]


def test_emit_plotdata_errors(tmp_path):
    with pytest.raises(ConfigError):
        emit_plotdata({}, tmp_path)
    with pytest.raises(ConfigError):
        emit_plotdata({"a b": [(0, 0)], "a-b": [(1, 1)]}, tmp_path)


def test_accept_single_criterion(tmp_path):
    code, out = _run(tmp_path, "accept", "--only", "2")
    assert code == 0
    rep = json.loads((out / "accept.json").read_text())
    assert rep["passed"] is True
    assert [c["number"] for c in rep["criteria"]] == [2]
