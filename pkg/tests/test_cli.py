import json
from pathlib import Path

import pytest

from stable_debruijn import cli
from stable_debruijn.cli import ConfigError, RunConfig, main
from stable_debruijn.stable_core import ConvergenceError
from stable_debruijn.reports import CSV_COLUMNS

SOURCES = Path(__file__).resolve().parent.parent / "sources"


def _files(root):
    return sorted(p for p in Path(root).rglob("*") if p.is_file())


def test_debruijn_cauchy_example(tmp_path):
    rc = main(["debruijn", "--alpha", "1.0", "--eta", "1.0", "--source", str(SOURCES / "atom0.json"),
               "--output", str(tmp_path)])
    assert rc == 0
    doc = json.loads((tmp_path / "debruijn" / "1_1.json").read_text())
    assert doc["pass"] and "eq:final111" in doc["bound_ids"]
    rep = doc["reports"][0]
    assert rep["J_identity"] == pytest.approx(1.0, abs=1e-8)


def test_certify_all_two_atoms_and_rerun_is_byte_identical(tmp_path):
    args = ["certify-all", "--alpha", "1.2", "--b", "0.5", "--source", str(SOURCES / "twoatoms.json"),
            "--output", str(tmp_path)]
    assert main(args) == 0
    out = tmp_path / "certify-all" / "1.2_b0.5.json"
    first = out.read_bytes()
    doc = json.loads(first)
    assert doc["pass"]
    for bid in ("eq:deff", "eq:uppcons", "eq:ff", "eq:final111", "q-lower-chain"):
        assert bid in doc["bound_ids"]
    assert main(args) == 0
    assert out.read_bytes() == first


@pytest.mark.parametrize("argv", [
    ["pdf", "--eta", "1.0"],
    ["pdf", "--alpha", "--eta", "1.0"],
    ["pdf", "--alpha", "2.5", "--eta", "1.0"],
    ["entropy", "--alpha", "1.0", "--eta", "-1"],
    ["bounds", "--alpha", "1.0"],
    ["debruijn", "--alpha", "1.0", "--eta", "1.0", "--source", "/nonexistent/src.json"],
])
def test_config_errors_exit_2_without_files(tmp_path, argv):
    assert main(argv + ["--output", str(tmp_path)]) == 2
    assert _files(tmp_path) == []


def test_malformed_source_exit_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"kind": "atoms", "atoms": [[0, 0.3]]}')
    out = tmp_path / "out"
    assert main(["pdf", "--alpha", "1", "--eta", "1", "--source", str(bad), "--output", str(out)]) == 2
    assert not out.exists()


def test_csv_projection(tmp_path):
    assert main(["bounds", "--alpha", "1.5", "--b", "1.0", "--format", "csv",
                 "--output", str(tmp_path)]) == 0
    csv_path = tmp_path / "bounds" / "1.5_b1.csv"
    lines = csv_path.read_text().splitlines()
    assert lines[0].split(",") == list(CSV_COLUMNS)
    assert len(lines) > 1 and all(l.endswith("true") for l in lines[1:])
    assert (tmp_path / "bounds" / "1.5_b1.json").is_file()


def test_one_file_per_combination_with_thread_cap(tmp_path, monkeypatch):
    monkeypatch.setenv("STABLE_DEBRUIJN_THREADS", "2")
    assert main(["pdf", "--alpha", "0.8", "1.5", "--eta", "0.5", "2", "--output", str(tmp_path)]) == 0
    names = [p.name for p in _files(tmp_path)]
    assert names == ["0.8_0.5.json", "0.8_2.json", "1.5_0.5.json", "1.5_2.json"]


def test_bad_thread_cap_is_config_error(tmp_path, monkeypatch):
    monkeypatch.setenv("STABLE_DEBRUIJN_THREADS", "many")
    assert main(["pdf", "--alpha", "1", "--eta", "1", "--output", str(tmp_path)]) == 2
    assert _files(tmp_path) == []


def test_failed_computation_exit_1_names_report(tmp_path, capsys, monkeypatch):
    def broken(cfg, job, source):
        raise ConvergenceError("no convergence", 1.0)

    monkeypatch.setitem(cli.SUITES, "entropy", broken)
    rc = main(["entropy", "--alpha", "1.0", "--eta", "1.0", "--output", str(tmp_path)])
    assert rc == 1
    path = tmp_path / "entropy" / "1_1.json"
    assert str(path) in capsys.readouterr().err
    doc = json.loads(path.read_text())
    assert doc["pass"] is False and "ConvergenceError" in doc["error"]


def test_failed_certificate_exit_1(tmp_path, capsys, monkeypatch):
    real = cli.SUITES["pdf"]

    def failing(cfg, job, source):
        doc, rows = real(cfg, job, source)
        doc["reports"][0]["pass"] = False
        return cli._doc(doc["reports"]), rows

    monkeypatch.setitem(cli.SUITES, "pdf", failing)
    assert main(["pdf", "--alpha", "1.0", "--eta", "1", "2", "--output", str(tmp_path)]) == 1
    err = capsys.readouterr().err
    assert "1_1.json" in err and "1_2.json" in err


def test_atom_source_integrability_is_tight_but_passes(tmp_path):
    assert main(["bounds", "--alpha", "1.5", "--b", "1.0", "--output", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "bounds" / "1.5_b1.json").read_text())
    ff = [r for r in doc["reports"] if r["bound_id"] == "eq:ff"][0]
    assert ff["log_moment"] == 0.0
    assert abs(ff["max_ratio"] - 1.0) <= ff["tolerance"]


def test_every_report_names_its_bound(tmp_path):
    for cmd in ("pdf", "derivs", "entropy"):
        assert main([cmd, "--alpha", "1.5", "--eta", "1", "--output", str(tmp_path)]) == 0
        doc = json.loads((tmp_path / cmd / "1.5_1.json").read_text())
        assert doc["bound_ids"] and all(doc["bound_ids"])


def test_runconfig_validate():
    with pytest.raises(ConfigError):
        RunConfig("nope", [1.0], [1.0]).validate()
    RunConfig("pdf", [1.0], [1.0]).validate()
