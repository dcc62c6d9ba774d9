import csv
import json

import pytest

from hoferlike import __version__
from hoferlike import cli
from hoferlike.cli import SCHEMA, main
from hoferlike.io import save_generator, payload
from hoferlike.isotopy import harmonic_generator
from hoferlike.suites import SuiteResult
from hoferlike.torus import TorusGrid

SMALL = ["--set", "grid.N=32", "--set", "grid.T=16"]


def test_loop_suite(tmp_path, capsys):
    assert main(["loop", "--out", str(tmp_path)] + SMALL) == 0
    assert "loop: PASS" in capsys.readouterr().out
    rep = json.loads((tmp_path / "loop" / "report.json").read_text())
    assert rep["schema"] == SCHEMA and rep["version"] == __version__
    assert len(rep["config_hash"]) == 64 and rep["pass"]
    rows = list(csv.DictReader(open(tmp_path / "loop" / "classes.csv")))
    assert len(rows) == 75
    ints = [float(r["residual"]) for r in rows if r["integer"] == "True"]
    assert max(ints) <= 1e-6
    assert (tmp_path / "loop" / "plot_residual.csv").exists()


def test_scaling_ratio(tmp_path):
    assert main(["scaling", "--out", str(tmp_path)] + SMALL) == 0
    rows = list(csv.DictReader(open(tmp_path / "scaling" / "scaling.csv")))
    r = [float(x["ratio"]) for x in rows if x["c"] == "2.0" and x["n"] == "1"]
    assert len(r) == 5 and max(abs(v - 2.0) for v in r) <= 1e-10


def test_usage_errors(tmp_path, capsys):
    with pytest.raises(SystemExit) as info:
        main(["bogus"])
    assert info.value.code == 2
    assert main(["loop", "--set", "grid.N=7", "--out", str(tmp_path)]) == 2
    assert "grid.N" in capsys.readouterr().err
    assert main(["loop", "--config", str(tmp_path / "missing.yaml")]) == 2
    with pytest.raises(SystemExit) as info:
        main(["loop", "--parallel", "0"])
    assert info.value.code == 2


def test_failure_exit_code(tmp_path, capsys, monkeypatch):
    def failing(name, cfg, parallel=1):
        res = SuiteResult(name)
        res.check("always fails", False, worst=1.0)
        return res
    monkeypatch.setattr(cli, "run", failing)
    assert main(["loop", "--out", str(tmp_path)] + SMALL) == 1
    assert "always fails" in capsys.readouterr().err
    assert not json.loads((tmp_path / "loop" / "report.json").read_text())["pass"]


def test_config_file_and_all(tmp_path):
    cfg = tmp_path / "run.yaml"
    cfg.write_text("grid: {N: 16, T: 16}\nsuites: [loop, iterates]\n")
    assert main(["all", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 0
    assert sorted(p.name for p in (tmp_path / "o").iterdir()) == ["iterates", "loop"]


def test_seed_changes_hash(tmp_path):
    main(["iterates", "--out", str(tmp_path / "a")] + SMALL)
    main(["iterates", "--out", str(tmp_path / "b"), "--seed", "3"] + SMALL)
    a = json.loads((tmp_path / "a" / "iterates" / "report.json").read_text())
    b = json.loads((tmp_path / "b" / "iterates" / "report.json").read_text())
    assert a["config_hash"] != b["config_hash"] and b["config"]["estimator"]["seed"] == 3


def test_convert(tmp_path, capsys):
    src = save_generator(tmp_path / "g.hlc", harmonic_generator(TorusGrid(8), 16, 0.5, 0.0))
    assert main(["convert", str(src), "--to", "json"]) == 0
    j = tmp_path / "g.json"
    assert j.exists()
    assert main(["convert", str(j), "--to", "container", "--out", str(tmp_path / "r.hlc")]) == 0
    assert payload(tmp_path / "r.hlc") == payload(src)
    bad = tmp_path / "bad.hlc"
    bad.write_bytes(src.read_bytes()[:-3])
    assert main(["convert", str(bad), "--to", "json"]) == 2
    assert "missing section" in capsys.readouterr().err
