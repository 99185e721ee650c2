"""Command-line interface: subcommands, exit codes, reports, and the
on-disk result cache."""

import csv
import json

import pytest
from click.testing import CliRunner

from wallx.cli import cache_get, cache_key, cache_put, main


@pytest.fixture
def runner(tmp_path, monkeypatch):
    monkeypatch.setenv("WALLX_CACHE", str(tmp_path / "cache"))
    monkeypatch.chdir(tmp_path)
    return CliRunner()


def test_walls_table(runner):
    res = runner.invoke(main, ["walls", "--kmax", "3"])
    assert res.exit_code == 0
    lines = [l for l in res.output.splitlines() if l.strip()]
    assert len(lines) == 14
    assert any(l.startswith("Lmm:2") and "2*theta0 + 1*theta1" in l
               for l in lines)


def test_classify_command(runner, tmp_path):
    res = runner.invoke(main, ["classify", "--theta", "-1,1"])
    assert res.exit_code == 0
    assert "on_wall Linf-" in res.output
    out = tmp_path / "c.json"
    res = runner.invoke(main, ["classify", "--theta", "-17/20,1",
                               "--json", str(out)])
    doc = json.loads(out.read_text())
    assert doc["chamber"] == "Zt" and doc["t"] == "20/3"


def test_classify_usage_error(runner):
    res = runner.invoke(main, ["classify", "--theta", "banana"])
    assert res.exit_code == 2


def test_js_pass_and_outputs(runner, tmp_path):
    jpath, cpath = tmp_path / "r.json", tmp_path / "r.csv"
    res = runner.invoke(main, ["js", "--k", "2", "--dmax", "2",
                               "--json", str(jpath), "--csv", str(cpath)])
    assert res.exit_code == 0
    assert "PASS" in res.output
    doc = json.loads(jpath.read_text())
    assert doc["pass"] is True and doc["command"] == "js"
    assert "elapsed_ms" not in doc
    rows = list(csv.reader(cpath.open()))
    assert rows[0] == ["degree", "expression"]
    assert len(rows) == 1 + len(doc["degrees"])


def test_identity_failure_exit_code(runner):
    res = runner.invoke(main, [
        "wallcross", "--wall", "Lmm:2", "--i0", "IlP1:1", "--tmax", "1",
        "--sign-override", "plus:Lmm2,i0=IlP1:1,comp=1,0,0,0=-1",
    ])
    assert res.exit_code == 1
    assert "FAIL" in res.output


def test_wallcross_usage_errors(runner):
    assert runner.invoke(main, ["wallcross", "--wall", "Lpm:1",
                                "--i0", "OX"]).exit_code == 2
    assert runner.invoke(main, ["wallcross", "--wall", "Lmm:2",
                                "--i0", "bad"]).exit_code == 2
    assert runner.invoke(main, ["wallcross", "--wall", "Lmm:2",
                                "--i0", "OX", "--sign-override",
                                "x=0"]).exit_code == 2


def test_internal_error_exit_code(runner):
    res = runner.invoke(main, ["signsearch", "--k", "2", "--d", "2",
                               "--cap", "1"])
    assert res.exit_code == 3


def test_signsearch_finds_signs(runner):
    res = runner.invoke(main, ["signsearch", "--k", "2", "--d", "1"])
    assert res.exit_code == 0
    assert res.output.count("+1") == 2


def test_contribution_command(runner):
    res = runner.invoke(main, ["contribution", "--label",
                               "js:k=1,d=1,comp=1"])
    assert res.exit_code == 0
    assert "prod[ m^1 ; lam3^-1 ] * ( -1 ) / ( 1 )" in res.output


def test_series_command_csv(runner, tmp_path):
    cpath = tmp_path / "s.csv"
    res = runner.invoke(main, ["series", "--kind", "NC", "--qmax", "1",
                               "--tmax", "1", "--csv", str(cpath)])
    assert res.exit_code == 0
    rows = {r[0]: r[1] for r in list(csv.reader(cpath.open()))[1:]}
    assert rows["q^1*t^0"] == "prod[ m^1 ; lam3^-1 ] * ( 2 ) / ( 1 )"


def test_thread_count_invisible_in_json(runner, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    base = ["js", "--k", "1", "--dmax", "2", "--no-cache"]
    assert runner.invoke(main, base + ["--threads", "1",
                                       "--json", str(a)]).exit_code == 0
    assert runner.invoke(main, base + ["--threads", "8",
                                       "--json", str(b)]).exit_code == 0
    assert a.read_bytes() == b.read_bytes()


# ---------------------------------------------------------------------------
# cache


def test_cache_round_trip(runner, tmp_path, monkeypatch):
    key = cache_key("js", {"k": 1})
    assert cache_get(key) is None
    cache_put(key, b'{"x": 1}')
    assert cache_get(key) == b'{"x": 1}'


def test_cache_version_and_param_sensitivity():
    assert cache_key("js", {"k": 1}) != cache_key("js", {"k": 2})
    import wallx.cli as cli_mod
    old = cli_mod.__version__
    try:
        k1 = cache_key("js", {"k": 1})
        cli_mod.__version__ = old + ".post1"
        assert cache_key("js", {"k": 1}) != k1
    finally:
        cli_mod.__version__ = old


def test_cache_hit_reuses_bytes(runner, tmp_path):
    args = ["js", "--k", "1", "--dmax", "1", "--json"]
    assert runner.invoke(main, args + [str(tmp_path / "1.json")]).exit_code == 0
    cache_files = list((tmp_path / "cache").glob("*.json"))
    assert len(cache_files) == 1
    # poison the cached payload; the hit must be served verbatim
    doc = json.loads(cache_files[0].read_text())
    doc["params"]["k"] = 99
    cache_files[0].write_text(json.dumps(doc))
    res = runner.invoke(main, args + [str(tmp_path / "2.json")])
    assert res.exit_code == 0
    assert json.loads((tmp_path / "2.json").read_text())["params"]["k"] == 99


def test_cache_corruption_recomputes(runner, tmp_path):
    args = ["js", "--k", "1", "--dmax", "1"]
    assert runner.invoke(main, args).exit_code == 0
    cache_files = list((tmp_path / "cache").glob("*.json"))
    cache_files[0].write_text("{ not json")
    res = runner.invoke(main, args)
    assert res.exit_code == 0
    assert "corrupt cache entry" in res.output
    assert json.loads(cache_files[0].read_text())["command"] == "js"


def test_no_cache_leaves_no_directory(runner, tmp_path):
    res = runner.invoke(main, ["js", "--k", "1", "--dmax", "1", "--no-cache"])
    assert res.exit_code == 0
    assert not (tmp_path / "cache").exists()
