import io
import json
import os
import shutil
import subprocess
import sys

import pytest

from hyperdepth.cli import main
from hyperdepth.repro import data_path


def run(*argv, env=None):
    out, err = io.StringIO(), io.StringIO()
    old = dict(os.environ)
    if env:
        os.environ.update(env)
    try:
        code = main(list(argv), stdout=out, stderr=err)
    finally:
        os.environ.clear()
        os.environ.update(old)
    return code, out.getvalue(), err.getvalue()


def data_lines(text):
    return [line for line in text.splitlines() if not line.startswith("#")]


def test_depth_shd_prints_value_and_witness(tmp_path):
    wit = tmp_path / "g.ef"
    code, out, _ = run("depth", "--mode", "shd", data_path("G.hg"), "--witness", str(wit))
    assert code == 0
    lines = data_lines(out)
    assert lines[0] == "2"
    assert all(line.startswith("N ") for line in lines[1:])
    code, out, _ = run("depth", "--mode", "shd", data_path("G.hg"), "--validate", str(wit))
    assert code == 0 and "valid (height 2)" in out


def test_depth_validate_reports_failures():
    code, out, _ = run("depth", "--mode", "shd", data_path("H.hg"), "--validate", data_path("H-strict.ef"))
    assert code == 3
    assert "invalid" in out and "shared-heritage" in out


def test_config_is_echoed():
    _, out, _ = run("depth", data_path("G.hg"))
    head = out.splitlines()[0]
    assert head.startswith("# ") and "mode=hd" in head and "verb=depth" in head


def test_indist_equal_and_distinguished():
    args = ["--k", "1", "--maxE", "3", "--maxV", "6", data_path("skew_G1.hg"), data_path("skew_H1.hg")]
    code, out, _ = run("indist", "--class", "SHD", *args)
    assert code == 0 and "equal up to bounds" in out and "maxE=3, maxV=6" in out
    code, out, _ = run("indist", "--class", "HD", *args)
    assert code == 3 and "distinguished" in out


def test_hom_and_homvec_tsv():
    code, out, _ = run("hom", data_path("G.hg"), data_path("G.hg"))
    assert code == 0 and data_lines(out) == ["6"]
    code, out, _ = run("hom", "--semantics", "incidence", data_path("G.hg"), data_path("G.hg"))
    assert data_lines(out) == ["723"]
    code, out, _ = run("--format", "tsv", "homvec", "--class", "SHD", "--k", "1", "--maxE", "2",
                       "--maxV", "3", data_path("G.hg"))
    rows = data_lines(out)
    assert code == 0 and rows[0] == "source\tcount" and all(len(r.split("\t")) == 2 for r in rows)


def test_json_schema():
    code, out, _ = run("--format", "json", "depth", "--mode", "shd", data_path("G.hg"))
    doc = json.loads(out)
    assert doc["schema"] == "hyperdepth/1" and doc["verb"] == "depth"
    assert doc["config"]["mode"] == "shd" and doc["records"][0]["depth"] == 2
    assert doc["records"][0]["forest"].startswith("N ")


def test_gli_replay_and_build():
    code, out, _ = run("gli", "replay", data_path("p7_derivation.gli"))
    assert code == 0 and "in GLI_3^3" in out
    code, out, _ = run("gli", "build", data_path("P15.hg"), "--ef", data_path("P15-strict.ef"))
    assert code == 0 and "label-free=True, cost 4" in out


def test_gck_check_and_eval():
    phi = data_path("phi_G.gcl")
    code, out, _ = run("gck", "check", "--k", "1", "--formula", phi)
    assert code == 0 and "well-formed in GC^1: True" in out and "guard depth: 2" in out
    code, out, _ = run("gck", "eval", "--k", "1", "--formula", phi, "--model", data_path("G.hg"))
    assert code == 0 and data_lines(out) == ["true"]
    code, out, _ = run("gck", "eval", "--k", "1", "--formula", phi, "--model", data_path("H.hg"))
    assert data_lines(out) == ["false"]
    code, _, err = run("gck", "check", "--k", "0", "--formula", phi)
    assert code == 3


def test_gck_eval_with_assignment(tmp_path):
    f = tmp_path / "atom.gcl"
    f.write_text("E(e1,v1)\n")
    code, out, _ = run("gck", "eval", "--k", "1", "--formula", str(f), "--model", data_path("G.hg"),
                       "--nu-v", "1=a", "--nu-e", "1=i")
    assert code == 0 and data_lines(out) == ["true"]
    code, _, err = run("gck", "eval", "--k", "1", "--formula", str(f), "--model", data_path("G.hg"),
                       "--nu-v", "1=a")
    assert code == 2 and "e1" in err


def test_families(tmp_path):
    a, b = tmp_path / "a.hg", tmp_path / "b.hg"
    code, _, _ = run("families", "emit", "--name", "skew", "--k", "2", "--out", str(a), str(b))
    assert code == 0 and a.read_text().startswith("V ")
    code, out, _ = run("families", "enumerate", "--maxE", "2", "--maxV", "3", "--connected")
    assert code == 0 and "10 hypergraphs" in out
    code, _, err = run("families", "emit", "--name", "nope", "--k", "1")
    assert code == 2


def test_repro_rows_and_list():
    code, out, _ = run("repro", "--check", "hd-paths")
    rows = [line for line in data_lines(out) if line.startswith(("pass", "FAIL"))]
    assert code == 0 and len(rows) == 15 and all(r.startswith("pass") for r in rows)
    code, out, _ = run("repro", "--list")
    assert "surjective-paths" in out
    code, _, err = run("repro", "--check", "nope")
    assert code == 2


def test_repro_failing_check_exits_3():
    code, out, _ = run("repro", "--check", "worked-examples")
    assert code == 3 and "FAIL" in out


@pytest.mark.parametrize("argv", [
    ["bogus"], ["depth"], ["depth", "--mode", "xx", "G.hg"], ["depth", "/no/such/file.hg"],
    ["gck", "eval", "--k", "1", "--formula", "x.gcl"], ["families", "emit"],
])
def test_usage_errors_exit_2(argv):
    code, _, err = run(*argv)
    assert code == 2 and err


def test_malformed_input_exit_2(tmp_path):
    bad = tmp_path / "bad.hg"
    bad.write_text("E e x y\n")
    code, _, err = run("depth", str(bad))
    assert code == 2 and "line 1" in err


def test_budget_exceeded_exit_4():
    code, _, err = run("indist", "--class", "HD", "--k", "2", "--maxE", "4", "--maxV", "6",
                       data_path("G.hg"), data_path("H.hg"), env={"GH_BUDGET_MS": "30"})
    assert code == 4 and "budget" in err


def test_outputs_are_byte_identical():
    argv = ["--format", "json", "homvec", "--class", "HD", "--k", "1", "--maxE", "2", "--maxV", "4",
            data_path("skew_G1.hg")]
    assert run(*argv)[1] == run(*argv)[1]
    argv = ["repro", "--check", "skew-k1"]
    assert run(*argv)[1] == run(*argv)[1]


@pytest.mark.skipif(shutil.which("hyperdepth") is None, reason="console script not installed")
def test_console_script():
    out = subprocess.run(["hyperdepth", "depth", "--mode", "shd", data_path("G.hg")],
                         capture_output=True, text=True)
    assert out.returncode == 0 and data_lines(out.stdout)[0] == "2"
    out = subprocess.run([sys.executable, "-m", "hyperdepth.cli", "--version"], capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip()
