import io
import json
import subprocess
import sys

import pytest

from oreqe.cli import main


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def payload(text):
    """The JSON document that follows the human-readable summary lines."""
    return json.loads(text[text.index("{"):])


@pytest.fixture
def files(tmp_path):
    def write(name, text):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)

    return write


def test_upsilon_example():
    code, text = run("upsilon", "--p", "2", "--profile", "1,0", "--delta", "4")
    assert code == 0
    assert "mu = 3" in text and "witness index = 0" in text and "(ok)" in text


def test_upsilon_bad_prime():
    assert run("upsilon", "--p", "4", "--profile", "1,0", "--delta", "4")[0] == 1


def test_qe_with_trace_and_replay(files, tmp_path):
    f = files("f.lv", "E u . V[0](u*t - b1) & V[0](u*(t - T) - b2)\n")
    trace = tmp_path / "t.json"
    code, text = run("qe", "--mode", "torsion-free", "--formula", f, "--trace", str(trace))
    assert code == 0
    assert text.splitlines()[0] == "V[0](b1*(t + (T^2)) + b2*(t))"
    assert json.loads(trace.read_text())["schema"] == "oreqe.trace/1"
    code, text = run("qe", "--replay", str(trace))
    assert code == 0 and "replay: identical" in text


def test_qe_axiom_mode(files):
    f = files("f.lv", "E u . u*(t + 1) = y\n")
    ax = files("ax.txt", "# no nontrivial annihilators\n")
    code, text = run("qe", "--mode", f"axioms:{ax}", "--formula", f)
    assert code == 0 and "trivial" in text


def test_qe_errors(files):
    bad = files("bad.lv", "E u . u*t =\n")
    assert run("qe", "--formula", bad)[0] == 1
    assert run("qe", "--formula", bad, "--mode", "nonsense")[0] == 1
    assert run("qe")[0] == 1
    assert run("qe", "--formula", "/nonexistent/file")[0] == 1
    assert run("bogus-subcommand")[0] == 1


def test_factor_and_roots(files):
    q = files("q.txt", "t^2 + 1")
    code, text = run("factor", "--poly", q)
    data = payload(text)
    assert code == 0 and data["schema"] == "oreqe.output/1"
    assert text.splitlines()[0] == "(t + (1)) * (t + (1)) * ((1))"
    assert data["reaches_target"] and data["prefixes_in_I"]
    code, text = run("roots", "--poly", q)
    data = payload(text)
    assert code == 0 and data["complete"] and data["basis"] == ["1", "w"]


def test_divide(files):
    code, text = run("divide", "--poly", files("q.txt", "t - T"), "--rhs", files("n.txt", "T^2"))
    assert code == 0
    assert payload(text)["witness"] == "w*T"


def test_value_sets(files):
    q = files("q.txt", "t*T - 1")
    code, text = run("ann", "--poly", q)
    assert code == 0 and payload(text)["values"] == ["-1"]
    code, text = run("divvals", "--poly", q, "--delta", "0")
    assert code == 0 and payload(text)["values"] == ["-1", "0"]


def test_check(files):
    f = files("f.lv", "E u . V[0](u*t - y)")
    code, text = run("check", "--formula", f, "--against", files("g.lv", "true"), "--samples", "10")
    assert code == 0 and json.loads(text)["disagreements"] == []
    f = files("h.lv", "E u . u = y1 & V[3](u - y2)")
    assert run("check", "--formula", f, "--against", files("k.lv", "true"), "--samples", "30")[0] == 2


def test_config_file(files, monkeypatch):
    cfg = files("cfg.json", json.dumps({"field": "3", "lattice": "full"}))
    monkeypatch.setenv("ORE_QE_CONFIG", cfg)
    code, text = run("ann", "--poly", files("q.txt", "t - 1"))
    assert code == 0 and payload(text)["values"] == ["0"]
    monkeypatch.setenv("ORE_QE_CONFIG", files("broken.json", "{"))
    assert run("ann", "--poly", files("q2.txt", "t - 1"))[0] == 1


def test_selftest_small():
    code, text = run("selftest", "--samples", "2", "--axiom-samples", "20")
    assert code == 0
    assert text.splitlines()[-1] == "selftest: pass"


def test_report(tmp_path):
    code, text = run("report", "--samples", "2", "--out", str(tmp_path / "rep"))
    assert code == 0
    csv_text = (tmp_path / "rep" / "corpus_report.csv").read_text()
    assert csv_text.startswith("index,line,ring,formula")
    assert (tmp_path / "rep" / "corpus_report.png").stat().st_size > 1000


def test_console_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "oreqe.cli", "upsilon", "--p", "3", "--profile", "0,0", "--delta=-1"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0 and "mu = -1/3" in proc.stdout
