import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from corpus import KIRBY_CORPUS
from gen import crossing_pair
from unisurf import dsl
from unisurf.cli import main
from unisurf.diagram import solve_labels, validate
from unisurf.perm import Permutation

T = Permutation.transposition


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], out, err)
    diags = [json.loads(x) for x in err.getvalue().splitlines()]
    return code, out.getvalue(), diags


@pytest.fixture
def kirby(tmp_path):
    def make(name):
        p = tmp_path / f"{name}.kirby"
        p.write_text(dsl.dump(dsl.kirby_doc(KIRBY_CORPUS[name])))
        return p

    return make


@pytest.fixture
def crossing(tmp_path):
    def make(a, b):
        pieces, bands, _ = crossing_pair(4, T(*a, 4), T(*b, 4))
        p = tmp_path / "x.diagram"
        p.write_text(dsl.dump(dsl.diagram_doc(solve_labels(4, pieces, bands))))
        return p

    return make


def test_pipeline_unknot_audit(kirby):
    code, out, diags = run("pipeline", kirby("unknot0"))
    assert code == 0 and diags == []
    stages = [x for x in out.splitlines() if x.startswith("stage")]
    assert len(stages) == 9
    # bands are attached after the first stage; from then on the cover is the 4-ball
    assert all(" chi 2 " in x for x in stages[1:])
    assert " chi 1 " in stages[0]


def test_move_crossing_change_names_labels(crossing):
    code, out, diags = run("move", "crossing_change", crossing((0, 1), (1, 2)), "--site", "Xc")
    assert code == 1 and out == ""
    (d,) = diags
    assert d["kind"] == "MoveError" and "(0 1)" in d["message"] and "(1 2)" in d["message"]


def test_move_emits_diagram_and_records(crossing, tmp_path):
    script = tmp_path / "m.script"
    code, out, diags = run("move", "crossing_change", crossing((0, 1), (2, 3)), "--site", "Xc", "--script", script)
    assert code == 0
    D = dsl.parse(out).body
    assert validate(D) == []
    assert [e.kind for e in D.band("X1").events] == ["under"]
    assert [d["message"].split()[0] for d in diags] == ["crossing_change"]
    assert [r.name for r in dsl.parse(script.read_text()).body] == ["crossing_change"]


def test_move_params_are_json(crossing):
    code, out, _ = run("move", "move3", crossing((0, 1), (1, 2)), "--site", "X1", "--param", "index=1")
    assert code == 0 and dsl.parse(out).body.degree == 5
    code, _, diags = run("move", "move3", crossing((0, 1), (1, 2)), "--site", "X1", "--param", "depth=1")
    assert code == 1 and "depth" in diags[0]["message"]
    code, _, diags = run("move", "move3", crossing((0, 1), (1, 2)), "--param", "index")
    assert code == 2 and diags[0]["kind"] == "usage"


@pytest.mark.parametrize("name", ["unknot0", "hopf", "handle-cancel"])
def test_replay_is_byte_identical(kirby, tmp_path, name):
    k = kirby(name)
    fin, script, start = tmp_path / "fin", tmp_path / "script", tmp_path / "start"
    assert run("pipeline", k, "--diagram", fin, "--script", script, "--start", start)[0] == 0
    code, out, _ = run("replay", start, script)
    assert code == 0 and out == fin.read_text()
    # the Kirby input stands for its special presentation
    assert run("replay", k, script)[1] == fin.read_text()


def test_pipeline_output_is_deterministic(kirby):
    assert run("pipeline", kirby("hopf"))[1] == run("pipeline", kirby("hopf"))[1]


def test_report_files(kirby, tmp_path):
    rep = tmp_path / "rep"
    assert run("pipeline", kirby("hopf"), "--report", rep)[0] == 0
    names = {p.name for p in rep.iterdir()}
    assert {"universal.txt", "audit.tsv", "summary.json", "audit.png", "grid.png", "grid.svg", "pipeline.script"} <= names
    assert (rep / "audit.png").read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"
    summary = json.loads((rep / "summary.json").read_text())
    assert summary["template_ok"] and summary["grid"] == [2, 3]
    rows = (rep / "audit.tsv").read_text().splitlines()
    assert rows[0].startswith("stage\t") and all(r.endswith("\t1") for r in rows[1:])


def test_syntax_error_exit_two(tmp_path):
    p = tmp_path / "bad.kirby"
    p.write_text('unisurf 1\nkirby { m = 0; components = [{strings=2, framing=0}]; braid = "q1"; }\n')
    code, out, diags = run("check", p)
    assert code == 2 and out == ""
    assert diags[0]["kind"] == "syntax" and (diags[0]["line"], diags[0]["column"]) == (2, 64)


def test_model_error_at_parse_exit_one(tmp_path):
    p = tmp_path / "bad.kirby"
    p.write_text('unisurf 1\nkirby { m = 0; components = [{strings=1, framing=0}]; braid = "s1"; }\n')
    code, _, diags = run("check", p)
    assert code == 1 and diags[0]["kind"] == "invalid"


def test_check_reports_validation_failures(tmp_path):
    p = tmp_path / "f.diagram"
    p.write_text("unisurf 1\ndiagram {\n  degree = 3;\n  piece F disk (0 1) fake;\n}\n")
    code, out, diags = run("check", p)
    assert code == 1 and "status 1 problem(s)" in out
    assert diags[0]["kind"] == "validation" and "fake" in diags[0]["message"]


def test_check_kirby_ok(kirby):
    code, out, _ = run("check", kirby("trefoil"), "--json")
    rep = json.loads(out)
    assert code == 0 and rep["problems"] == [] and rep["chi"] == 2 and rep["connected"]


def test_invariants(crossing):
    code, out, _ = run("invariants", crossing((0, 1), (1, 2)), "--json")
    inv = json.loads(out)
    assert code == 0
    assert inv["branching"] == {"Xa": [2, 1, 1], "Xb": [2, 1, 1]}
    text = run("invariants", crossing((0, 1), (1, 2)))[1]
    assert "branching Xa 2 1 1" in text


def test_wrong_document_kind(crossing):
    code, _, diags = run("pipeline", crossing((0, 1), (1, 2)))
    assert code == 2 and "expected kirby" in diags[0]["message"]


def test_missing_file(tmp_path):
    code, _, diags = run("check", tmp_path / "none")
    assert code == 2 and diags[0]["kind"] == "io"


def test_export_svg(kirby, tmp_path, crossing):
    a, b = tmp_path / "a.svg", tmp_path / "b.svg"
    assert run("export-svg", kirby("hopf"), "-o", a)[0] == 0
    assert run("export-svg", kirby("hopf"), "-o", b)[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert b"<svg" in a.read_bytes() and b"fake" in a.read_bytes()
    assert run("export-svg", crossing((0, 1), (1, 2)), "-o", a)[0] == 0
    assert run("export-svg", kirby("hopf"), "-o", tmp_path / "a.png")[0] == 2


def test_sample_seeded(tmp_path):
    one = run("sample", "--seed", 5)[1]
    assert one == run("sample", "--seed", 5)[1]
    assert one != run("sample", "--seed", 6)[1]
    assert validate(dsl.parse(one).body) == []
    code, out, _ = run("sample", "--seed", 1, "--count", 3, "-o", tmp_path / "c")
    assert code == 0 and len(list((tmp_path / "c").iterdir())) == 3


def test_usage_errors_are_json():
    code, _, diags = run("frobnicate")
    assert code == 2 and diags[0]["kind"] == "usage"


def test_module_entry_point(kirby):
    p = subprocess.run([sys.executable, "-m", "unisurf.cli", "check", str(kirby("unknot1"))], capture_output=True, text=True)
    assert p.returncode == 0 and "status ok" in p.stdout
