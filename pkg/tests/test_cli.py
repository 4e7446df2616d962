import json

import pytest

from asdimkit.cli import format_word, main, parse_space
from asdimkit.errors import ParseError
from asdimkit.models import klein_model


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_list_recipes(capsys):
    code, out, _ = run(capsys, "list-recipes")
    assert code == 0
    assert len(out.strip().splitlines()) >= 10
    assert "klein-pipeline" in out


def test_run_uses_environment_output(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("ASDIMKIT_OUT", str(tmp_path))
    code, out, _ = run(capsys, "run", "z-upper")
    assert code == 0 and out.startswith("z-upper: upper (re-verified)")
    cert = tmp_path / "z-upper.cert.json"
    assert cert.exists()
    code, out, _ = run(capsys, "verify", str(cert))
    assert code == 0 and json.loads(out)["ok"]


def test_exit_codes(capsys, tmp_path):
    out = ["--out", str(tmp_path)]
    # validation
    code, _, err = run(capsys, "cover", "search", "--space", "segment:0:10", "-d", "3", "-B", "-1",
                       "-n", "1", *out)
    assert code == 2 and "ValidationError" in err
    # budget
    code, _, _ = run(capsys, "run", "f2-pipeline-r30", *out)
    assert code == 3
    # parse
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    code, _, err = run(capsys, "verify", str(bad))
    assert code == 10 and "ParseError" in err
    # usage
    with pytest.raises(SystemExit) as e:
        main(["cover", "search"])
    assert e.value.code == 64
    with pytest.raises(SystemExit) as e:
        main(["frobnicate"])
    assert e.value.code == 64


def test_unknown_recipe(capsys):
    code, _, err = run(capsys, "run", "no-such-recipe")
    assert code == 2 and "no bundled recipe" in err


def test_cover_verify_file(capsys, tmp_path):
    doc = {"schema": "asdimkit.cover/1", "sets": [list(range(0, 8)), list(range(5, 11))]}
    f = tmp_path / "cov.json"
    f.write_text(json.dumps(doc))
    code, out, _ = run(capsys, "cover", "verify", str(f), "--space", "segment:0:10")
    assert code == 0 and json.loads(out)["lebesgue"] == 2
    code, _, _ = run(capsys, "cover", "verify", str(f), "--space", "segment:0:10", "-d", "2")
    assert code == 5


def test_gog_reduce(capsys):
    code, out, _ = run(capsys, "gog", "reduce", "--model", "klein", "P", "1", "y", "4", "Y")
    res = json.loads(out)
    assert code == 0
    assert res["reduced"] == "P: [5]" and res["path_length"] == 0 and res["f_norm"] == 5


def test_gog_ball_and_strata(capsys):
    code, out, _ = run(capsys, "gog", "ball", "--model", "hnn", "--radius", "2")
    assert code == 0
    assert json.loads(out)["depths"] == {"0": 1, "1": 3, "2": 6}
    code, out, _ = run(capsys, "gog", "strata", "--model", "hnn", "--kmax", "3", "--word-budget", "6")
    assert code == 0
    assert json.loads(out) == {"0": 13, "1": 42, "2": 70, "3": 102}


def test_synth_run_and_verify(capsys, tmp_path):
    code, out, _ = run(capsys, "synth", "run", "--model", "free2", "--radius", "5", "-d", "4",
                       "-r", "2", "--out", str(tmp_path))
    res = json.loads(out)
    assert code == 0 and res["verdict"] == "verified" and res["verified"]
    code, out, _ = run(capsys, "synth", "verify", str(tmp_path / res["certificate"]))
    assert code == 0


def test_parse_space_forms(tmp_path):
    X, spec = parse_space("segment:-3:3")
    assert X.n == 7 and spec["kind"] == "segment"
    assert parse_space("lattice:2:1")[0].n == 5
    assert parse_space('{"kind": "segment", "lo": 0, "hi": 4}')[0].n == 5
    assert parse_space("group:free2:1")[0].n == 5
    with pytest.raises(ParseError):
        parse_space("torus:3")
    with pytest.raises(ParseError):
        parse_space("segment:a:b")


def test_format_word():
    g = klein_model()
    assert format_word(g, g.word("P", 1, "y", 0, "Y", 2)) == "P: [1] y [0] Y [2]"
