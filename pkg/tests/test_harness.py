import json

import pytest

from asdimkit.errors import ValidationError
from asdimkit.harness import run_recipe, split_timings, validate_recipe, verify_file
from asdimkit.io import read_json, write_json
from asdimkit.recipes import bundled_recipes, get_recipe, recipe_names


def segment_recipe(**params):
    p = {"d": 4, "B": 8, "n": 1}
    p.update(params)
    return {"name": "seg", "operation": "cover.search", "params": p,
            "space": {"kind": "segment", "lo": -20, "hi": 20}}


def test_bundled_recipes_validate():
    names = recipe_names()
    assert len(names) == len(set(names)) >= 10
    for r in bundled_recipes():
        assert validate_recipe(r) is r


@pytest.mark.parametrize("bad", [
    {"B": -1}, {"d": 0}, {"n": -2},
])
def test_bad_parameters_rejected(bad, tmp_path):
    with pytest.raises(ValidationError):
        run_recipe(segment_recipe(**bad), out=tmp_path)


def test_recipe_shape_errors():
    with pytest.raises(ValidationError):
        validate_recipe([])
    with pytest.raises(ValidationError):
        validate_recipe({"name": "x", "operation": "cover.paint"})
    with pytest.raises(ValidationError):
        validate_recipe({"name": "x", "operation": "cover.search", "params": {}})
    with pytest.raises(ValidationError):
        validate_recipe({"name": "x", "operation": "synth.run", "model": "torus"})


@pytest.mark.parametrize("name,verdict", [
    ("z-upper", "upper"), ("z-refute", "refuted"), ("cover-verify-witness", "valid"),
    ("f2-tree-cover", "valid"), ("hnn-example", "ok"), ("prism-lipschitz", "ok"),
])
def test_small_recipes(name, verdict, tmp_path):
    code, report = run_recipe(get_recipe(name), out=tmp_path)
    assert code == 0
    assert report["verdict"] == verdict and report["verified"]
    assert report["matches_expectation"]
    for suffix in ("cert", "report", "timings"):
        assert (tmp_path / f"{name}.{suffix}.json").exists()


def test_reports_are_byte_reproducible(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        run_recipe(get_recipe("z-refute"), out=out)
    for suffix in ("cert", "report"):
        assert (a / f"z-refute.{suffix}.json").read_bytes() == (b / f"z-refute.{suffix}.json").read_bytes()
    report = read_json(a / "z-refute.report.json")
    assert "seconds" not in json.dumps(report)


def test_verify_detects_tampering(tmp_path):
    run_recipe(get_recipe("z-upper"), out=tmp_path)
    path = tmp_path / "z-upper.cert.json"
    ok, _ = verify_file(path)
    assert ok
    doc = read_json(path)
    doc["witness"][0] = doc["witness"][0][1:]
    bad = write_json(tmp_path / "tampered.cert.json", doc)
    ok, details = verify_file(bad)
    assert not ok and details["problems"]


def test_synthesis_failure_is_reproduced(tmp_path):
    code, report = run_recipe(get_recipe("f2-pipeline-split"), out=tmp_path)
    # a recorded failure that the verifier reproduces
    assert report["verdict"] == "failed" and report["verified"]
    assert report["matches_expectation"] and code == 1
    doc = read_json(tmp_path / "f2-pipeline-split.cert.json")
    doc["verdict"]["ok"] = True
    bad = write_json(tmp_path / "lie.cert.json", doc)
    ok, details = verify_file(bad)
    assert not ok and any(p.startswith("ok:") for p in details["problems"])


def test_budget_exceeded_is_reported(tmp_path):
    code, report = run_recipe(get_recipe("f2-pipeline-r30"), out=tmp_path)
    assert code == 3
    assert report["verdict"] == "budget-exceeded" and report["matches_expectation"]
    assert (tmp_path / "f2-pipeline-r30.report.json").exists()


def test_split_timings():
    clean, t = split_timings({"a": 1, "run_seconds": 2.5, "inner": [{"x_seconds": 1, "y": 2}]})
    assert clean == {"a": 1, "inner": [{"y": 2}]}
    assert t == {"run_seconds": 2.5, "inner[0].x_seconds": 1}


def test_recipe_file_paths_resolve(tmp_path):
    from asdimkit.io import ball_text
    from asdimkit.metric import line_space
    recipe = segment_recipe()
    recipe["space"] = {"kind": "file", "path": "ball.txt"}
    (tmp_path / "ball.txt").write_text(ball_text(line_space(0, 30)))
    recipe["_path"] = str(tmp_path / "recipe.json")
    code, report = run_recipe(recipe, out=tmp_path / "out")
    assert code == 0 and report["verified"]
    assert "_path" not in report["recipe"]
