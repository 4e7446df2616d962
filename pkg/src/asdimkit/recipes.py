"""Bundled experiment recipes.

A recipe names an operation, the space or model it runs on, parameters and
(optionally) the verdict it is expected to produce.
"""

from .io import SCHEMAS


def _r(name, operation, params, expect=None, space=None, model=None, about=""):
    out = {"schema": SCHEMAS["recipe"], "name": name, "operation": operation,
           "params": params, "about": about}
    if space is not None:
        out["space"] = space
    if model is not None:
        out["model"] = model
    if expect is not None:
        out["expect"] = expect
    return out


def bundled_recipes():
    return [
        _r("z-upper", "cover.search", {"d": 4, "B": 8, "n": 1},
           expect="upper", space={"kind": "segment", "lo": -40, "hi": 40},
           about="two families of intervals cover a segment of Z"),
        _r("z-refute", "cover.refute", {"d": 3, "B": 5, "n": 0},
           expect="refuted", space={"kind": "segment", "lo": -12, "hi": 12},
           about="one family cannot cover a segment at scale 3 with bound 5"),
        _r("z2-upper", "cover.search", {"d": 3, "B": 6, "n": 2, "strategy": "bricks"},
           expect="upper", space={"kind": "lattice", "rank": 2, "radius": 4},
           about="three brick families cover a Z^2 ball"),
        _r("z2-refute", "cover.refute", {"d": 3, "B": 6, "n": 1},
           expect="refuted", space={"kind": "lattice", "rank": 2, "radius": 4},
           about="two families are impossible on the same Z^2 ball"),
        _r("klein-sharpness", "experiment.sharpness", {"radius": 4, "d": 3, "B": 6},
           expect="ok", about="refuted(1) and upper(2) on one Z^2 ball: the amalgam bound is sharp at this scale"),
        _r("f2-tree-cover", "tree.cover", {"rank": 2, "radius": 6, "d": 4},
           expect="valid", about="two d-disjoint families on the Cayley tree of F2"),
        _r("f2-pipeline", "synth.run", {"radius": 6, "d": 4, "r": 2},
           expect="verified", model="free2",
           about="full pipeline on an F2 ball small enough to enumerate (one orbit piece)"),
        _r("f2-pipeline-split", "synth.run", {"radius": 6, "d": 4, "r": 5, "separation": 12,
                                              "root": "extreme", "strict": False},
           expect="failed", model="free2",
           about="two orbit pieces on the same ball: transitions too short for L > 4"),
        _r("f2-pipeline-r30", "synth.run", {"radius": 30, "d": 4, "r": 1},
           expect="budget-exceeded", model="free2",
           about="the radius 30 F2 ball has about 4e14 elements"),
        _r("klein-pipeline", "synth.run", {"radius": 30, "d": 3, "r": 14, "separation": 31,
                                           "root": "extreme", "strict": False},
           expect="verified", model="klein",
           about="full pipeline on the Z *_2Z Z ball of radius 30"),
        _r("klein-pipeline-strict", "synth.run", {"radius": 30, "d": 3, "r": 14},
           expect="verified", model="klein",
           about="same ball with the conservative separation rule (one orbit piece)"),
        _r("hnn-example", "experiment.hnn", {"radius": 3, "budget": 6},
           expect="ok", about="tree ball, strata and norms for the HNN extension of Z by doubling"),
        _r("projection-lipschitz", "experiment.projection", {"per_case": 10, "seed": 0},
           expect="ok", about="canonical projections of covers with L > nu are eps-Lipschitz"),
        _r("prism-lipschitz", "experiment.prism", {"kmax": 4},
           expect="ok", about="prism uniformization constants, exact against sampled"),
        _r("normal-form-sweep", "experiment.sweep", {"budget": 8},
           expect="ok", about="reduced path length against realized tree displacement"),
        _r("strata-z2-amalgam", "experiment.strata", {"model": "z2-amalgam", "radii": [1], "budget": 6},
           expect="ok", about="stratum pieces minus Y_r are more than 2r apart"),
        _r("strata-klein", "experiment.strata", {"model": "klein", "radii": [2, 3], "budget": 12},
           expect="ok", about="same check on the Klein model (vacuous: every piece lies in Y_r)"),
        _r("round-trip", "experiment.roundtrip", {"count": 100, "seed": 0},
           expect="ok", about="colored families to covers and back"),
        _r("cover-verify-witness", "cover.verify",
           {"d": 3, "B": 4, "families": [[[0, 1, 2, 3, 4], [8, 9, 10, 11, 12]], [[5, 6, 7]]]},
           expect="valid", space={"kind": "segment", "lo": 0, "hi": 12},
           about="a hand-written witness on a segment"),
    ]


def recipe_names():
    return [r["name"] for r in bundled_recipes()]


def get_recipe(name):
    for r in bundled_recipes():
        if r["name"] == name:
            return r
    return None
