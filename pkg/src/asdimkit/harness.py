"""Recipe dispatch, certificate persistence and independent re-verification.

``run_recipe`` writes three files into the output directory:
``<name>.cert.json`` (the certificate), ``<name>.report.json`` (verdicts,
re-verification results and the recipe echo; no wall-clock data, so it is
byte-for-byte reproducible) and ``<name>.timings.json``.
"""

import hashlib
import os
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from . import experiments as E
from .bass_serre import enumerate_words, extended_bfs_norms, h_stratum, r_stabilizer, tree_ball
from .covers import ColoredFamilies, tree_cover
from .errors import AsdimError, BudgetExceeded, HypothesisFailure, SearchTimeout, ValidationError, VerificationFailure
from .groups import DEFAULT_CAP, cayley_ball
from .io import (SCHEMAS, certificate_doc, certificate_from_doc, check_schema, dumps, images_text, jsonable,
                 number, read_json, space_from_spec, write_json)
from .models import MODELS
from .search import scale_dim_refute, scale_dim_upper, verify_certificate
from .synthesis import action_context, theorem1_cover, verify_final_cover

OUT_ENV = "ASDIMKIT_OUT"

OPERATIONS = ("cover.search", "cover.refute", "cover.verify", "tree.cover", "synth.run",
              "experiment.sharpness", "experiment.hnn", "experiment.projection", "experiment.prism",
              "experiment.sweep", "experiment.strata", "experiment.roundtrip")

ERROR_VERDICTS = {BudgetExceeded: "budget-exceeded", SearchTimeout: "timeout",
                  HypothesisFailure: "hypothesis-failure", ValidationError: "validation-error"}


def default_out():
    return Path(os.environ.get(OUT_ENV, "asdimkit-out"))


def digest(doc):
    return hashlib.sha256(dumps(doc).encode()).hexdigest()[:16]


def split_timings(obj, path=""):
    """Remove every '*seconds' entry (recursively); return (clean, timings)."""
    timings = {}
    if isinstance(obj, dict):
        clean = {}
        for k, v in obj.items():
            key = f"{path}.{k}" if path else str(k)
            if str(k).endswith("seconds"):
                timings[key] = v
                continue
            c, t = split_timings(v, key)
            clean[k] = c
            timings.update(t)
        return clean, timings
    if isinstance(obj, list):
        out = []
        for i, v in enumerate(obj):
            c, t = split_timings(v, f"{path}[{i}]")
            out.append(c)
            timings.update(t)
        return out, timings
    return obj, timings


# ---------------------------------------------------------------- validation

def validate_recipe(recipe):
    if not isinstance(recipe, dict):
        raise ValidationError("recipe must be a mapping")
    if recipe.get("schema", SCHEMAS["recipe"]) != SCHEMAS["recipe"]:
        raise ValidationError(f"unexpected recipe schema {recipe.get('schema')}")
    for key in ("name", "operation"):
        if key not in recipe:
            raise ValidationError(f"recipe lacks {key!r}")
    op = recipe["operation"]
    if op not in OPERATIONS:
        raise ValidationError(f"unknown operation {op!r}")
    p = recipe.get("params", {})
    if op.startswith("cover."):
        if "space" not in recipe:
            raise ValidationError("cover operations need a space")
        d, B = number(p.get("d", 1)), number(p.get("B", 0))
        if d < 1:
            raise ValidationError("scale d must be at least 1")
        if B < 0:
            raise ValidationError("bound B must be nonnegative")
        if int(p.get("n", 0)) < 0:
            raise ValidationError("n must be nonnegative")
    if op == "synth.run":
        if recipe.get("model") not in MODELS:
            raise ValidationError(f"unknown model {recipe.get('model')!r}")
        if int(p.get("radius", -1)) < 0 or number(p.get("d", 0)) <= 0 or number(p.get("r", 0)) <= 0:
            raise ValidationError("synth.run needs radius >= 0, d > 0 and r > 0")
    if op == "tree.cover" and number(p.get("d", 0)) < 1:
        raise ValidationError("tree cover scale must be at least 1")
    return recipe


# ---------------------------------------------------------------- operations

def _space(recipe, cap):
    return space_from_spec(recipe["space"], base=recipe.get("_path"), cap=cap)


def _op_cover_search(recipe, p, ctx):
    space = _space(recipe, ctx["cap"])
    cert = scale_dim_upper(space, number(p["d"]), number(p["B"]), int(p["n"]),
                           strategy=p.get("strategy", "auto"), timeout=ctx["timeout"])
    return certificate_doc(cert, recipe["space"], __version__), cert.verdict


def _op_cover_refute(recipe, p, ctx):
    space = _space(recipe, ctx["cap"])
    cert = scale_dim_refute(space, number(p["d"]), number(p["B"]), int(p["n"]), timeout=ctx["timeout"])
    return certificate_doc(cert, recipe["space"], __version__), cert.verdict


def _op_cover_verify(recipe, p, ctx):
    space = _space(recipe, ctx["cap"])
    fams = p["families"]
    cf = ColoredFamilies(space, [[frozenset(s) for s in fam] for fam in fams], number(p["d"]), number(p["B"]))
    probs = cf.problems()
    doc = {"schema": SCHEMAS["certificate"], "kind": "colored-families", "space": recipe["space"],
           "space_hash": space.fingerprint(), "d": p["d"], "B": p["B"], "families": fams,
           "problems": probs}
    return doc, "valid" if not probs else "invalid"


def _op_tree_cover(recipe, p, ctx):
    tree = E.free_tree_space(int(p.get("rank", 2)), int(p["radius"]))
    cf = tree_cover(tree, number(p["d"]))
    fams = [[sorted(s) for s in fam] for fam in cf.families]
    spec = {"kind": "free-tree", "rank": int(p.get("rank", 2)), "radius": int(p["radius"])}
    doc = {"schema": SCHEMAS["certificate"], "kind": "colored-families", "space": spec,
           "space_hash": tree.space.fingerprint(), "d": cf.d, "B": cf.B, "families": fams,
           "problems": cf.problems()}
    return doc, "valid" if not doc["problems"] else "invalid"


def synthesis_doc(res, model, radius):
    ctx = res.ctx
    runs = []
    for run in res.interp_runs:
        data = run["data"]
        runs.append({"edge": list(run["edge"]), "side": run["side"], "checks": data.checks,
                     "details": data.details})
    pieces = [{"method": f.method, "sets": len(f.cover.sets), "lebesgue": f.lebesgue,
               "bound": f.bound, "multiplicity": f.multiplicity,
               "hash": digest([sorted(s) for s in f.cover.sets])} for f in res.piece_covers]
    edges = [{"edge": list(e), "method": c.method, "sets": len(c.cover.sets), "lebesgue": c.lebesgue,
              "bound": c.bound, "hash": digest([sorted(s) for s in c.cover.sets])}
             for e, c in res.edge_covers.items()]
    doc = {"schema": SCHEMAS["certificate"], "kind": "synthesis", "model": model, "radius": radius,
           "space_hash": ctx.space.fingerprint(), "points": ctx.space.n,
           "params": res.params, "orbit": res.orbit.summary(), "pieces": pieces,
           "edge_covers": edges, "interpolation": runs,
           "psi": {"checks": res.psi.checks, "details": res.psi.details},
           "complex": res.psi.complex.to_text(),
           "sets": [sorted(s) for s in res.cover.sets], "verdict": res.verdict,
           "diagnostics": res.diagnostics}
    doc["digest"] = digest({k: v for k, v in doc.items() if k != "psi"})
    return doc


def _op_synth_run(recipe, p, ctx):
    model = recipe["model"]
    radius = int(p["radius"])
    gog = MODELS[model]()
    actx = action_context(gog, radius, k=p.get("k"), cap=ctx["cap"])
    res = theorem1_cover(actx, number(p["d"]), int(p["r"]), separation=p.get("separation"),
                         overlap=p.get("overlap"), root=p.get("root", "base"),
                         strict=bool(p.get("strict", True)))
    doc = synthesis_doc(res, model, radius)
    ok = res.verdict["ok"] and all(r["checks"] and all(r["checks"].values()) for r in doc["interpolation"]) \
        and all(res.psi.checks.values())
    ctx["extra"] = {"images.txt": images_text(res.psi.images), "complex.txt": res.psi.complex.to_text()}
    ctx["timings"].update({f"synth.{k}": v for k, v in res.timings.items()})
    return doc, "verified" if ok else "failed"


def _op_experiment(recipe, p, ctx):
    op = recipe["operation"].split(".", 1)[1]
    seed = ctx["seed"] if ctx["seed"] is not None else p.get("seed", 0)
    if op == "sharpness":
        res = E.sharpness(int(p["radius"]), number(p["d"]), number(p["B"]),
                          timeout=ctx["timeout"] or 3600)
        res = {k: v for k, v in res.items() if k not in ("certificates", "space")}
    elif op == "hnn":
        res = hnn_example(int(p["radius"]), int(p["budget"]))
    elif op == "projection":
        res = E.projection_trials(per_case=int(p.get("per_case", 10)), seed=seed)
    elif op == "prism":
        res = E.prism_lipschitz_checks(kmax=int(p.get("kmax", 4)))
    elif op == "sweep":
        res = E.normal_form_sweep(budget=int(p.get("budget", 8)))
    elif op == "strata":
        res = E.strata_checks(model=p.get("model", "klein"), radii=tuple(p.get("radii", (2, 3))),
                              budget=int(p.get("budget", 12)))
    elif op == "roundtrip":
        res = E.round_trip_trials(count=int(p.get("count", 100)), seed=seed)
    else:
        raise ValidationError(f"unknown experiment {op}")
    res, timings = split_timings(jsonable(res))
    ctx["timings"].update(timings)
    doc = {"schema": SCHEMAS["certificate"], "kind": "experiment", "experiment": op,
           "params": p, "seed": seed, "result": res, "digest": digest(res)}
    return doc, "ok" if res["ok"] else "failed"


def hnn_example(radius, budget):
    gog = MODELS["hnn"]()
    tb = tree_ball(gog, radius)
    words = enumerate_words(gog, budget)
    ext = extended_bfs_norms(gog, budget)
    strata = {k: len(h_stratum(gog, k, budget, words)) for k in range(radius + 1)}
    stab = {R: len(r_stabilizer(gog, R, budget, words)) for R in range(radius + 1)}
    below = sum(1 for w, c in words.items() if w in ext and ext[w] < c)
    above = sum(1 for w, c in words.items() if w in ext and ext[w] > c)
    nb = tb.neighbours()
    degrees = sorted({len(nb[v]) for v in tb.vertices if tb.depth(v) < radius})
    return {"ok": tb.is_tree() and above == 0, "tree_vertices": len(tb.vertices), "degrees": degrees,
            "words": len(words), "strata": strata, "stabilizer_balls": stab,
            "f_norm_above_extended": above, "f_norm_strictly_below": below}


DISPATCH = {"cover.search": _op_cover_search, "cover.refute": _op_cover_refute,
            "cover.verify": _op_cover_verify, "tree.cover": _op_tree_cover,
            "synth.run": _op_synth_run}


# ---------------------------------------------------------------- verification

def verify_doc(doc, recheck=True, cap=DEFAULT_CAP, timeout=None, base=None):
    """Independently re-verify a certificate document; returns (ok, details)."""
    check_schema(doc, "certificate")
    kind = doc.get("kind")
    if kind == "scale-dimension":
        space = space_from_spec(doc["space"], base=base, cap=cap)
        cert = certificate_from_doc(doc, space)
        probs = verify_certificate(cert, space, recheck_refutation=recheck and cert.verdict == "refuted",
                                   timeout=timeout)
        if cert.digest != doc.get("digest"):
            probs.append("digest mismatch")
        return not probs and cert.verdict in ("upper", "refuted"), {"problems": probs, "verdict": cert.verdict}
    if kind == "colored-families":
        spec = doc["space"]
        if spec.get("kind") == "free-tree":
            space = E.free_tree_space(spec["rank"], spec["radius"]).space
        else:
            space = space_from_spec(spec, base=base, cap=cap)
        probs = []
        if space.fingerprint() != doc["space_hash"]:
            probs.append("space fingerprint mismatch")
        cf = ColoredFamilies(space, [[frozenset(s) for s in fam] for fam in doc["families"]],
                             number(doc["d"]), number(doc["B"]))
        probs += cf.problems()
        return not probs, {"problems": probs}
    if kind == "synthesis":
        gog = MODELS[doc["model"]]()
        ball = cayley_ball(gog.pi1_group(), int(doc["radius"]), cap=cap)
        probs = []
        if ball.space.fingerprint() != doc["space_hash"]:
            probs.append("space fingerprint mismatch")
        k = int(doc["params"]["k"])
        verdict = verify_final_cover(ball.space, doc["sets"], number(doc["params"]["d"]), k + 2)
        claimed = doc.get("verdict", {})
        # the certificate may record a failure; the check is that its claims are reproduced
        for key in ("ok", "covers", "multiplicity", "lebesgue", "bound"):
            if jsonable(verdict.get(key)) != claimed.get(key):
                probs.append(f"{key}: claimed {claimed.get(key)!r}, recomputed {jsonable(verdict.get(key))!r}")
        if claimed.get("ok"):
            for run in doc["interpolation"]:
                bad = [c for c, v in run["checks"].items() if not v]
                if bad:
                    probs.append(f"edge {run['edge']} side {run['side']}: {bad}")
        return not probs, {"problems": probs, "cover": verdict}
    if kind == "experiment":
        recipe = {"name": "verify", "operation": f"experiment.{doc['experiment']}", "params": doc["params"]}
        ctx = {"seed": doc.get("seed"), "timeout": timeout, "cap": cap, "timings": {}}
        again, verdict = _op_experiment(recipe, doc["params"], ctx)
        probs = []
        if again["digest"] != doc["digest"]:
            probs.append("rerun digest differs")
        if verdict != "ok":
            probs.append("rerun failed")
        return not probs, {"problems": probs}
    raise ValidationError(f"unknown certificate kind {kind!r}")


# ---------------------------------------------------------------- run

def run_recipe(recipe, out=None, seed=None, budget=None, timeout=None):
    """Dispatch, persist, re-verify and report.  Returns (exit_code, report)."""
    validate_recipe(recipe)
    out = Path(out) if out is not None else default_out()
    out.mkdir(parents=True, exist_ok=True)
    name = recipe["name"]
    cap = int(budget) if budget is not None else DEFAULT_CAP
    ctx = {"seed": seed, "timeout": timeout, "cap": cap, "timings": {}, "extra": {}}
    p = dict(recipe.get("params", {}))
    echo = {k: v for k, v in recipe.items() if not k.startswith("_")}
    report = {"schema": SCHEMAS["report"], "recipe": echo, "seed": seed, "budget": cap,
              "tool": __version__, "timings_file": f"{name}.timings.json"}
    t0 = time.monotonic()
    code = 0
    try:
        fn = DISPATCH.get(recipe["operation"], _op_experiment)
        doc, verdict = fn(recipe, p, ctx)
    except AsdimError as e:
        verdict = next((v for cls, v in ERROR_VERDICTS.items() if isinstance(e, cls)), "error")
        report.update({"verdict": verdict, "error": str(e), "certificate": None, "verified": False})
        report["expected"] = recipe.get("expect")
        report["matches_expectation"] = recipe.get("expect") == verdict
        write_json(out / f"{name}.report.json", report)
        write_json(out / f"{name}.timings.json", {"run": time.monotonic() - t0})
        return e.exit_code, report
    ctx["timings"]["run"] = time.monotonic() - t0
    cert_path = write_json(out / f"{name}.cert.json", doc)
    for fname, text in ctx["extra"].items():
        (out / f"{name}.{fname}").write_text(text)
    t1 = time.monotonic()
    ok, details = verify_doc(read_json(cert_path), cap=cap, timeout=timeout, base=recipe.get("_path"))
    ctx["timings"]["verify"] = time.monotonic() - t1
    report.update({"verdict": verdict, "certificate": cert_path.name, "verified": ok,
                   "verifier": details, "expected": recipe.get("expect")})
    report["matches_expectation"] = recipe.get("expect") in (None, verdict)
    write_json(out / f"{name}.report.json", report)
    write_json(out / f"{name}.timings.json", ctx["timings"])
    if not ok:
        code = VerificationFailure.exit_code
    elif not report["matches_expectation"] or verdict in ("failed", "invalid", "unknown"):
        code = 1
    return code, report


def verify_file(path, recheck=True, cap=DEFAULT_CAP, timeout=None):
    doc = read_json(path)
    return verify_doc(doc, recheck=recheck, cap=cap, timeout=timeout, base=path)
