"""Command-line front end.

Top-level verbs: ``run``, ``verify``, ``list-recipes``, ``export-dot``, plus
per-module groups (``groups``, ``cover``, ``simp``, ``gog``, ``synth``).
Every AsdimError subclass maps to its own exit code; argparse usage errors
exit with 64.
"""

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .errors import AsdimError, ParseError, ValidationError
from .groups import DEFAULT_CAP, cayley_ball
from .harness import OUT_ENV, default_out, run_recipe, verify_file
from .io import (SCHEMAS, ball_text, complex_from_text, cover_doc, families_doc, group_from_spec,
                 jsonable, load_gog, number, read_families, read_json, space_from_spec, write_json)
from .recipes import bundled_recipes, get_recipe

USAGE_EXIT = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(USAGE_EXIT)


def _emit(obj, args=None):
    if isinstance(obj, str):
        sys.stdout.write(obj if obj.endswith("\n") else obj + "\n")
    else:
        sys.stdout.write(json.dumps(jsonable(obj), sort_keys=True, indent=1) + "\n")


# ---------------------------------------------------------------- argument helpers

def parse_space(text, cap=DEFAULT_CAP):
    """Space from a file (JSON spec or ball text), inline JSON, or shorthand.

    Shorthand: ``segment:LO:HI``, ``lattice:RANK:RADIUS``, ``group:MODEL:RADIUS``.
    """
    p = Path(text)
    if p.exists():
        if p.suffix == ".json":
            return space_from_spec(read_json(p), base=p, cap=cap), read_json(p)
        spec = {"kind": "file", "path": str(p.resolve())}
        return space_from_spec(spec, cap=cap), spec
    if text.lstrip().startswith("{"):
        try:
            spec = json.loads(text)
        except json.JSONDecodeError as e:
            raise ParseError(f"bad space JSON: {e}") from e
        return space_from_spec(spec, cap=cap), spec
    parts = text.split(":")
    try:
        if parts[0] == "segment" and len(parts) == 3:
            spec = {"kind": "segment", "lo": int(parts[1]), "hi": int(parts[2])}
        elif parts[0] == "lattice" and len(parts) == 3:
            spec = {"kind": "lattice", "rank": int(parts[1]), "radius": int(parts[2])}
        elif parts[0] == "group" and len(parts) == 3:
            spec = {"kind": "group", "group": parts[1], "radius": int(parts[2])}
        else:
            raise ParseError(f"cannot parse space {text!r}")
    except ValueError as e:
        raise ParseError(f"cannot parse space {text!r}") from e
    return space_from_spec(spec, cap=cap), spec


def _token(t):
    try:
        return json.loads(t)
    except json.JSONDecodeError:
        return t


def format_word(gog, w):
    parts = [f"{w.start}:"]
    for i, c in enumerate(w.coeffs):
        parts.append(json.dumps(jsonable(c)))
        if i < len(w.edges):
            parts.append(w.edges[i])
    return " ".join(parts)


def _out_dir(args):
    return Path(args.out) if args.out else default_out()


# ---------------------------------------------------------------- top-level verbs

def cmd_run(args):
    worst = 0
    names = [r["name"] for r in bundled_recipes()] if args.recipe == ["all"] else args.recipe
    for item in names:
        recipe = get_recipe(item)
        if recipe is None:
            path = Path(item)
            if not path.exists():
                raise ValidationError(f"no bundled recipe or file named {item!r}")
            recipe = read_json(path, "recipe")
            recipe["_path"] = str(path)
        code, report = run_recipe(recipe, out=_out_dir(args), seed=args.seed, budget=args.budget,
                                  timeout=args.timeout)
        line = f"{recipe['name']}: {report['verdict']}"
        if report.get("verified"):
            line += " (re-verified)"
        if report.get("error"):
            line += f" [{report['error']}]"
        print(line)
        worst = worst or code
    return worst


def cmd_verify(args):
    ok, details = verify_file(args.certificate, recheck=not args.no_recheck,
                              cap=args.budget or DEFAULT_CAP, timeout=args.timeout)
    _emit({"ok": ok, **details})
    return 0 if ok else 9


def cmd_list(args):
    for r in bundled_recipes():
        exp = r.get("expect", "-")
        print(f"{r['name']:24s} {r['operation']:22s} expect={exp:16s} {r.get('about', '')}")
    return 0


def cmd_export_dot(args):
    from .simplicial import to_dot
    if args.kind == "tree":
        from .bass_serre import tree_ball
        gog = load_gog(args.source)
        tb = tree_ball(gog, args.radius, budget=args.word_budget, cap=args.budget or DEFAULT_CAP)
        _emit(tb.to_dot(gog.name or "tree"))
    elif args.kind == "complex":
        K = complex_from_text(_read_text(args.source))
        _emit(to_dot(K))
    else:  # nerve of a cover file over a space
        from .simplicial import nerve
        space, _ = parse_space(args.space)
        cov = _read_cover(args.source, space)
        _emit(to_dot(nerve(cov), "nerve"))
    return 0


def _read_text(path):
    try:
        return Path(path).read_text()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}") from e


def _read_cover(path, space):
    from .covers import Cover, ColoredFamilies
    obj = read_families(read_json(path), space)
    if isinstance(obj, ColoredFamilies):
        return Cover(space, obj.all_sets())
    return obj


# ---------------------------------------------------------------- groups

def cmd_groups_ball(args):
    spec = _token(args.group)
    G = group_from_spec(spec)
    ball = cayley_ball(G, args.radius, cap=args.budget or DEFAULT_CAP)
    text = ball_text(ball.space)
    if args.write:
        Path(args.write).write_text(text)
        print(f"{ball.space.n} points written to {args.write}")
    else:
        _emit(text)
    return 0


# ---------------------------------------------------------------- covers

def cmd_cover_verify(args):
    from .covers import ColoredFamilies
    space, _ = parse_space(args.space)
    doc = read_json(args.file)
    if doc.get("schema") == SCHEMAS["certificate"]:
        ok, details = verify_file(args.file)
        _emit({"ok": ok, **details})
        return 0 if ok else 9
    obj = read_families(doc, space)
    if isinstance(obj, ColoredFamilies):
        if args.d is not None:
            obj.d = number(args.d)
        if args.B is not None:
            obj.B = number(args.B)
        probs = obj.problems()
        _emit({"ok": not probs, "problems": probs, "families": len(obj.families), "bound": obj.bound})
        return 0 if not probs else 5
    summary = obj.summary()
    ok = summary["covers"]
    if args.d is not None:
        ok = ok and summary["lebesgue"] > number(args.d)
    _emit({"ok": ok, **summary})
    return 0 if ok else 5


def _cover_recipe(args, operation):
    _, spec = parse_space(args.space)
    params = {"d": args.d, "B": args.B, "n": args.n}
    if operation == "cover.search":
        params["strategy"] = args.strategy
    name = args.name or f"{operation.replace('.', '-')}"
    return {"schema": SCHEMAS["recipe"], "name": name, "operation": operation,
            "space": spec, "params": params}


def cmd_cover_search(args):
    return _run_one(args, _cover_recipe(args, "cover.search"))


def cmd_cover_refute(args):
    return _run_one(args, _cover_recipe(args, "cover.refute"))


def _run_one(args, recipe):
    code, report = run_recipe(recipe, out=_out_dir(args), seed=args.seed, budget=args.budget,
                              timeout=args.timeout)
    _emit({k: report.get(k) for k in ("verdict", "verified", "certificate", "error") if k in report})
    return code


def cmd_cover_convert(args):
    from fractions import Fraction
    from .covers import ColoredFamilies, colored_to_cover, cover_to_colored
    space, spec = parse_space(args.space)
    obj = read_families(read_json(args.file), space)
    if isinstance(obj, ColoredFamilies):
        doc = cover_doc(colored_to_cover(obj), spec)
    else:
        d = number(args.d) if args.d is not None else Fraction(obj.lebesgue) / 3
        doc = families_doc(cover_to_colored(obj, d, n=args.n), spec)
    if args.write:
        write_json(args.write, doc)
    else:
        _emit(doc)
    return 0


# ---------------------------------------------------------------- simplicial

def cmd_simp_nerve(args):
    from .simplicial import nerve, to_dot
    space, _ = parse_space(args.space)
    K = nerve(_read_cover(args.file, space))
    _emit(to_dot(K, "nerve") if args.dot else K.to_text())
    return 0


def cmd_simp_cylinder(args):
    from .simplicial import SimplicialMap, mapping_cylinder, to_dot
    X = complex_from_text(_read_text(args.domain))
    Y = complex_from_text(_read_text(args.codomain))
    raw = read_json(args.map)
    vmap = {}
    for k, v in raw.items():
        vmap[_token(k)] = tuple(v) if isinstance(v, list) else v
    cyl = mapping_cylinder(SimplicialMap(X, Y, vmap))
    _emit(to_dot(cyl.complex, "cylinder") if args.dot else cyl.complex.to_text())
    return 0


def cmd_simp_project(args):
    from .simplicial import canonical_projection
    space, _ = parse_space(args.space)
    cov = _read_cover(args.file, space)
    points = args.point if args.point else range(space.n)
    out = {}
    for x in points:
        p = canonical_projection(space, cov, int(x))
        out[str(x)] = {str(v): str(c) for v, c in sorted(p.coords.items())}
    _emit(out)
    return 0


def cmd_simp_lipschitz(args):
    from .simplicial import embedding_lipschitz, nu, projection_weights
    space, _ = parse_space(args.space)
    cov = _read_cover(args.file, space)
    W = projection_weights(space, cov.sets)
    rep = embedding_lipschitz(space, W, max_exhaustive=args.max_exhaustive)
    k = cov.multiplicity - 1
    _emit({"lipschitz": rep.value, "exhaustive": rep.exhaustive, "multiplicity": cov.multiplicity,
           "lebesgue": cov.lebesgue, "nu_bound_for_eps_1": str(nu(1, k))})
    return 0


# ---------------------------------------------------------------- graphs of groups

def cmd_gog_reduce(args):
    gog = load_gog(args.model)
    items = [_token(t) for t in args.items]
    w = gog.word(args.start, *items)
    red = gog.reduce(w)
    nf = gog.normal_form(w)
    _emit({"word": format_word(gog, w), "reduced": format_word(gog, red),
           "normal_form": format_word(gog, nf), "path_length": red.length, "f_norm": gog.f_norm(w)})
    return 0


def cmd_gog_ball(args):
    from .bass_serre import tree_ball
    gog = load_gog(args.model)
    tb = tree_ball(gog, args.radius, budget=args.word_budget, cap=args.budget or DEFAULT_CAP)
    if args.dot:
        _emit(tb.to_dot(gog.name or "tree"))
    else:
        _emit({"vertices": len(tb.vertices), "edges": len(tb.edges), "is_tree": tb.is_tree(),
               "depths": _histogram(tb.depth(v) for v in tb.vertices)})
    return 0


def _histogram(values):
    out = {}
    for v in values:
        out[v] = out.get(v, 0) + 1
    return {str(k): out[k] for k in sorted(out)}


def cmd_gog_stabilizer(args):
    from .bass_serre import enumerate_words, r_stabilizer
    gog = load_gog(args.model)
    words = enumerate_words(gog, args.word_budget)
    ws = r_stabilizer(gog, args.R, args.word_budget, words)
    shown = sorted(ws, key=gog.sort_key)[: args.limit]
    _emit({"R": args.R, "budget": args.word_budget, "elements": len(ws),
           "sample": [format_word(gog, w) for w in shown]})
    return 0


def cmd_gog_strata(args):
    from .bass_serre import enumerate_words, h_stratum
    gog = load_gog(args.model)
    words = enumerate_words(gog, args.word_budget)
    _emit({str(k): len(h_stratum(gog, k, args.word_budget, words)) for k in range(args.kmax + 1)})
    return 0


def cmd_gog_pieces(args):
    from .experiments import strata_checks
    res = strata_checks(model=args.model, k=args.k, edge=args.edge, radii=tuple(args.r),
                        budget=args.word_budget)
    _emit(res)
    return 0 if res["ok"] else 1


# ---------------------------------------------------------------- synthesis

def cmd_synth_run(args):
    params = {"radius": args.radius, "d": args.d, "r": args.r}
    for key in ("separation", "overlap", "k"):
        if getattr(args, key) is not None:
            params[key] = getattr(args, key)
    if args.root != "base":
        params["root"] = args.root
    if args.relaxed:
        params["strict"] = False
    recipe = {"schema": SCHEMAS["recipe"], "name": args.name or f"synth-{args.model}-{args.radius}",
              "operation": "synth.run", "model": args.model, "params": params}
    return _run_one(args, recipe)


def cmd_synth_verify(args):
    return cmd_verify(args)


# ---------------------------------------------------------------- parser

def _common(p):
    p.add_argument("--seed", type=int, default=None, help="override the recipe seed")
    p.add_argument("--budget", type=int, default=None, help="element cap for enumerations")
    p.add_argument("--timeout", type=float, default=None, help="search timeout in seconds")
    p.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./asdimkit-out)")


def build_parser():
    ap = _Parser(prog="asdimkit", description="Scale-by-scale asymptotic dimension certificates.")
    ap.add_argument("--version", action="version", version=f"asdimkit {__version__}")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="run bundled recipes (or 'all') or recipe files")
    p.add_argument("recipe", nargs="+")
    _common(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("verify", help="re-verify a certificate file")
    p.add_argument("certificate")
    p.add_argument("--no-recheck", action="store_true", help="skip rerunning refutation searches")
    _common(p)
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("list-recipes", help="list bundled recipes")
    p.set_defaults(fn=cmd_list)

    p = sub.add_parser("export-dot", help="DOT for a tree ball, a complex file or a cover nerve")
    p.add_argument("kind", choices=["tree", "complex", "nerve"])
    p.add_argument("source", help="model name or file (gog JSON, complex text, cover JSON)")
    p.add_argument("--radius", type=int, default=2)
    p.add_argument("--word-budget", type=int, default=None)
    p.add_argument("--space", help="space for 'nerve'")
    p.add_argument("--budget", type=int, default=None)
    p.set_defaults(fn=cmd_export_dot)

    # groups
    g = sub.add_parser("groups", help="group models").add_subparsers(dest="sub", required=True,
                                                                      parser_class=_Parser)
    p = g.add_parser("ball", help="enumerate a Cayley ball as a text distance table")
    p.add_argument("group", help="model name, group JSON file, or inline JSON description")
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--write", default=None)
    p.add_argument("--budget", type=int, default=None)
    p.set_defaults(fn=cmd_groups_ball)

    # covers
    c = sub.add_parser("cover", help="covers and colored families").add_subparsers(
        dest="sub", required=True, parser_class=_Parser)
    p = c.add_parser("verify", help="check a cover, families or certificate file")
    p.add_argument("file")
    p.add_argument("--space", required=True)
    p.add_argument("-d", default=None)
    p.add_argument("-B", default=None)
    p.set_defaults(fn=cmd_cover_verify)
    for verb, fn in (("search", cmd_cover_search), ("refute", cmd_cover_refute)):
        p = c.add_parser(verb, help=f"scale-dimension {verb} with a certificate")
        p.add_argument("--space", required=True)
        p.add_argument("-d", required=True)
        p.add_argument("-B", required=True)
        p.add_argument("-n", type=int, required=True)
        p.add_argument("--name", default=None)
        if verb == "search":
            p.add_argument("--strategy", default="auto")
        _common(p)
        p.set_defaults(fn=fn)
    p = c.add_parser("convert", help="families -> cover, or cover -> families")
    p.add_argument("file")
    p.add_argument("--space", required=True)
    p.add_argument("-d", default=None, help="scale for cover -> families (default L/3)")
    p.add_argument("-n", type=int, default=None)
    p.add_argument("--write", default=None)
    p.set_defaults(fn=cmd_cover_convert)

    # simplicial
    s = sub.add_parser("simp", help="complexes and maps").add_subparsers(dest="sub", required=True,
                                                                         parser_class=_Parser)
    p = s.add_parser("nerve")
    p.add_argument("file")
    p.add_argument("--space", required=True)
    p.add_argument("--dot", action="store_true")
    p.set_defaults(fn=cmd_simp_nerve)
    p = s.add_parser("cylinder")
    p.add_argument("domain")
    p.add_argument("codomain")
    p.add_argument("map", help="JSON object: domain vertex -> codomain vertex")
    p.add_argument("--dot", action="store_true")
    p.set_defaults(fn=cmd_simp_cylinder)
    p = s.add_parser("project")
    p.add_argument("file")
    p.add_argument("--space", required=True)
    p.add_argument("--point", type=int, action="append")
    p.set_defaults(fn=cmd_simp_project)
    p = s.add_parser("lipschitz")
    p.add_argument("file")
    p.add_argument("--space", required=True)
    p.add_argument("--max-exhaustive", type=int, default=3000)
    p.set_defaults(fn=cmd_simp_lipschitz)

    # graphs of groups
    gg = sub.add_parser("gog", help="graphs of groups").add_subparsers(dest="sub", required=True,
                                                                       parser_class=_Parser)
    p = gg.add_parser("reduce", help="reduce a word: START then coefficients and edge names")
    p.add_argument("--model", required=True)
    p.add_argument("start")
    p.add_argument("items", nargs="*")
    p.set_defaults(fn=cmd_gog_reduce)
    p = gg.add_parser("ball", help="Bass-Serre tree ball")
    p.add_argument("--model", required=True)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("--word-budget", type=int, default=None)
    p.add_argument("--budget", type=int, default=None)
    p.add_argument("--dot", action="store_true")
    p.set_defaults(fn=cmd_gog_ball)
    p = gg.add_parser("stabilizer", help="elements moving the root at most R")
    p.add_argument("--model", required=True)
    p.add_argument("-R", type=int, required=True)
    p.add_argument("--word-budget", type=int, default=8)
    p.add_argument("--limit", type=int, default=20)
    p.set_defaults(fn=cmd_gog_stabilizer)
    p = gg.add_parser("strata", help="sizes of path-length strata")
    p.add_argument("--model", required=True)
    p.add_argument("--kmax", type=int, default=3)
    p.add_argument("--word-budget", type=int, default=8)
    p.set_defaults(fn=cmd_gog_strata)
    p = gg.add_parser("pieces", help="stratum pieces minus Y_r: separation check")
    p.add_argument("--model", required=True)
    p.add_argument("-k", type=int, default=1)
    p.add_argument("--edge", default="y")
    p.add_argument("-r", type=int, action="append", required=True)
    p.add_argument("--word-budget", type=int, default=12)
    p.set_defaults(fn=cmd_gog_pieces)

    # synthesis
    sy = sub.add_parser("synth", help="cover synthesis pipeline").add_subparsers(
        dest="sub", required=True, parser_class=_Parser)
    p = sy.add_parser("run")
    p.add_argument("--model", required=True)
    p.add_argument("--radius", type=int, required=True)
    p.add_argument("-d", type=int, required=True)
    p.add_argument("-r", type=int, required=True)
    p.add_argument("--separation", type=int, default=None)
    p.add_argument("--overlap", type=int, default=None)
    p.add_argument("-k", type=int, default=None)
    p.add_argument("--root", choices=["base", "extreme"], default="base")
    p.add_argument("--relaxed", action="store_true",
                   help="check orbit-piece overlaps directly instead of the separation rule")
    p.add_argument("--name", default=None)
    _common(p)
    p.set_defaults(fn=cmd_synth_run)
    p = sy.add_parser("verify")
    p.add_argument("certificate")
    p.add_argument("--no-recheck", action="store_true")
    _common(p)
    p.set_defaults(fn=cmd_synth_verify)
    return ap


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except AsdimError as e:
        print(f"asdimkit: {type(e).__name__}: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
