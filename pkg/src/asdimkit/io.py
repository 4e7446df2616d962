"""Plain-text persistence: JSON documents tagged with a schema, plus text tables.

Every document carries ``"schema": "asdimkit.<kind>/<version>"``.  Output is
written with sorted keys so identical inputs give identical bytes.
"""

import dataclasses
import json
import math
from fractions import Fraction
from pathlib import Path

import numpy as np

from .bass_serre import GraphOfGroups
from .covers import ColoredFamilies, Cover
from .errors import ParseError, ValidationError
from .groups import FiniteTableGroup, FreeAbelianGroup, FreeGroup, cayley_ball, cyclic_group, trivial_group
from .metric import FiniteMetricSpace, line_space
from .models import MODELS
from .search import ScaleDimCertificate
from .simplicial import OrientedComplex

SCHEMAS = {
    "certificate": "asdimkit.certificate/1",
    "cover": "asdimkit.cover/1",
    "group": "asdimkit.group/1",
    "gog": "asdimkit.gog/1",
    "recipe": "asdimkit.recipe/1",
    "report": "asdimkit.report/1",
    "manifest": "asdimkit.manifest/1",
    "complex": "asdimkit.complex/1",
}


def jsonable(x):
    """Convert numbers, tuples, sets and numpy scalars to plain JSON values."""
    if isinstance(x, dict):
        return {str(k): jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [jsonable(v) for v in x]
    if isinstance(x, (set, frozenset)):
        return sorted(jsonable(v) for v in x)
    if isinstance(x, Fraction):
        return str(x) if x.denominator != 1 else int(x)
    if isinstance(x, (np.integer,)):
        return int(x)
    if isinstance(x, (np.floating, float)):
        x = float(x)
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(x, np.bool_):
        return bool(x)
    if dataclasses.is_dataclass(x) and not isinstance(x, type):
        return jsonable(dataclasses.asdict(x))
    return x


def dumps(doc):
    return json.dumps(jsonable(doc), sort_keys=True, indent=1) + "\n"


def write_json(path, doc):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(doc))
    return path


def read_json(path, kind=None):
    try:
        doc = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise ParseError(f"cannot read {path}: {e}") from e
    if kind is not None:
        check_schema(doc, kind)
    return doc


def check_schema(doc, kind):
    if not isinstance(doc, dict) or doc.get("schema") != SCHEMAS[kind]:
        got = doc.get("schema") if isinstance(doc, dict) else type(doc).__name__
        raise ValidationError(f"expected schema {SCHEMAS[kind]}, got {got}")


def number(x):
    """Parse an int, a float or a fraction string like '3/2'; 'inf' allowed."""
    if isinstance(x, bool):
        raise ValidationError(f"not a number: {x!r}")
    if isinstance(x, (int, Fraction)):
        return x
    if isinstance(x, float):
        return x
    if isinstance(x, str):
        if x in ("inf", "+inf"):
            return math.inf
        try:
            f = Fraction(x)
        except ValueError as e:
            raise ValidationError(f"not a number: {x!r}") from e
        return int(f) if f.denominator == 1 else f
    raise ValidationError(f"not a number: {x!r}")


# ---------------------------------------------------------------- groups and spaces

def group_from_spec(spec, base=None):
    """Build a group model from a description dict (or a bundled model name)."""
    if isinstance(spec, str):
        if spec in MODELS:
            return MODELS[spec]().pi1_group()
        return group_from_spec(read_json(_resolve(spec, base), "group"), base)
    kind = spec.get("kind")
    if kind == "trivial":
        return trivial_group()
    if kind == "cyclic":
        return cyclic_group(int(spec["n"]))
    if kind == "free-abelian":
        return FreeAbelianGroup(int(spec["rank"]), spec.get("generators"), spec.get("names"))
    if kind == "free":
        return FreeGroup(int(spec["rank"]), spec.get("names"))
    if kind == "finite-table":
        return FiniteTableGroup(spec["table"], spec["generators"], spec.get("names"))
    if kind == "graph-of-groups":
        ref = spec.get("gog") or spec.get("model")
        if isinstance(ref, dict):
            return gog_from_dict(ref, base).pi1_group()
        if ref in MODELS:
            return MODELS[ref]().pi1_group()
        return load_gog(_resolve(ref, base)).pi1_group()
    raise ValidationError(f"unknown group kind {kind!r}")


def group_to_spec(G):
    if isinstance(G, FiniteTableGroup):
        return {"kind": "finite-table", "table": G.table.tolist(),
                "generators": list(G.generators), "names": list(G.generator_names)}
    if isinstance(G, FreeAbelianGroup):
        out = {"kind": "free-abelian", "rank": G.rank, "names": list(G.generator_names)}
        if not G.standard:
            out["generators"] = [list(g) for g in G.generators[::2]]
        return out
    if isinstance(G, FreeGroup):
        return {"kind": "free", "rank": G.rank, "names": list(G.generator_names)}
    raise ValidationError(f"cannot describe group of kind {getattr(G, 'kind', '?')}")


def _resolve(ref, base):
    p = Path(ref)
    if not p.is_absolute() and base is not None:
        p = Path(base).parent / p
    return p


def space_from_spec(spec, base=None, cap=None):
    """Finite metric space from a description.

    Kinds: ``segment`` (lo, hi), ``lattice`` (rank, radius), ``group``
    (group, radius), ``points`` (points, lower-triangular ``rows``).
    """
    kind = spec.get("kind")
    if kind == "segment":
        return line_space(int(spec["lo"]), int(spec["hi"]))
    if kind == "lattice":
        G = FreeAbelianGroup(int(spec["rank"]))
        return cayley_ball(G, int(spec["radius"])).space
    if kind == "group":
        G = group_from_spec(spec["group"], base)
        kw = {} if cap is None else {"cap": cap}
        return cayley_ball(G, int(spec["radius"]), **kw).space
    if kind == "points":
        return space_from_rows(spec["points"], spec["rows"])
    if kind == "file":
        return read_ball_text(_resolve(spec["path"], base))
    raise ValidationError(f"unknown space kind {kind!r}")


def space_from_rows(points, rows):
    n = len(points)
    if len(rows) != n:
        raise ValidationError("distance rows do not match point count")
    vals = [number(v) for row in rows for v in row]
    integral = all(isinstance(v, int) for v in vals)
    D = np.zeros((n, n), dtype=np.int32 if integral else float)
    for i, row in enumerate(rows):
        if len(row) != i:
            raise ValidationError(f"row {i} should have {i} entries (lower triangle)")
        for j, v in enumerate(row):
            D[i, j] = D[j, i] = number(v)
    pts = [tuple(p) if isinstance(p, list) else p for p in points]
    return FiniteMetricSpace(pts, D, name="points")


# ---------------------------------------------------------------- ball text export

def ball_text(space):
    """Point list, then the strict lower triangle of the distance matrix, one row per line."""
    lines = [f"# points {space.n}"]
    lines += [json.dumps(jsonable(p)) for p in space.points]
    lines.append("# distances")
    for i in range(space.n):
        lines.append(" ".join(str(jsonable(v)) for v in space.dist[i, :i]))
    return "\n".join(lines) + "\n"


def read_ball_text(path):
    try:
        text = Path(path).read_text().splitlines()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e}") from e
    if not text or not text[0].startswith("# points"):
        raise ParseError("ball file must start with '# points N'")
    try:
        n = int(text[0].split()[2])
        points = [json.loads(s) for s in text[1:n + 1]]
    except (IndexError, ValueError) as e:
        raise ParseError(f"bad ball header or point line: {e}") from e
    if len(text) <= n + 1 or text[n + 1].strip() != "# distances":
        raise ParseError("missing '# distances' header")
    rows = [s.split() for s in text[n + 2:n + 2 + n]]
    while len(rows) < n:
        rows.append([])
    return space_from_rows(points, rows)


# ---------------------------------------------------------------- graphs of groups

def gog_from_dict(doc, base=None):
    if "schema" in doc:
        check_schema(doc, "gog")
    groups = {P: group_from_spec(spec, base) for P, spec in doc["vertices"].items()}
    edges = []
    for e in doc["edges"]:
        e = dict(e)
        e["group"] = group_from_spec(e["group"], base)
        e["phi"] = [tuple(v) if isinstance(v, list) else v for v in e["phi"]]
        e["phibar"] = [tuple(v) if isinstance(v, list) else v for v in e["phibar"]]
        edges.append(e)
    return GraphOfGroups(groups, edges, base=doc["base"], tree=doc.get("tree", []),
                         name=doc.get("name", ""))


def load_gog(path):
    if str(path) in MODELS:
        return MODELS[str(path)]()
    return gog_from_dict(read_json(path, "gog"), base=path)


def gog_to_dict(gog):
    def img(v):
        return list(v) if isinstance(v, tuple) else v

    edges, seen = [], set()
    for y, e in gog.edges.items():
        if y in seen:
            continue
        seen |= {y, e.bar}
        edges.append({"name": y, "bar": e.bar, "origin": e.origin, "terminus": e.terminus,
                      "group": group_to_spec(gog.edge_group[y]),
                      "phi": [img(v) for v in gog.phi[y].images],
                      "phibar": [img(v) for v in gog.phi[e.bar].images]})
    tree = [e["name"] for e in edges if e["name"] in gog.tree]
    return {"schema": SCHEMAS["gog"], "name": gog.name, "base": gog.base,
            "vertices": {P: group_to_spec(G) for P, G in gog.vertex_groups.items()},
            "edges": edges, "tree": tree}


# ---------------------------------------------------------------- covers and certificates

def cover_doc(cover, space_spec=None):
    return {"schema": SCHEMAS["cover"], "space": space_spec,
            "space_hash": cover.space.fingerprint(),
            "sets": [sorted(s) for s in cover.sets]}


def families_doc(cf, space_spec=None):
    return {"schema": SCHEMAS["cover"], "space": space_spec,
            "space_hash": cf.space.fingerprint(), "d": cf.d, "B": cf.B,
            "families": [[sorted(s) for s in fam] for fam in cf.families]}


def read_families(doc, space):
    check_schema(doc, "cover")
    if "families" in doc:
        return ColoredFamilies(space, [[frozenset(s) for s in fam] for fam in doc["families"]],
                               number(doc["d"]), number(doc["B"]) if doc.get("B") is not None else None)
    return Cover(space, [frozenset(s) for s in doc["sets"]])


def certificate_doc(cert, space_spec=None, version=""):
    from .search import VERIFIER_VERSION
    return {"schema": SCHEMAS["certificate"], "kind": "scale-dimension",
            "space": space_spec, "space_hash": cert.space_hash,
            "verdict": cert.verdict, "n": cert.n, "d": cert.d, "B": cert.B,
            "witness": None if cert.witness is None else
            [[sorted(s) for s in fam] for fam in cert.witness.families],
            "transcript": cert.transcript, "caveat": cert.caveat,
            "digest": cert.digest, "verifier": VERIFIER_VERSION, "tool": version}


def certificate_from_doc(doc, space):
    check_schema(doc, "certificate")
    w = doc.get("witness")
    d, B = number(doc["d"]), number(doc["B"])
    witness = None if w is None else ColoredFamilies(space, [[frozenset(s) for s in fam] for fam in w], d, B)
    return ScaleDimCertificate(doc["verdict"], int(doc["n"]), d, B, doc["space_hash"], witness,
                               doc.get("transcript", {}), doc.get("caveat", ""))


# ---------------------------------------------------------------- complexes

def _parse_vertex(tok):
    parts = tok.split(":")
    vals = []
    for p in parts:
        try:
            vals.append(int(p))
        except ValueError:
            vals.append(p)
    return vals[0] if len(vals) == 1 else tuple(vals)


def complex_from_text(text):
    """Inverse of OrientedComplex.to_text (vertices as ints, strings or ':'-joined tuples)."""
    lines = [s for s in text.splitlines() if s.strip()]
    if not lines or not lines[0].startswith("vertices:"):
        raise ParseError("complex text must start with 'vertices:'")
    verts = [_parse_vertex(t) for t in lines[0][len("vertices:"):].split()]
    simplices = [[_parse_vertex(t) for t in s.split()] for s in lines[1:]]
    return OrientedComplex(verts, simplices)


def images_text(images):
    """One line per point: point index, then vertex=coordinate pairs."""
    from .simplicial import _fmt
    lines = []
    for x in sorted(images):
        p = images[x]
        parts = [f"{_fmt(v)}={c}" for v, c in sorted(p.coords.items(), key=lambda kv: repr(kv[0]))]
        lines.append(f"{x} " + " ".join(parts))
    return "\n".join(lines) + "\n"
