"""Reproducible experiments shared by the recipes and the acceptance suite.

Each function returns a plain dict with an ``ok`` flag and the numbers behind it.
"""

import random
import time
from fractions import Fraction

import numpy as np

from .bass_serre import enumerate_words, lemma3_pieces
from .covers import (ColoredFamilies, Cover, RootedTree, colored_to_cover, cover_to_colored,
                     lebesgue_number, tree_cover)
from .groups import FreeAbelianGroup, FreeGroup, cayley_ball
from .metric import line_space
from .models import MODELS, REALIZATIONS, realization_ball
from .search import _color_pieces, band_pieces, brick_pieces, scale_dim_refute, scale_dim_upper
from .simplicial import (SimplicialMap, OrientedComplex, embedding_lipschitz, mapping_cylinder,
                         nu, prism_lipschitz_exact, prism_lipschitz_sampled, prism_triangulation, projection_weights)


# ---------------------------------------------------------------- canonical projections

def level_cover(space, values, L, k, rng):
    """Random cover by preimages of overlapping intervals of a 1-Lipschitz function.

    Interior cut intervals have length at least 4(L+1); the two end intervals
    may be short.  Each band is widened by a random margin in [L+1, 2(L+1))
    on both sides, so every point sits at depth > L in the band of its own
    interval and no three bands meet.  With k = 0 the cover is the whole space.
    """
    lo, hi = int(values.min()), int(values.max())
    if k == 0 or hi == lo:
        return Cover(space, [frozenset(range(space.n))])
    gap_min = 4 * (L + 1)
    cuts = [lo, lo + 1 + rng.randrange(min(gap_min, hi - lo))]
    while True:
        nxt = cuts[-1] + gap_min + rng.randrange(0, gap_min)
        if nxt > hi:
            break
        cuts.append(nxt)
    cuts.append(hi + 1)
    sets = []
    for a, b in zip(cuts, cuts[1:]):
        m_lo = L + 1 + rng.randrange(0, L + 1)
        m_hi = L + 1 + rng.randrange(0, L + 1)
        sel = (values >= a - m_lo) & (values < b + m_hi)
        sets.append(frozenset(np.nonzero(sel)[0].tolist()))
    return Cover(space, sets)


def projection_trials(per_case=10, seed=0, pairs=((1, 0), (1, 1), (1, 2), (Fraction(1, 2), 0),
                                             (Fraction(1, 2), 1), (Fraction(1, 2), 2))):
    """Canonical projections of random covers with L > nu(eps, k): Lipschitz <= eps."""
    rng = random.Random(seed)
    rows = []
    t0 = time.monotonic()
    z2 = cayley_ball(FreeAbelianGroup(2), 31).space
    z2pts = np.array(z2.points)
    funcs = [z2pts[:, 0], z2pts[:, 1], z2pts.sum(axis=1), z2pts[:, 0] - z2pts[:, 1]]
    for eps, k in pairs:
        bound = nu(eps, k)
        L = int(bound)  # cover Lebesgue numbers exceed L + 1 > nu
        for t in range(per_case):
            if t % 2 == 0:
                rad = rng.randrange(200, 1000)
                space = line_space(-rad, rad)
                values = np.array(space.points).reshape(-1)
                where = f"Z[-{rad},{rad}]"
            else:
                space, values = z2, funcs[rng.randrange(len(funcs))]
                where = "Z2 ball 31"
            cov = level_cover(space, values, L, k, rng)
            leb = cov.lebesgue
            mult = cov.multiplicity
            W = projection_weights(space, cov.sets)
            lip = embedding_lipschitz(space, W, max_exhaustive=space.n)
            ok = bool(mult <= k + 1 and leb > bound and lip.exhaustive and lip.value <= float(eps) + 1e-12)
            rows.append({"eps": str(eps), "k": k, "space": where, "n": space.n, "sets": len(cov.sets),
                         "multiplicity": mult, "lebesgue": leb, "nu": str(bound),
                         "lipschitz": lip.value, "ok": ok})
    return {"ok": all(r["ok"] for r in rows) and len(rows) >= 50, "trials": rows,
            "seconds": time.monotonic() - t0}


# ---------------------------------------------------------------- prisms and cylinders

def cylinder_suite(seed=0, cases=20):
    """Random simplicial maps (many collapsing) between small complexes."""
    rng = random.Random(seed)
    out = []
    for c in range(cases):
        nx = rng.randrange(2, 7)
        ny = rng.randrange(1, 5)
        X = _random_complex(rng, [f"x{i}" for i in range(nx)], 3)
        Y = OrientedComplex([f"y{j}" for j in range(ny)], [[f"y{j}" for j in range(ny)]])
        vmap = {v: f"y{rng.randrange(ny if c % 3 else 1)}" for v in X.vertices}
        out.append(SimplicialMap(X, Y, vmap))
    return out


def _random_complex(rng, verts, maxdim):
    simplices = []
    for _ in range(rng.randrange(1, 4)):
        size = rng.randrange(1, min(maxdim, len(verts)) + 1)
        simplices.append(rng.sample(verts, size))
    return OrientedComplex(verts, simplices)


def prism_and_cylinder_checks(seed=0):
    rows = []
    for k in range(6):
        P = prism_triangulation([f"v{i}" for i in range(k + 1)])
        rows.append({"check": f"prism k={k}", "maximal": len(P.maximal()), "ok": len(P.maximal()) == k + 1})
    for i, g in enumerate(cylinder_suite(seed)):
        cyl = mapping_cylinder(g)
        expect = {("X", v) for v in g.domain.vertices} | {("Y", w) for w in g.codomain.vertices}
        ok = (set(cyl.complex.vertices) == expect
              and len(cyl.complex.vertices) == len(g.domain.vertices) + len(g.codomain.vertices)
              and not cyl.problems())
        collapses = len(set(g.vertex_map.values())) < len(g.domain.vertices)
        rows.append({"check": f"cylinder {i}", "collapse": collapses, "ok": ok})
    return {"ok": all(r["ok"] for r in rows), "rows": rows,
            "collapses": sum(1 for r in rows if r.get("collapse"))}


def prism_lipschitz_checks(kmax=4, samples=20000, seed=0):
    """Exact prism Lipschitz constants against a sampled lower estimate."""
    rows = []
    for k in range(1, kmax + 1):
        exact = prism_lipschitz_exact(k)
        sampled, _ = prism_lipschitz_sampled(k, samples=samples, seed=seed)
        rows.append({"k": k, "exact": exact, "sampled": sampled,
                     "ok": sampled <= exact * (1 + 1e-6) and sampled >= 0.9 * exact})
    return {"ok": all(r["ok"] for r in rows), "rows": rows}


# ---------------------------------------------------------------- normal forms vs trees

def normal_form_sweep(models=("klein", "hnn"), budget=8, radii=(0, 1, 2, 3)):
    """Reduced path length <= R iff the realized tree displacement <= R, for every enumerated word."""
    out = {}
    ok = True
    for name in models:
        gog = MODELS[name]()
        real = REALIZATIONS[name]()
        dist = realization_ball(real, max(radii) + 1)
        words = enumerate_words(gog, budget)
        mism = 0
        for w in words:
            g = real.from_word(gog, w)
            v = real.vertex(g, gog.terminal(w))
            disp = dist.get(v)
            for R in radii:
                lhs = len(w.edges) <= R
                rhs = disp is not None and disp <= R
                if lhs != rhs:
                    mism += 1
        out[name] = {"words": len(words), "mismatches": mism, "tree_ball": len(dist)}
        ok = ok and mism == 0
    return {"ok": ok, "models": out}


def strata_checks(model="klein", k=1, edge="y", radii=(2, 3), budget=12):
    gog = MODELS[model]()
    words = enumerate_words(gog, budget)
    rows = []
    for r in radii:
        rep = lemma3_pieces(gog, k, edge, r, budget, words=words)
        rows.append(rep.summary())
    return {"ok": all(r["disjoint"] and r["covers"] for r in rows), "rows": rows,
            "words": len(words)}


# ---------------------------------------------------------------- sharpness

def sharpness(radius=4, d=3, B=6, timeout=3600):
    space = cayley_ball(FreeAbelianGroup(2), radius).space
    t0 = time.monotonic()
    ref = scale_dim_refute(space, d, B, 1, timeout=timeout)
    t1 = time.monotonic()
    up = scale_dim_upper(space, d, B, 2, strategy="bricks")
    t2 = time.monotonic()
    return {"ok": ref.verdict == "refuted" and up.verdict == "upper",
            "refute": ref.label(), "upper": up.label(), "points": space.n,
            "refute_seconds": t1 - t0, "upper_seconds": t2 - t1,
            "certificates": (ref, up), "space": space}


# ---------------------------------------------------------------- round trips

def free_tree_space(rank, radius):
    """Cayley ball of a free group with distances from the tree structure."""
    G = FreeGroup(rank)
    ball = cayley_ball(G, radius)
    index = {g: i for i, g in enumerate(ball.elements)}
    parent = [-1 if not g else index[g[:-1]] for g in ball.elements]
    return RootedTree.from_parents(ball.elements, parent, name=f"F{rank} ball {radius}")


def random_families(rng):
    """A random valid ColoredFamilies at scale 3d on a Z, Z^2 or F2 ball."""
    kind = rng.choice(["Z", "Z2", "F2"])
    d = rng.randrange(1, 4)
    D = 3 * d
    if kind == "Z":
        rad = rng.randrange(10, 60)
        space = line_space(-rad, rad)
        width = rng.randrange(D + 1, 3 * D + 2)
        pieces = band_pieces(space, D, width - 1, width=width)
        cf = _color_pieces(space, pieces, D, width - 1, 1, None)
        n = 1
    elif kind == "Z2":
        space = cayley_ball(FreeAbelianGroup(2), rng.randrange(4, 9)).space
        w = rng.randrange(2 * D - 2, 2 * D + 3)
        h = rng.randrange(max(1, D - 1), D + 2)
        B = (w - 1) + (h - 1)
        cf = _color_pieces(space, brick_pieces(space, w, h, w // 2), D, B, 2, None)
        n = 2
    else:
        tree = free_tree_space(2, rng.randrange(3, 6))
        space = tree.space
        cf = tree_cover(tree, D)
        n = 1
    return kind, d, n, cf


def round_trip_trials(count=100, seed=0):
    rng = random.Random(seed)
    rows = []
    t0 = time.monotonic()
    while len(rows) < count:
        kind, d, n, cf = random_families(rng)
        if cf is None:
            continue
        row = {"space": kind, "d": d, "n": n, "points": cf.space.n, "valid_input": cf.is_valid()}
        cov = colored_to_cover(cf)
        row["multiplicity"] = cov.multiplicity
        row["lebesgue"] = cov.lebesgue
        back = cover_to_colored(cov, Fraction(d, 2), n=n)
        row["families"] = len(back.families)
        back_cov = Cover(back.space, back.all_sets())
        row["back_multiplicity"] = back_cov.multiplicity
        row["back_lebesgue"] = lebesgue_number(back.space, back.all_sets())
        row["ok"] = bool(row["valid_input"] and back.is_valid() and cov.is_cover()
                         and cov.multiplicity <= n + 1 and len(back.families) <= n + 1
                         and back_cov.multiplicity <= n + 1 and row["back_lebesgue"] > 0)
        rows.append(row)
    return {"ok": all(r["ok"] for r in rows), "trials": rows, "seconds": time.monotonic() - t0}
