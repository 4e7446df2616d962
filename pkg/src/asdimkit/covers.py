"""Covers, colored d-disjoint families, Lebesgue numbers and the conversions between them.

All set-valued data are frozensets of point indices into a FiniteMetricSpace.
Scales may be ints or Fractions; comparisons against integer metrics are
done exactly by rounding the threshold, never by floating point.
"""

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .coloring import exact_coloring, greedy_coloring
from .errors import ColoringFailure, NotACover, ValidationError
from .metric import FiniteMetricSpace, as_fraction

INF = math.inf


def _lt(space, d):
    """Threshold t with (dist < d) <=> (dist < t) on this space."""
    if d == INF:
        return np.inf
    if space.is_integral:
        return math.ceil(as_fraction(d))
    return float(d)


def _le(space, d):
    """Threshold t with (dist <= d) <=> (dist <= t) on this space."""
    if d == INF:
        return np.inf
    if space.is_integral:
        return math.floor(as_fraction(d))
    return float(d)


def _arr(s):
    return np.fromiter(s, dtype=np.int64)


def _exact(v):
    if v == INF or v == np.inf:
        return INF
    if isinstance(v, (int, np.integer)):
        return int(v)
    return v


# -- basic predicates -----------------------------------------------------------

def disjointness_violation(space, family, d):
    """First pair (i, j, distance) of sets closer than d, or None."""
    if len(family) < 2:
        return None
    t = _lt(space, d)
    owners = {}
    for i, s in enumerate(family):
        for p in s:
            owners.setdefault(p, []).append(i)
    for i, s in enumerate(family):
        if not s:
            continue
        dv = space.dist_to_set(s)
        near = np.nonzero(dv < t)[0]
        for p in near.tolist():
            for j in owners.get(p, ()):
                if j != i:
                    return (min(i, j), max(i, j), _exact(dv[p]))
    return None


def d_disjoint(space, family, d):
    """True iff every two distinct sets of the family are at distance >= d."""
    return disjointness_violation(space, family, d) is None


def containment_counts(space, sets, d=0):
    """For each point, the number of sets meeting its closed d-ball."""
    t = _le(space, d)
    counts = np.zeros(space.n, dtype=np.int64)
    for s in sets:
        if not s:
            continue
        if d == 0:
            counts[_arr(s)] += 1
        else:
            counts += space.dist_to_set(s) <= t
    return counts


def d_multiplicity(space, sets, d=0):
    if space.n == 0:
        return 0
    return int(containment_counts(space, sets, d).max())


def covered_points(space, sets):
    mask = np.zeros(space.n, dtype=bool)
    for s in sets:
        if s:
            mask[_arr(s)] = True
    return mask


def bound_of(space, sets):
    return max((space.diameter(s) for s in sets), default=0)


def complement_depths(space, sets):
    """Matrix depth[j, x] = d(x, X minus U_j); zero off U_j, +inf when U_j = X."""
    n = space.n
    out = np.zeros((len(sets), n))
    for j, s in enumerate(sets):
        if not s:
            continue
        inside = _arr(s)
        mask = np.zeros(n, dtype=bool)
        mask[inside] = True
        comp = np.nonzero(~mask)[0]
        if comp.size == 0:
            out[j, inside] = np.inf
        else:
            out[j, inside] = space.dist[np.ix_(inside, comp)].min(axis=1)
    return out


def lebesgue_number(space, sets, over=None):
    """min over x (in ``over`` or the whole space) of max over U of d(x, X minus U).

    Returns an int on integer metrics, +inf when some set is the whole space
    at every point, and 0 at points no set contains.
    """
    if space.n == 0:
        return INF
    pts = np.arange(space.n) if over is None else _arr(over)
    if pts.size == 0:
        return INF
    depth = complement_depths(space, sets)
    if depth.shape[0] == 0:
        return 0
    best = depth[:, pts].max(axis=0).min()
    if best == np.inf:
        return INF
    return int(best) if space.is_integral else float(best)


# -- containers -------------------------------------------------------------------

@dataclass
class Cover:
    """A family of subsets of a finite metric space.

    ``covers`` records whether the family is claimed to be a cover; the
    derived attributes are always recomputed from the sets.
    """

    space: FiniteMetricSpace
    sets: list
    covers: bool = True
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.sets = [frozenset(int(p) for p in s) for s in self.sets]

    def __len__(self):
        return len(self.sets)

    @property
    def bound(self):
        if "bound" not in self._cache:
            self._cache["bound"] = bound_of(self.space, self.sets)
        return self._cache["bound"]

    @property
    def multiplicity(self):
        if "mult" not in self._cache:
            self._cache["mult"] = d_multiplicity(self.space, self.sets, 0)
        return self._cache["mult"]

    @property
    def lebesgue(self):
        if "leb" not in self._cache:
            self._cache["leb"] = lebesgue_number(self.space, self.sets)
        return self._cache["leb"]

    def is_cover(self):
        return bool(covered_points(self.space, self.sets).all())

    def uncovered(self):
        return np.nonzero(~covered_points(self.space, self.sets))[0].tolist()

    def summary(self):
        return {"sets": len(self.sets), "bound": self.bound,
                "multiplicity": self.multiplicity, "lebesgue": self.lebesgue,
                "covers": self.is_cover()}


@dataclass
class ColoredFamilies:
    """n+1 families, each d-disjoint, of B-bounded sets that together cover the space."""

    space: FiniteMetricSpace
    families: list
    d: object
    B: object = None

    def __post_init__(self):
        self.families = [[frozenset(int(p) for p in s) for s in fam if len(s)]
                         for fam in self.families]
        if self.B is None:
            self.B = self.bound

    @property
    def n(self):
        return len(self.families) - 1

    @property
    def bound(self):
        return max((bound_of(self.space, f) for f in self.families), default=0)

    def all_sets(self):
        return [s for fam in self.families for s in fam]

    def problems(self):
        """Every way in which the object fails its invariants (empty list when valid)."""
        out = []
        for c, fam in enumerate(self.families):
            v = disjointness_violation(self.space, fam, self.d)
            if v is not None:
                out.append(f"family {c}: sets {v[0]} and {v[1]} at distance {v[2]} < {self.d}")
            for i, s in enumerate(fam):
                diam = self.space.diameter(s)
                if diam > self.B:
                    out.append(f"family {c}: set {i} has diameter {diam} > {self.B}")
        missing = np.nonzero(~covered_points(self.space, self.all_sets()))[0]
        if missing.size:
            out.append(f"{missing.size} uncovered points, first {self.space.points[missing[0]]!r}")
        return out

    def is_valid(self):
        return not self.problems()

    def to_cover(self):
        return Cover(self.space, self.all_sets())


# -- neighbourhood operations ------------------------------------------------------

def enlarge_sets(space, sets, d):
    if d == 0:
        return [frozenset(s) for s in sets]
    t = _le(space, d)
    return [space.neighborhood(s, t) for s in sets]


def enlarge(family, d):
    """Replace every set by its closed d-neighbourhood (Cover or ColoredFamilies)."""
    if isinstance(family, ColoredFamilies):
        # cross distances drop by at most 2d
        fams = [enlarge_sets(family.space, fam, d) for fam in family.families]
        scale = max(as_fraction(family.d) - 2 * as_fraction(d), Fraction(0))
        return ColoredFamilies(family.space, fams, scale)
    return Cover(family.space, enlarge_sets(family.space, family.sets, d), family.covers)


def shrink_sets(space, sets, d):
    t = _le(space, d)
    out = []
    full = set(range(space.n))
    for s in sets:
        comp = full - set(s)
        if not comp:
            out.append(frozenset(s))
            continue
        dv = space.dist_to_set(comp)
        out.append(frozenset(p for p in s if dv[p] > t))
    return out


def shrink(cover, d, check=True):
    """U minus N_d(X minus U) for every U; raises NotACover if coverage is lost."""
    sets = shrink_sets(cover.space, cover.sets, d)
    kept = [s for s in sets if s]
    out = Cover(cover.space, kept)
    if check and cover.is_cover() and not out.is_cover():
        raise NotACover(f"shrinking by {d} uncovers {len(out.uncovered())} points "
                        f"(Lebesgue number {cover.lebesgue})")
    return out


# -- the two reformulations ----------------------------------------------------------

def colored_to_cover(cf):
    """Enlarge every set of every family by d/3 and forget the colors."""
    if not cf.is_valid():
        raise ValidationError("colored families are not valid: " + "; ".join(cf.problems()[:3]))
    amount = as_fraction(cf.d) / 3
    sets = enlarge_sets(cf.space, cf.all_sets(), amount)
    return Cover(cf.space, sets)


def proximity_graph(space, sets, d):
    """Adjacency sets linking sets at distance < d."""
    t = _lt(space, d)
    m = len(sets)
    adj = [set() for _ in range(m)]
    owners = {}
    for i, s in enumerate(sets):
        for p in s:
            owners.setdefault(p, []).append(i)
    for i, s in enumerate(sets):
        dv = space.dist_to_set(s)
        for p in np.nonzero(dv < t)[0].tolist():
            for j in owners.get(p, ()):
                if j != i:
                    adj[i].add(j)
                    adj[j].add(i)
    return adj


def cover_to_colored(cover, d, n=None, deadline=None):
    """Shrink by d and color the shrunk sets so that each color class is d-disjoint.

    ``n + 1`` colors are allowed, defaulting to the cover's multiplicity.
    Greedy coloring is tried first, then exact backtracking.
    """
    if not cover.is_cover():
        raise NotACover("input family does not cover the space")
    L = cover.lebesgue
    if not L > 2 * as_fraction(d):
        raise ValidationError(f"Lebesgue number {L} must exceed 2d = {2 * as_fraction(d)}")
    k = cover.multiplicity if n is None else n + 1
    shrunk = shrink(cover, d)
    sets = list(dict.fromkeys(shrunk.sets))
    adj = proximity_graph(cover.space, sets, d)
    colors = greedy_coloring(adj, len(sets))
    if max(colors, default=0) + 1 > k:
        colors = exact_coloring(adj, k, deadline=deadline)
        if colors is None:
            raise ColoringFailure(f"the shrunk family's {d}-proximity graph has no {k}-coloring")
    fams = [[] for _ in range(k)]
    for s, c in zip(sets, colors):
        fams[c].append(s)
    return ColoredFamilies(cover.space, fams, d)


# -- trees -------------------------------------------------------------------------

@dataclass
class RootedTree:
    """Vertices of a rooted tree with parent pointers and the tree metric.

    ``space`` holds the path metric; ``parent[root] == -1``.
    """

    space: FiniteMetricSpace
    parent: list
    root: int = 0

    def __post_init__(self):
        self.depth = [int(v) for v in self.space.dist[self.root]]

    def ancestor(self, v, depth):
        while self.depth[v] > depth:
            v = self.parent[v]
        return v

    @classmethod
    def from_parents(cls, points, parent, name=""):
        """Build the tree metric from parent pointers via common-ancestor depths."""
        n = len(points)
        root = parent.index(-1)
        depth = [0] * n
        order = sorted(range(n), key=lambda v: _depth_of(parent, v))
        for v in order:
            depth[v] = 0 if parent[v] < 0 else depth[parent[v]] + 1
        L = max(depth, default=0)
        anc = np.full((n, L + 1), -1, dtype=np.int64)
        for v in order:
            if parent[v] >= 0:
                anc[v, : depth[v]] = anc[parent[v], : depth[v]]
            anc[v, depth[v]] = v
        dep = np.array(depth, dtype=np.int32)
        dist = np.empty((n, n), dtype=np.int32)
        chunk = max(1, 4_000_000 // max(n * (L + 1), 1))
        for lo in range(0, n, chunk):
            blk = anc[lo:lo + chunk]
            common = ((blk[:, None, :] == anc[None, :, :]) & (blk[:, None, :] >= 0)).sum(axis=2) - 1
            dist[lo:lo + chunk] = dep[lo:lo + chunk, None] + dep[None, :] - 2 * common
        return cls(FiniteMetricSpace(points, dist, name=name), list(parent), root)


def _depth_of(parent, v):
    k = 0
    while parent[v] >= 0:
        v = parent[v]
        k += 1
    return k


def tree_cover(tree, d, subset=None):
    """Two d-disjoint families of uniformly bounded sets covering a rooted tree ball.

    Vertices are cut into depth bands [kd, (k+1)d).  Inside band k, vertices
    are grouped by their ancestor at depth kd - ceil(d/2) (the root when that
    is negative), which puts distinct groups at least d + 2 apart.  Bands of
    equal parity form one family; diameters are at most 2(d - 1 + ceil(d/2)).
    With ``subset`` the pieces are intersected with it (e.g. an orbit).
    """
    d = int(math.ceil(as_fraction(d)))
    if d < 1:
        raise ValidationError("scale must be at least 1")
    half = (d + 1) // 2
    pieces = {}
    pts = range(tree.space.n) if subset is None else sorted(subset)
    for v in pts:
        k = tree.depth[v] // d
        a = tree.ancestor(v, max(0, k * d - half))
        pieces.setdefault((k, a), []).append(v)
    fams = [[], []]
    for (k, a) in sorted(pieces):
        fams[k % 2].append(frozenset(pieces[(k, a)]))
    if not fams[1]:
        fams = fams[:1]
    return ColoredFamilies(tree.space, fams, d)


# -- hypothesis checkers -------------------------------------------------------------

@dataclass
class CheckReport:
    ok: bool
    value: object = None
    diagnostics: list = field(default_factory=list)

    def __bool__(self):
        return self.ok


def check_uniform_asdim(spaces, witnesses, d, n):
    """All witnesses are valid (n+1)-colored d-disjoint covers; returns the common bound."""
    diags = []
    if len(spaces) != len(witnesses):
        return CheckReport(False, None, ["one witness per space is required"])
    R = 0
    for i, (X, w) in enumerate(zip(spaces, witnesses)):
        if w is None:
            diags.append(f"space {i}: no witness")
            continue
        if len(w.families) > n + 1:
            diags.append(f"space {i}: {len(w.families)} families > {n + 1}")
        if as_fraction(w.d) < as_fraction(d):
            diags.append(f"space {i}: witness scale {w.d} < {d}")
        probs = ColoredFamilies(X, w.families, d, w.B).problems() if w.space is X else ["witness lives in another space"]
        diags += [f"space {i}: {p}" for p in probs]
        R = max(R, w.bound)
    return CheckReport(not diags, R, diags)


def check_infinite_union_hypotheses(X, pieces, Y_r, r, n, d, piece_witnesses=None,
                                    y_witness=None, search_bound=None):
    """Check the fixed-scale hypotheses of the union theorem on finite data.

    (a) the pieces are uniformly of scale-d dimension <= n (witnesses are
    searched for when not supplied); (b) Y_r has a scale-d witness with n+1
    families; (c) the truncated pieces F minus Y_r are r-disjoint.  The
    theorem's conclusion is not re-derived here.
    """
    from .search import scale_dim_upper

    diags = []
    Y_r = frozenset(Y_r)
    pieces = [frozenset(p) for p in pieces]
    allpts = frozenset().union(*pieces) if pieces else frozenset()
    if allpts != frozenset(range(X.n)):
        diags.append(("coverage", "pieces do not cover the space"))
    B = search_bound
    subspaces, wits = [], []
    for i, p in enumerate(pieces):
        sub = X.subspace(p)
        subspaces.append(sub)
        w = piece_witnesses[i] if piece_witnesses else None
        if w is None:
            cert = scale_dim_upper(sub, d, B if B is not None else max(sub.diameter(range(sub.n)), 0), n)
            w = cert.witness if cert.verdict == "upper" else None
        wits.append(w)
    rep = check_uniform_asdim(subspaces, wits, d, n)
    if not rep.ok:
        diags += [("uniform-pieces", m) for m in rep.diagnostics]
    if Y_r:
        ysub = X.subspace(Y_r)
        w = y_witness
        if w is None:
            cert = scale_dim_upper(ysub, d, B if B is not None else ysub.diameter(range(ysub.n)), n)
            w = cert.witness if cert.verdict == "upper" else None
        yrep = check_uniform_asdim([ysub], [w], d, n)
        if not yrep.ok:
            diags += [("Y_r-certificate", m) for m in yrep.diagnostics]
    truncated = [p - Y_r for p in pieces]
    truncated = [p for p in truncated if p]
    v = disjointness_violation(X, truncated, r)
    if v is not None:
        diags.append(("r-disjoint", f"truncated pieces {v[0]} and {v[1]} at distance {v[2]} < {r}"))
    return CheckReport(not diags, rep.value, diags)
