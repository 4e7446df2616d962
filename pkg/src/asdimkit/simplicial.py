"""Oriented simplicial complexes in the uniform metric, nerves, projections and mapping cylinders.

Points of a complex are barycentric vectors with exact Fraction coordinates;
vertices play the role of an orthonormal basis, so distances are l2 norms of
coordinate differences.  Floats appear only in Lipschitz ratios.
"""

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ValidationError
from .metric import FiniteMetricSpace, as_fraction


def _faces(simplex):
    s = tuple(simplex)
    for r in range(1, len(s) + 1):
        for c in itertools.combinations(s, r):
            yield frozenset(c)


class OrientedComplex:
    """A finite simplicial complex whose vertex list order is the orientation."""

    def __init__(self, vertices, simplices=(), name=""):
        self.vertices = list(vertices)
        if len(set(self.vertices)) != len(self.vertices):
            raise ValidationError("repeated vertex in orientation")
        self.order = {v: i for i, v in enumerate(self.vertices)}
        self.simplices = set()
        for v in self.vertices:
            self.simplices.add(frozenset([v]))
        for s in simplices:
            self.add_simplex(s)
        self.name = name

    @classmethod
    def from_maximal(cls, vertices, maximal, name=""):
        return cls(vertices, maximal, name)

    def add_simplex(self, s):
        s = frozenset(s)
        if not s:
            return
        for v in s:
            if v not in self.order:
                raise ValidationError(f"simplex uses unknown vertex {v!r}")
        if s in self.simplices:
            return
        for f in _faces(s):
            self.simplices.add(f)

    def __contains__(self, s):
        return frozenset(s) in self.simplices

    def __repr__(self):
        return f"OrientedComplex({self.name or ''} V={len(self.vertices)} dim={self.dimension})"

    @property
    def dimension(self):
        return max((len(s) for s in self.simplices), default=0) - 1

    def maximal(self):
        """Maximal simplices as vertex tuples in orientation order, sorted."""
        out = []
        by_size = sorted(self.simplices, key=len, reverse=True)
        kept = []
        for s in by_size:
            if not any(s < m for m in kept):
                kept.append(s)
        for s in kept:
            out.append(self.ordered(s))
        return sorted(out, key=lambda t: [self.order[v] for v in t])

    def ordered(self, s):
        return tuple(sorted(s, key=self.order.__getitem__))

    def is_downward_closed(self):
        return all(f in self.simplices for s in self.simplices for f in _faces(s))

    def f_vector(self):
        counts = {}
        for s in self.simplices:
            counts[len(s) - 1] = counts.get(len(s) - 1, 0) + 1
        return [counts.get(i, 0) for i in range(self.dimension + 1)]

    def point(self, coords):
        return UniformPoint(self, coords)

    def vertex_point(self, v):
        return UniformPoint(self, {v: Fraction(1)})

    def to_text(self):
        lines = ["vertices: " + " ".join(_fmt(v) for v in self.vertices)]
        for m in self.maximal():
            lines.append(" ".join(_fmt(v) for v in m))
        return "\n".join(lines) + "\n"


def _fmt(v):
    if isinstance(v, tuple):
        return ":".join(_fmt(x) for x in v)
    return str(v)


class UniformPoint:
    """A point of a complex given by nonnegative exact barycentric coordinates."""

    __slots__ = ("complex", "coords")

    def __init__(self, complex_, coords):
        self.complex = complex_
        self.coords = {v: as_fraction(c) for v, c in coords.items() if c != 0}

    def __repr__(self):
        inner = ", ".join(f"{v!r}: {c}" for v, c in sorted(self.coords.items(), key=lambda kv: repr(kv[0])))
        return f"UniformPoint({{{inner}}})"

    def __eq__(self, other):
        return isinstance(other, UniformPoint) and self.coords == other.coords

    def __hash__(self):
        return hash(frozenset(self.coords.items()))

    def support(self):
        return frozenset(self.coords)

    def problems(self):
        out = []
        if sum(self.coords.values(), Fraction(0)) != 1:
            out.append("coordinates do not sum to 1")
        if any(c < 0 for c in self.coords.values()):
            out.append("negative coordinate")
        if self.complex is not None and self.support() not in self.complex.simplices:
            out.append("support is not a simplex")
        return out

    def is_valid(self):
        return not self.problems()


def uniform_distance_sq(p, q):
    if p.complex is not q.complex:
        raise ValidationError("points live in different complexes")
    total = Fraction(0)
    for v in p.coords.keys() | q.coords.keys():
        diff = p.coords.get(v, 0) - q.coords.get(v, 0)
        total += diff * diff
    return total


def uniform_distance(p, q):
    """l2 distance between barycentric vectors (vertices orthonormal)."""
    return math.sqrt(uniform_distance_sq(p, q))


def affine_combination(complex_, terms):
    """Exact sum of weight * point over (weight, UniformPoint) pairs."""
    coords = {}
    for w, p in terms:
        w = as_fraction(w)
        if w == 0:
            continue
        for v, c in p.coords.items():
            coords[v] = coords.get(v, 0) + w * c
    return UniformPoint(complex_, coords)


@dataclass
class SimplicialMap:
    domain: OrientedComplex
    codomain: OrientedComplex
    vertex_map: dict

    def image_simplex(self, s):
        return frozenset(self.vertex_map[v] for v in s)

    def problems(self):
        out = []
        for v in self.domain.vertices:
            if v not in self.vertex_map:
                out.append(f"vertex {v!r} unmapped")
            elif self.vertex_map[v] not in self.codomain.order:
                out.append(f"vertex {v!r} maps outside the codomain")
        if out:
            return out
        for s in self.domain.simplices:
            if self.image_simplex(s) not in self.codomain.simplices:
                out.append(f"image of {sorted(map(repr, s))} is not a simplex")
                break
        return out

    def is_simplicial(self):
        return not self.problems()

    def apply(self, p):
        coords = {}
        for v, c in p.coords.items():
            w = self.vertex_map[v]
            coords[w] = coords.get(w, 0) + c
        return UniformPoint(self.codomain, coords)


# -- nerves and canonical projections ------------------------------------------------

def nerve(cover, labels=None):
    """Nerve of a cover: vertex i per set, a simplex for every family with a common point."""
    m = len(cover.sets)
    labels = list(range(m)) if labels is None else list(labels)
    members = {}
    for i, s in enumerate(cover.sets):
        for p in s:
            members.setdefault(p, []).append(labels[i])
    K = OrientedComplex(labels, name="nerve")
    for sig in {frozenset(v) for v in members.values()}:
        K.add_simplex(sig)
    return K


def projection_weights(space, sets, points=None):
    """Float matrix (points x sets) of canonical-projection coordinates."""
    from .covers import complement_depths
    depth = complement_depths(space, sets)
    if points is not None:
        depth = depth[:, np.asarray(points, dtype=np.int64)]
    W = depth.T.copy()
    inf = np.isinf(W)
    rows_inf = inf.any(axis=1)
    W[rows_inf] = inf[rows_inf].astype(float)
    tot = W.sum(axis=1)
    if np.any(tot <= 0):
        raise ValidationError("canonical projection undefined: some point lies in no set")
    return W / tot[:, None]


def canonical_projection(space, cover, x, complex_=None, labels=None):
    """phi_U(x) = d(x, X - U) / sum_V d(x, X - V), exactly."""
    labels = list(range(len(cover.sets))) if labels is None else labels
    full = set(range(space.n))
    depths = []
    for s in cover.sets:
        if x not in s:
            depths.append(0)
            continue
        comp = full - s
        if not comp:
            depths.append(math.inf)
        else:
            depths.append(as_fraction(space.dist[x, list(comp)].min()))
    if any(dv == math.inf for dv in depths):
        depths = [1 if dv == math.inf else 0 for dv in depths]
    total = sum(depths)
    if total == 0:
        raise ValidationError(f"point {x} is not covered: zero denominator")
    coords = {labels[i]: Fraction(dv) / total for i, dv in enumerate(depths) if dv}
    return UniformPoint(complex_, coords)


def nu(epsilon, k):
    """(2k+3)^2 / epsilon as an exact rational."""
    eps = as_fraction(epsilon)
    if eps <= 0:
        raise ValidationError("epsilon must be positive")
    return Fraction((2 * k + 3) ** 2) / eps


# -- Lipschitz estimation --------------------------------------------------------------

@dataclass
class LipschitzReport:
    value: float
    pairs: int
    exhaustive: bool
    worst: tuple = None

    def __float__(self):
        return float(self.value)


def points_matrix(points, vertex_index):
    """Dense float rows for a list of UniformPoints."""
    P = np.zeros((len(points), len(vertex_index)))
    for i, p in enumerate(points):
        for v, c in p.coords.items():
            P[i, vertex_index[v]] = float(c)
    return P


def lipschitz_estimate(domain_dist, image=None, image_dist=None, max_exhaustive=3000,
                       samples=200_000, seed=0, subset=None):
    """max d(f x, f y) / d(x, y) over pairs of distinct points.

    ``image`` holds one l2 coordinate row per domain point; ``image_dist``
    may instead be a full distance matrix or a callable (i, j) -> float.
    Exhaustive up to ``max_exhaustive`` points, else a deterministic sample.
    """
    D = domain_dist.dist if isinstance(domain_dist, FiniteMetricSpace) else np.asarray(domain_dist)
    idx = np.arange(D.shape[0]) if subset is None else np.asarray(sorted(subset), dtype=np.int64)
    n = idx.size
    if n == 0:
        raise ValidationError("empty domain")
    if n == 1:
        return LipschitzReport(0.0, 0, True, None)
    if n <= max_exhaustive:
        best, worst, pairs = 0.0, None, n * (n - 1) // 2
        block = max(1, 2_000_000 // n)
        for lo in range(0, n, block):
            rows = idx[lo:lo + block]
            Dd = D[np.ix_(rows, idx)].astype(float)
            Id = _image_block(rows, idx, image, image_dist)
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(Dd > 0, Id / np.where(Dd > 0, Dd, 1.0), 0.0)
            k = np.unravel_index(np.argmax(ratio), ratio.shape)
            if ratio[k] > best:
                best = float(ratio[k])
                worst = (int(rows[k[0]]), int(idx[k[1]]))
        return LipschitzReport(best, pairs, True, worst)
    rng = np.random.default_rng(seed)
    a = idx[rng.integers(0, n, size=samples)]
    b = idx[rng.integers(0, n, size=samples)]
    keep = a != b
    a, b = a[keep], b[keep]
    Dd = D[a, b].astype(float)
    if image is not None:
        Id = np.linalg.norm(image[a] - image[b], axis=1)
    elif callable(image_dist):
        Id = np.array([image_dist(int(x), int(y)) for x, y in zip(a, b)])
    else:
        Id = np.asarray(image_dist)[a, b]
    ratio = Id / Dd
    k = int(np.argmax(ratio))
    return LipschitzReport(float(ratio[k]), int(a.size), False, (int(a[k]), int(b[k])))


def _image_block(rows, cols, image, image_dist):
    if image is not None:
        A, B = image[rows], image[cols]
        sq = (A * A).sum(axis=1)[:, None] + (B * B).sum(axis=1)[None, :] - 2 * A @ B.T
        out = np.sqrt(np.clip(sq, 0, None))
        # recompute the largest entries directly to avoid cancellation
        flat = np.argsort(out, axis=None)[-8:]
        for f in flat:
            i, j = np.unravel_index(f, out.shape)
            out[i, j] = np.linalg.norm(A[i] - B[j])
        return out
    if callable(image_dist):
        return np.array([[image_dist(int(i), int(j)) for j in cols] for i in rows])
    return np.asarray(image_dist)[np.ix_(rows, cols)].astype(float)


def embedding_lipschitz(domain_dist, image, subset=None, max_exhaustive=3000, seed=0):
    """Exact-as-floats Lipschitz constant of an l2 embedding (row per point).

    Unlike lipschitz_estimate this computes every ratio from direct
    differences of rows, in blocks, so it is the reference for final checks.
    """
    D = domain_dist.dist if isinstance(domain_dist, FiniteMetricSpace) else np.asarray(domain_dist)
    idx = np.arange(D.shape[0]) if subset is None else np.asarray(sorted(subset), dtype=np.int64)
    n = idx.size
    if n <= 1:
        return LipschitzReport(0.0, 0, True, None)
    if n > max_exhaustive:
        return lipschitz_estimate(D, image, subset=subset, max_exhaustive=max_exhaustive, seed=seed)
    best, worst = 0.0, None
    sub = image[idx]
    for i in range(n - 1):
        diff = sub[i + 1:] - sub[i]
        num = np.sqrt((diff * diff).sum(axis=1))
        den = D[idx[i], idx[i + 1:]].astype(float)
        r = num / den
        k = int(np.argmax(r))
        if r[k] > best:
            best = float(r[k])
            worst = (int(idx[i]), int(idx[i + 1 + k]))
    return LipschitzReport(best, n * (n - 1) // 2, True, worst)


# -- prisms and mapping cylinders --------------------------------------------------------

def prism_chains(k):
    """Maximal chains of {0..k} x {0,1} in the product order, as index pairs."""
    out = []
    for j in range(k + 1):
        out.append(tuple([(i, 0) for i in range(j + 1)] + [(i, 1) for i in range(j, k + 1)]))
    return out


def all_product_chains(k):
    """Every chain of {0..k} x {0,1} in the product order, by brute force."""
    elems = [(i, s) for i in range(k + 1) for s in (0, 1)]

    def less(a, b):
        return (a[0] < b[0] and a[1] <= b[1]) or (a[0] <= b[0] and a[1] < b[1])

    chains = set()
    for r in range(1, len(elems) + 1):
        for combo in itertools.combinations(elems, r):
            if all(less(x, y) or less(y, x) for x, y in itertools.combinations(combo, 2)):
                chains.add(frozenset(combo))
    return chains


def prism_triangulation(sigma):
    """Triangulate sigma x [0,1] by product-order chains; vertices (v, 0) and (v, 1)."""
    sigma = list(sigma)
    k = len(sigma) - 1
    verts = [(v, s) for v in sigma for s in (0, 1)]
    maximal = [[(sigma[i], s) for i, s in ch] for ch in prism_chains(k)]
    return OrientedComplex(verts, maximal, name=f"prism{k}")


@dataclass
class MappingCylinder:
    complex: OrientedComplex
    X: OrientedComplex
    Y: OrientedComplex
    g: SimplicialMap
    x_part: list = field(default_factory=list)
    y_part: list = field(default_factory=list)

    def problems(self):
        out = []
        if set(self.complex.vertices) != set(self.x_part) | set(self.y_part) or \
                len(self.complex.vertices) != len(self.X.vertices) + len(self.Y.vertices):
            out.append("vertex set is not Vert(X) + Vert(Y)")
        if not self.complex.is_downward_closed():
            out.append("not downward closed")
        xs = {frozenset(("X", v) for v in s) for s in self.X.simplices}
        if {s for s in self.complex.simplices if all(v[0] == "X" for v in s)} != xs:
            out.append("X copy is not a full subcomplex")
        ys = {frozenset(("Y", v) for v in s) for s in self.Y.simplices}
        if {s for s in self.complex.simplices if all(v[0] == "Y" for v in s)} != ys:
            out.append("Y is not a full subcomplex")
        return out


def mapping_cylinder(g):
    """Mapping cylinder of a simplicial map g: X -> Y with vertices ('X', v) and ('Y', w).

    Each prism sigma x [0,1] is cut by product-order chains in the orientation
    of X, then (v, 1) is identified with g(v) and the result is glued to Y.
    """
    probs = g.problems()
    if probs:
        raise ValidationError("map is not simplicial: " + probs[0])
    X, Y = g.domain, g.codomain
    x_part = [("X", v) for v in X.vertices]
    y_part = [("Y", w) for w in Y.vertices]
    M = OrientedComplex(x_part + y_part, name="cylinder")
    for s in Y.simplices:
        M.add_simplex(("Y", w) for w in s)
    for sig in X.maximal():
        k = len(sig) - 1
        for ch in prism_chains(k):
            M.add_simplex(("X", sig[i]) if s == 0 else ("Y", g.vertex_map[sig[i]]) for i, s in ch)
    return MappingCylinder(M, X, Y, g, x_part, y_part)


def prism_split(p_ordered, t):
    """Split weights p_0..p_k at height t into bottom and top parts of the staircase.

    bottom_i = clamp(sum_{l >= i} p_l - t) and top_i = clamp(t - sum_{l > i} p_l),
    clamped to [0, p_i]; bottom + top = p and sum(top) = t.
    """
    t = as_fraction(t)
    k = len(p_ordered)
    suffix = [Fraction(0)] * (k + 1)
    for i in range(k - 1, -1, -1):
        suffix[i] = suffix[i + 1] + p_ordered[i]
    bottom, top = [], []
    for i, pi in enumerate(p_ordered):
        b = min(pi, max(Fraction(0), suffix[i] - t))
        bottom.append(b)
        top.append(pi - b)
    return bottom, top


def cylinder_quotient(cyl, p, t):
    """Image of (p, t) in X x [0,1] under the quotient to the mapping cylinder."""
    t = as_fraction(t)
    if not 0 <= t <= 1:
        raise ValidationError("cylinder parameter must lie in [0, 1]")
    X = cyl.X
    verts = X.ordered(p.support())
    bottom, top = prism_split([p.coords[v] for v in verts], t)
    coords = {}
    for v, b, u in zip(verts, bottom, top):
        if b:
            coords[("X", v)] = coords.get(("X", v), 0) + b
        if u:
            w = ("Y", cyl.g.vertex_map[v])
            coords[w] = coords.get(w, 0) + u
    return UniformPoint(cyl.complex, coords)


def prism_uniformization(P, T):
    """Vectorised staircase coordinates for weights P (m x k) at heights T (m,).

    Returns an (m x 2k) array: bottom coordinates then top coordinates.
    """
    suffix = np.cumsum(P[:, ::-1], axis=1)[:, ::-1]
    bottom = np.minimum(P, np.maximum(0.0, suffix - T[:, None]))
    return np.concatenate([bottom, P - bottom], axis=1)


def prism_lipschitz_exact(k):
    """Lipschitz constant of the uniformization of the prism over a simplex with k vertices.

    The map is linear on each of the k chain simplices, so the constant is the
    largest operator norm of those linear parts on the tangent space
    {sum dp = 0} x R with the product metric.
    """
    if k < 1:
        raise ValidationError("a prism needs at least one vertex")
    # orthonormal basis of {sum = 0} in R^k
    if k > 1:
        A = np.eye(k) - 1.0 / k
        u, s, _ = np.linalg.svd(A)
        Q = u[:, : k - 1]
    else:
        Q = np.zeros((1, 0))
    best = 0.0
    for j in range(k):
        # bottom_i = p_i (i < j), sum_{l >= j} p_l - t (i = j), 0 (i > j)
        Mb = np.zeros((k, k + 1))
        for i in range(j):
            Mb[i, i] = 1
        Mb[j, j:k] = 1
        Mb[j, k] = -1
        # top = p - bottom
        Mt = np.eye(k, k + 1) - Mb
        M = np.vstack([Mb, Mt])
        basis = np.zeros((k + 1, k))
        basis[:k, : k - 1] = Q
        basis[k, k - 1] = 1
        best = max(best, float(np.linalg.norm(M @ basis, 2)))
    return best


def prism_lipschitz_sampled(k, samples=200000, seed=None):
    """Sampled Lipschitz ratio of the prism uniformization (deterministic per k)."""
    rng = np.random.default_rng(1000 + k if seed is None else seed)
    P = rng.dirichlet(np.ones(k), size=samples)
    T = rng.random(samples)
    # nearby partners probe the derivative, far partners probe the global ratio
    step = 10.0 ** rng.uniform(-6, -1, size=samples)
    dP = rng.normal(size=(samples, k))
    dP -= dP.mean(axis=1, keepdims=True)
    dT = rng.normal(size=samples)
    P2 = P + step[:, None] * dP
    T2 = np.clip(T + step * dT, 0, 1)
    ok = (P2 >= 0).all(axis=1)
    P2[~ok] = rng.dirichlet(np.ones(k), size=int((~ok).sum()))
    T2[~ok] = rng.random(int((~ok).sum()))
    dom = np.sqrt(((P - P2) ** 2).sum(axis=1) + (T - T2) ** 2)
    img = np.linalg.norm(prism_uniformization(P, T) - prism_uniformization(P2, T2), axis=1)
    keep = dom > 1e-12
    ratio = float((img[keep] / dom[keep]).max())
    # the t = 0 face is an isometric copy of the simplex
    if k >= 2:
        ratio = max(ratio, 1.0)
    return ratio, int(keep.sum())


def estimate_cn(n, samples=200000, cap=3):
    """max of sampled lambda_k for 1 <= k <= 2n+2, with per-k details."""
    if n > cap:
        raise ValidationError(f"n = {n} exceeds the configured cap {cap}")
    per_k = {}
    for k in range(1, 2 * n + 3):
        per_k[k] = prism_lipschitz_sampled(k, samples)
    value = max(v for v, _ in per_k.values())
    return value, {"lambda": {k: v for k, (v, _) in per_k.items()},
                   "samples_per_k": samples}


# -- gluing --------------------------------------------------------------------------------

@dataclass
class GlueReport:
    ok: bool
    inner: float
    outer: float
    global_ratio: float
    eta: float
    witness: tuple = None


def glue_check(space, A, W, r, image, epsilon):
    """Check the gluing principle for f on W with pieces N_r(A) and W - N_r(A).

    Geodesics are replaced by shortest paths of the ambient metric: for every
    cross pair the best split point z with d(z, A) = r inside W gives a slack
    eta = (d(x,z) + d(z,y)) / d(x,y) - 1 (zero when z lies on a geodesic).
    """
    W = sorted(W)
    eps = float(epsilon)
    dA = space.dist_to_set(A)
    inner = [p for p in W if dA[p] <= r]
    outer = [p for p in W if dA[p] > r]
    li = embedding_lipschitz(space, image, subset=inner).value if inner else 0.0
    lo = embedding_lipschitz(space, image, subset=outer).value if outer else 0.0
    lg = embedding_lipschitz(space, image, subset=W)
    eta, worst = 0.0, None
    bd = np.array([p for p in W if dA[p] == r], dtype=np.int64)
    if inner and outer:
        if bd.size == 0:
            return GlueReport(False, li, lo, lg.value, math.inf, None)
        Dm = space.dist
        oi = np.array(outer, dtype=np.int64)
        for x in inner:
            via = Dm[x, bd][:, None] + Dm[np.ix_(bd, oi)]
            best = via.min(axis=0)
            ratio = best / Dm[x, oi]
            k = int(np.argmax(ratio))
            if ratio[k] - 1 > eta:
                eta = float(ratio[k] - 1)
                z = int(bd[int(np.argmin(via[:, k]))])
                worst = (x, z, int(oi[k]))
    ok = li <= eps + 1e-12 and lo <= eps + 1e-12 and lg.value <= eps * (1 + eta) + 1e-12
    return GlueReport(ok, li, lo, lg.value, eta, worst)


# -- open stars and pullbacks ---------------------------------------------------------------

def barycentric_grid(K, m):
    """All points with coordinates in (1/m)Z on every maximal simplex of K."""
    pts = {}
    for sig in K.maximal():
        k = len(sig)
        for comp in _compositions(m, k):
            coords = {v: Fraction(c, m) for v, c in zip(sig, comp) if c}
            p = UniformPoint(K, coords)
            pts[p] = None
    return list(pts)


def _compositions(m, k):
    if k == 1:
        yield (m,)
        return
    for first in range(m + 1):
        for rest in _compositions(m - first, k - 1):
            yield (first,) + rest


def sample_space(K, points):
    """FiniteMetricSpace of sample points in the uniform metric (floats)."""
    index = {v: i for i, v in enumerate(K.vertices)}
    P = points_matrix(points, index)
    sq = (P * P).sum(axis=1)
    D = np.sqrt(np.clip(sq[:, None] + sq[None, :] - 2 * P @ P.T, 0, None))
    np.fill_diagonal(D, 0)
    return FiniteMetricSpace(points, D, name="uniform sample")


def open_star_cover(K, points, space=None):
    """Cover of the sample by open stars: one set per vertex, positive coordinate there."""
    from .covers import Cover
    space = space if space is not None else sample_space(K, points)
    sets = []
    for v in K.vertices:
        sets.append(frozenset(i for i, p in enumerate(points) if p.coords.get(v, 0) > 0))
    return Cover(space, [s for s in sets if s])


def pullback_cover(space, images, K, vertices=None):
    """Preimages of the open stars of K's vertices under a point map (one image per point)."""
    from .covers import Cover
    vertices = K.vertices if vertices is None else vertices
    sets = {v: [] for v in vertices}
    for i, p in enumerate(images):
        for v, c in p.coords.items():
            if c > 0 and v in sets:
                sets[v].append(i)
    labels = [v for v in vertices if sets[v]]
    return Cover(space, [sets[v] for v in labels]), labels


def simplex_preimage_diameters(space, images, K):
    """For each maximal simplex, the diameter of the points whose image lies in it."""
    supports = [p.support() for p in images]
    out = {}
    for sig in K.maximal():
        s = frozenset(sig)
        pts = [i for i, sup in enumerate(supports) if sup <= s]
        if pts:
            out[sig] = space.diameter(pts)
    return out


def to_dot(K, name="K"):
    lines = [f"graph {name} {{"]
    ids = {v: f"v{i}" for i, v in enumerate(K.vertices)}
    for v in K.vertices:
        lines.append(f'  {ids[v]} [label="{_fmt(v)}"];')
    for s in sorted((s for s in K.simplices if len(s) == 2), key=lambda e: sorted(K.order[v] for v in e)):
        a, b = K.ordered(s)
        lines.append(f"  {ids[a]} -- {ids[b]};")
    lines.append("}")
    return "\n".join(lines) + "\n"
