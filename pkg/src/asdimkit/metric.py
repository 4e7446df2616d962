"""Finite metric spaces backed by a dense distance matrix."""

import hashlib
from fractions import Fraction

import numpy as np

from .errors import ValidationError

EXHAUSTIVE_TRIANGLE_LIMIT = 2000


class FiniteMetricSpace:
    """A finite indexed point set with a symmetric distance matrix.

    ``points`` are arbitrary hashable labels (group elements, tree vertices,
    sample points); all set-valued operations in the toolkit work with point
    indices.  Distances are integers for word metrics and floats only for
    sampled uniform complexes.
    """

    def __init__(self, points, dist, name=""):
        dist = np.asarray(dist)
        if dist.ndim != 2 or dist.shape[0] != dist.shape[1] or dist.shape[0] != len(points):
            raise ValidationError("distance matrix shape does not match point count")
        self.points = list(points)
        self.dist = dist
        self.name = name
        self._index = None

    def __len__(self):
        return len(self.points)

    def __repr__(self):
        return f"FiniteMetricSpace({self.name or 'unnamed'}, n={len(self)})"

    @property
    def n(self):
        return len(self.points)

    @property
    def is_integral(self):
        return np.issubdtype(self.dist.dtype, np.integer)

    def index(self, point):
        if self._index is None:
            self._index = {p: i for i, p in enumerate(self.points)}
        return self._index[point]

    def indices(self, pts):
        return [self.index(p) for p in pts]

    def d(self, i, j):
        v = self.dist[i, j]
        return int(v) if self.is_integral else float(v)

    def diameter(self, subset):
        idx = np.fromiter(subset, dtype=np.int64)
        if idx.size <= 1:
            return 0
        sub = self.dist[np.ix_(idx, idx)]
        v = sub.max()
        return int(v) if self.is_integral else float(v)

    def dist_to_set(self, subset):
        """Vector of d(x, subset) for every point; +inf where subset is empty."""
        idx = np.fromiter(subset, dtype=np.int64)
        if idx.size == 0:
            return np.full(self.n, np.inf)
        return self.dist[:, idx].min(axis=1)

    def neighborhood(self, subset, radius):
        """Closed neighborhood N_radius(subset) as a frozenset of indices."""
        dv = self.dist_to_set(subset)
        return frozenset(np.nonzero(dv <= radius)[0].tolist())

    def set_distance(self, a, b):
        ia = np.fromiter(a, dtype=np.int64)
        ib = np.fromiter(b, dtype=np.int64)
        if ia.size == 0 or ib.size == 0:
            return np.inf
        v = self.dist[np.ix_(ia, ib)].min()
        return int(v) if self.is_integral else float(v)

    def subspace(self, subset, name=""):
        idx = sorted(subset)
        return FiniteMetricSpace([self.points[i] for i in idx],
                                 self.dist[np.ix_(idx, idx)], name=name or self.name)

    def check_metric(self, sample=20000, seed=0):
        """Return a list of violated metric axioms (empty when the matrix is a metric).

        The triangle inequality is checked on all triples up to 2000 points and
        on ``sample`` random triples above that.
        """
        D = self.dist
        problems = []
        if np.any(np.diag(D) != 0):
            problems.append("nonzero diagonal")
        if not np.array_equal(D, D.T):
            problems.append("asymmetric")
        off = D + np.eye(self.n, dtype=D.dtype) * 1
        if self.n > 1 and np.any(off[~np.eye(self.n, dtype=bool)] <= 0):
            problems.append("zero distance between distinct points")
        if self.n <= EXHAUSTIVE_TRIANGLE_LIMIT:
            for k in range(self.n):
                if np.any(D > D[:, k:k + 1] + D[k:k + 1, :]):
                    problems.append(f"triangle inequality fails through point {k}")
                    break
        else:
            rng = np.random.default_rng(seed)
            x, y, z = rng.integers(0, self.n, size=(3, sample))
            if np.any(D[x, z] > D[x, y] + D[y, z]):
                problems.append("triangle inequality fails on sampled triple")
        return problems

    def fingerprint(self):
        h = hashlib.sha256()
        h.update(repr(self.points).encode())
        h.update(np.ascontiguousarray(self.dist).tobytes())
        h.update(str(self.dist.dtype).encode())
        return h.hexdigest()[:16]


def as_fraction(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x).limit_denominator(10 ** 9)


def line_space(lo, hi):
    """The integer segment [lo, hi] with |x - y|; handy for tests and recipes."""
    pts = list(range(lo, hi + 1))
    a = np.array(pts, dtype=np.int64)
    return FiniteMetricSpace(pts, np.abs(a[:, None] - a[None, :]), name=f"Z[{lo},{hi}]")
