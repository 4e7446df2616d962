"""Finitely generated group models, word norms and Cayley balls."""

from collections import deque
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .errors import BudgetExceeded, ValidationError
from .metric import FiniteMetricSpace

DEFAULT_CAP = 2_000_000


class GroupModel:
    """A group given by a symmetric generating set and multiplication oracles.

    Subclasses supply ``identity``, ``generators``, ``multiply``, ``invert``
    and, when elements are not already canonical, ``normal_form``.
    ``closed_norm`` may return an exact norm without search (or ``None``).
    """

    kind = "abstract"
    generators: tuple = ()
    generator_names: tuple = ()
    identity: Any = None

    def multiply(self, a, b):
        raise NotImplementedError

    def invert(self, a):
        raise NotImplementedError

    def normal_form(self, a):
        return a

    def sort_key(self, a):
        return a

    def closed_norm(self, g):
        return None

    def norm(self, g):
        """Word norm with a per-model cache (closed form when available)."""
        cache = self.__dict__.setdefault("_norms", {})
        g = self.normal_form(g)
        v = cache.get(g)
        if v is None:
            v = word_norm(self, g)
            cache[g] = v
        return v

    def ball_elements(self, radius, cap=DEFAULT_CAP):
        """Elements of norm <= radius ordered by (norm, sort key); cached."""
        cache = self.__dict__.setdefault("_balls", {})
        if radius not in cache:
            norms = self.bfs_ball(radius, cap=cap)
            nc = self.__dict__.setdefault("_norms", {})
            nc.update(norms)
            cache[radius] = sorted(norms, key=lambda g: (norms[g], self.sort_key(g)))
        return cache[radius]

    def word(self, letters):
        """Multiply out a sequence of generator names."""
        table = dict(zip(self.generator_names, self.generators))
        g = self.identity
        for name in letters:
            g = self.multiply(g, table[name])
        return g

    def check_generators(self):
        inv = {self.normal_form(self.invert(s)) for s in self.generators}
        if inv != {self.normal_form(s) for s in self.generators}:
            raise ValidationError(f"{self.kind} generating set is not symmetric")

    def bfs_ball(self, radius, cap=DEFAULT_CAP):
        """Elements of norm <= radius with their norms, by breadth-first search."""
        start = self.normal_form(self.identity)
        norms = {start: 0}
        frontier = [start]
        for k in range(1, radius + 1):
            nxt = []
            for g in frontier:
                for s in self.generators:
                    h = self.normal_form(self.multiply(g, s))
                    if h not in norms:
                        norms[h] = k
                        nxt.append(h)
                        if len(norms) > cap:
                            raise BudgetExceeded(
                                f"{self.kind} ball of radius {radius} exceeds cap {cap}")
            frontier = nxt
            if not frontier:
                break
        return norms

    def distance_matrix(self, elements, radius, cap=DEFAULT_CAP):
        """Ambient word distances among ``elements`` (all of norm <= radius).

        A geodesic between two points of the radius-R ball stays inside the
        radius-2R ball, so graph distances in that ball are ambient distances.
        """
        norms = self.bfs_ball(2 * radius, cap=cap)
        nodes = list(norms)
        index = {g: i for i, g in enumerate(nodes)}
        rows, cols = [], []
        for i, g in enumerate(nodes):
            for s in self.generators:
                j = index.get(self.normal_form(self.multiply(g, s)))
                if j is not None:
                    rows.append(i)
                    cols.append(j)
        adj = csr_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)),
                         shape=(len(nodes), len(nodes)))
        src = np.array([index[self.normal_form(e)] for e in elements], dtype=np.int64)
        out = np.empty((len(src), len(src)), dtype=np.int32)
        chunk = max(1, 20_000_000 // max(len(nodes), 1))
        for lo in range(0, len(src), chunk):
            dm = shortest_path(adj, method="D", unweighted=True, indices=src[lo:lo + chunk])
            out[lo:lo + chunk] = dm[:, src]
        return out


class FiniteTableGroup(GroupModel):
    """A finite group given by its full multiplication table on 0..n-1."""

    kind = "finite-table"

    def __init__(self, table, generators, names=None):
        self.table = np.asarray(table, dtype=np.int64)
        n = self.table.shape[0]
        if self.table.shape != (n, n):
            raise ValidationError("multiplication table must be square")
        ids = [e for e in range(n)
               if np.array_equal(self.table[e], np.arange(n))
               and np.array_equal(self.table[:, e], np.arange(n))]
        if len(ids) != 1:
            raise ValidationError("table has no two-sided identity")
        self.identity = ids[0]
        self._inv = np.full(n, -1, dtype=np.int64)
        for a in range(n):
            hits = np.nonzero(self.table[a] == self.identity)[0]
            if len(hits) != 1 or self.table[hits[0], a] != self.identity:
                raise ValidationError(f"element {a} has no two-sided inverse")
            self._inv[a] = hits[0]
        gens = list(dict.fromkeys(int(g) for g in generators))
        for g in list(gens):
            if int(self._inv[g]) not in gens:
                gens.append(int(self._inv[g]))
        self.generators = tuple(gens)
        self.generator_names = tuple(names) if names else tuple(f"g{g}" for g in gens)
        self.order = n

    def multiply(self, a, b):
        return int(self.table[a, b])

    def invert(self, a):
        return int(self._inv[a])

    def elements(self):
        return list(range(self.order))

    def check_associativity(self):
        T = self.table
        n = self.order
        # (ab)c versus a(bc) over all triples
        left = T[T[:, :, None], np.arange(n)[None, None, :]]
        right = T[np.arange(n)[:, None, None], T[None, :, :]]
        return bool(np.array_equal(left, right))


def trivial_group():
    return FiniteTableGroup([[0]], [], names=[])


def cyclic_group(n):
    table = [[(i + j) % n for j in range(n)] for i in range(n)]
    if n == 1:
        return FiniteTableGroup(table, [], names=[])
    if n == 2:
        return FiniteTableGroup(table, [1], names=["c"])
    return FiniteTableGroup(table, [1], names=["c", "C"])


class FreeAbelianGroup(GroupModel):
    """Z^m with elements as integer tuples.

    With the standard generators the norm is the l1 norm; a custom symmetric
    generating set falls back to breadth-first search.
    """

    kind = "free-abelian"

    def __init__(self, rank, generators=None, names=None):
        self.rank = rank
        self.identity = (0,) * rank
        if generators is None:
            gens = []
            for i in range(rank):
                e = [0] * rank
                e[i] = 1
                gens.append(tuple(e))
                e[i] = -1
                gens.append(tuple(e))
            self.standard = True
        else:
            gens = [tuple(int(c) for c in g) for g in generators]
            for g in list(gens):
                ng = tuple(-c for c in g)
                if ng not in gens:
                    gens.append(ng)
            self.standard = False
        self.generators = tuple(gens)
        if names:
            self.generator_names = tuple(names)
        elif generators is None:
            letters = "xyzwuv"
            nm = []
            for i in range(rank):
                c = letters[i] if i < len(letters) else f"e{i}"
                nm += [c, c.upper()]
            self.generator_names = tuple(nm)
        else:
            self.generator_names = tuple(f"s{i}" for i in range(len(gens)))

    def multiply(self, a, b):
        return tuple(x + y for x, y in zip(a, b))

    def invert(self, a):
        return tuple(-x for x in a)

    def sort_key(self, a):
        return a

    def closed_norm(self, g):
        if self.standard:
            return sum(abs(c) for c in g)
        return None

    def distance_matrix(self, elements, radius, cap=DEFAULT_CAP):
        if not self.standard:
            return super().distance_matrix(elements, radius, cap)
        a = np.array(elements, dtype=np.int64).reshape(len(elements), self.rank)
        out = np.zeros((len(a), len(a)), dtype=np.int32)
        for c in range(self.rank):
            out += np.abs(a[:, c][:, None] - a[:, c][None, :]).astype(np.int32)
        return out


class FreeGroup(GroupModel):
    """Free group of rank m; elements are freely reduced tuples of nonzero ints.

    Letter ``i`` is the i-th generator and ``-i`` its inverse.
    """

    kind = "free"

    def __init__(self, rank, names=None):
        self.rank = rank
        self.identity = ()
        gens = []
        for i in range(1, rank + 1):
            gens += [(i,), (-i,)]
        self.generators = tuple(gens)
        if names:
            self.generator_names = tuple(names)
        else:
            letters = "abcdefgh"
            nm = []
            for i in range(rank):
                nm += [letters[i], letters[i].upper()]
            self.generator_names = tuple(nm)

    @staticmethod
    def reduce(word):
        out = []
        for x in word:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
        return tuple(out)

    def multiply(self, a, b):
        # a and b are reduced: cancellation only happens at the seam
        k = 0
        while k < len(a) and k < len(b) and a[len(a) - 1 - k] == -b[k]:
            k += 1
        return a[: len(a) - k] + b[k:]

    def invert(self, a):
        return tuple(-x for x in reversed(a))

    def normal_form(self, a):
        return self.reduce(a)

    def sort_key(self, a):
        # shortlex with letter order a < A < b < B ...
        return tuple((abs(x), 0 if x > 0 else 1) for x in a)

    def closed_norm(self, g):
        return len(self.reduce(g))

    def distance_matrix(self, elements, radius, cap=DEFAULT_CAP):
        # d(x, y) = |x| + |y| - 2 |common prefix|, vectorised over prefix ids
        n = len(elements)
        depth = np.array([len(e) for e in elements], dtype=np.int32)
        L = int(depth.max()) if n else 0
        prefix_ids = {}
        anc = np.full((n, L), -1, dtype=np.int64)
        for i, e in enumerate(elements):
            for k in range(1, len(e) + 1):
                anc[i, k - 1] = prefix_ids.setdefault(e[:k], len(prefix_ids))
        out = np.empty((n, n), dtype=np.int32)
        chunk = max(1, 4_000_000 // max(n * max(L, 1), 1))
        for lo in range(0, n, chunk):
            blk = anc[lo:lo + chunk]
            eq = (blk[:, None, :] == anc[None, :, :]) & (blk[:, None, :] >= 0)
            lcp = eq.sum(axis=2)
            out[lo:lo + chunk] = depth[lo:lo + chunk, None] + depth[None, :] - 2 * lcp
        return out


def word_norm(model, g, cap=DEFAULT_CAP):
    """The word norm of ``g`` with respect to the model's generating set.

    Uses the model's exact closed form when it has one; otherwise searches the
    Cayley graph breadth-first until ``g`` is reached or ``cap`` is exceeded.
    """
    g = model.normal_form(g)
    cn = model.closed_norm(g)
    if cn is not None:
        return cn
    return _bfs_norm(model, g, cap)


def _bfs_norm(model, g, cap=DEFAULT_CAP):
    start = model.normal_form(model.identity)
    if g == start:
        return 0
    seen = {start}
    queue = deque([(start, 0)])
    while queue:
        h, k = queue.popleft()
        for s in model.generators:
            nh = model.normal_form(model.multiply(h, s))
            if nh in seen:
                continue
            if nh == g:
                return k + 1
            seen.add(nh)
            if len(seen) > cap:
                raise BudgetExceeded(f"norm search exceeded cap {cap}")
            queue.append((nh, k + 1))
    raise ValidationError("element not reachable from the generators")


def word_metric(model, x, y, cap=DEFAULT_CAP):
    return word_norm(model, model.multiply(model.invert(x), y), cap)


@dataclass
class CayleyBall:
    model: GroupModel
    radius: int
    elements: list
    norms: list
    space: FiniteMetricSpace = field(repr=False)
    center: Any = None

    def __len__(self):
        return len(self.elements)

    def index(self, g):
        return self.space.index(self.model.normal_form(g))


def cayley_ball(model, radius, cap=DEFAULT_CAP):
    """All elements of norm <= radius with the ambient word metric.

    Elements are ordered by (norm, sort key).  Distances are computed in the
    whole group, not along paths inside the ball.
    """
    if radius < 0:
        raise ValidationError("radius must be nonnegative")
    norms = model.bfs_ball(radius, cap=cap)
    elements = sorted(norms, key=lambda g: (norms[g], model.sort_key(g)))
    dist = model.distance_matrix(elements, radius, cap=cap)
    space = FiniteMetricSpace(elements, dist, name=f"{model.kind} ball R={radius}")
    return CayleyBall(model, radius, elements, [norms[g] for g in elements], space,
                      center=model.identity)


def free_group_ball_size(rank, radius):
    if radius == 0:
        return 1
    return 1 + 2 * rank * ((2 * rank - 1) ** radius - 1) // (2 * rank - 2) if rank > 1 else 2 * radius + 1


def free_abelian_ball_size(rank, radius):
    # number of integer points with l1 norm <= radius
    from math import comb
    return sum(comb(rank, k) * comb(radius, k) * 2 ** k for k in range(rank + 1))
