"""Graphs of groups, path words and their reduction, and Bass-Serre tree balls.

A word of type c is ``r0 y1 r1 ... yn rn``: a path y1..yn in the graph with a
vertex-group coefficient before, between and after the edges.  Words are
stored as ``GWord(start, edges, coeffs)`` with ``len(coeffs) == len(edges)+1``.

Supported vertex and edge groups are finite tables and free abelian groups;
an injection is given by the images of the source generators.
"""

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
import itertools
import math

import numpy as np

from .errors import BudgetExceeded, OracleFailure, ValidationError
from .groups import DEFAULT_CAP, FiniteTableGroup, FreeAbelianGroup, GroupModel


# ---------------------------------------------------------------- linear algebra

def _row_reduce(M, b=None):
    """Reduced row echelon form over Q of M (optionally augmented by b).

    Returns (rows, pivot columns).
    """
    m = len(M)
    r = len(M[0]) if m else 0
    A = [[Fraction(x) for x in row] for row in M]
    if b is not None:
        for row, bi in zip(A, b):
            row.append(Fraction(bi))
    pivots = []
    row = 0
    for col in range(r):
        p = next((i for i in range(row, m) if A[i][col] != 0), None)
        if p is None:
            continue
        A[row], A[p] = A[p], A[row]
        pv = A[row][col]
        A[row] = [x / pv for x in A[row]]
        for i in range(m):
            if i != row and A[i][col] != 0:
                f = A[i][col]
                A[i] = [x - f * y for x, y in zip(A[i], A[row])]
        pivots.append(col)
        row += 1
    return A, pivots


def solve_integer(M, b):
    """The integer vector a with M a = b, or None (M has full column rank)."""
    r = len(M[0]) if M else 0
    A, pivots = _row_reduce(M, b)
    for i in range(len(pivots), len(A)):
        if A[i][r] != 0:
            return None
    sol = [Fraction(0)] * r
    for i, col in enumerate(pivots):
        sol[col] = A[i][r]
    if any(x.denominator != 1 for x in sol):
        return None
    return tuple(int(x) for x in sol)


def _rank(M):
    if not M or not M[0]:
        return 0
    return len(_row_reduce(M)[1])


def _det(M):
    n = len(M)
    A = [[Fraction(x) for x in row] for row in M]
    det = Fraction(1)
    for c in range(n):
        p = next((i for i in range(c, n) if A[i][c] != 0), None)
        if p is None:
            return 0
        if p != c:
            A[c], A[p] = A[p], A[c]
            det = -det
        det *= A[c][c]
        for i in range(c + 1, n):
            f = A[i][c] / A[c][c]
            A[i] = [x - f * y for x, y in zip(A[i], A[c])]
    return int(det)


# ---------------------------------------------------------------- injections

def _order(G):
    return G.order if isinstance(G, FiniteTableGroup) else None


def _is_trivial(G):
    if isinstance(G, FiniteTableGroup):
        return G.order == 1
    return isinstance(G, FreeAbelianGroup) and G.rank == 0


class Injection:
    """An injective homomorphism given by generator images, with image oracles.

    ``images`` lists the image of each standard source generator: for a free
    abelian source the unit vectors, for a finite table the listed generators.
    """

    def __init__(self, source, target, images, name=""):
        self.source, self.target, self.name = source, target, name
        self._reps = {}
        if _is_trivial(source):
            self.kind = "trivial"
            self.images = []
        elif isinstance(source, FreeAbelianGroup) and isinstance(target, FreeAbelianGroup):
            if not source.standard or not target.standard:
                raise ValidationError("free abelian injections need standard generators")
            self.kind = "matrix"
            self.images = [tuple(int(c) for c in v) for v in images]
            if len(self.images) != source.rank or any(len(v) != target.rank for v in self.images):
                raise ValidationError(f"{name}: image shape does not match ranks")
            # columns are the images of the unit vectors
            self.M = [[self.images[j][i] for j in range(source.rank)] for i in range(target.rank)]
            if _rank(self.M) != source.rank:
                raise ValidationError(f"{name}: map is not injective")
        elif isinstance(source, FiniteTableGroup) and isinstance(target, FiniteTableGroup):
            self.kind = "table"
            self.images = [int(v) for v in images]
            self._build_table()
        else:
            raise ValidationError(
                f"{name}: no injective homomorphism {source.kind} -> {target.kind} supported")
        self._index = self._compute_index()

    def _build_table(self):
        src, tgt = self.source, self.target
        base = list(src.generators)
        # images are listed for a prefix of the generators; inverses follow
        img = {}
        for g, v in zip(base, self.images):
            img[g] = v
            img.setdefault(src.invert(g), tgt.invert(v))
        missing = [g for g in base if g not in img]
        if missing:
            raise ValidationError(f"{self.name}: no image for generator(s) {missing}")
        table = {src.identity: tgt.identity}
        queue = deque([src.identity])
        while queue:
            a = queue.popleft()
            for s in base:
                b = src.multiply(a, s)
                if b not in table:
                    table[b] = tgt.multiply(table[a], img[s])
                    queue.append(b)
        if len(table) != src.order:
            raise ValidationError(f"{self.name}: source generators do not generate")
        for a in range(src.order):
            for b in range(src.order):
                if table[src.multiply(a, b)] != tgt.multiply(table[a], table[b]):
                    raise ValidationError(f"{self.name}: generator images are not a homomorphism")
        if len(set(table.values())) != src.order:
            raise ValidationError(f"{self.name}: map is not injective")
        self.table = table
        self.inverse_table = {v: k for k, v in table.items()}

    def apply(self, a):
        if self.kind == "trivial":
            return self.target.identity
        if self.kind == "matrix":
            return tuple(sum(row[j] * a[j] for j in range(len(a))) for row in self.M)
        return self.table[a]

    def preimage(self, b):
        """The source element mapping to b, or None when b is not in the image."""
        if self.kind == "trivial":
            return self.source.identity if b == self.target.identity else None
        if self.kind == "matrix":
            if len(self.M[0]) == 1:
                return self._rank1_preimage(b)
            return solve_integer(self.M, b)
        return self.inverse_table.get(b)

    def _rank1_preimage(self, b):
        col = [row[0] for row in self.M]
        i = next(i for i, v in enumerate(col) if v != 0)
        q, rem = divmod(b[i], col[i])
        if rem:
            return None
        if any(q * v != bi for v, bi in zip(col, b)):
            return None
        return (q,)

    def contains(self, b):
        return self.preimage(b) is not None

    def _compute_index(self):
        tgt = self.target
        if self.kind == "table" or (self.kind == "trivial" and isinstance(tgt, FiniteTableGroup)):
            size = len(self.table) if self.kind == "table" else 1
            return tgt.order // size
        if self.kind == "trivial":
            return 1 if tgt.rank == 0 else None
        if len(self.M[0]) == len(self.M):
            return abs(_det(self.M))
        return None

    @property
    def index(self):
        """[target : image], or None when infinite."""
        return self._index

    def coset_rep(self, b):
        """Canonical representative of the left coset b * image.

        The representative minimizes (norm, sort key) over the coset; for
        free abelian targets of image rank >= 2 it is the best point of a
        window around the rounded rational solution, which is still a
        function of the coset alone.
        """
        hit = self._reps.get(b)
        if hit is not None:
            return hit
        G = self.target
        if self.kind == "trivial":
            rep = b
        elif self.kind == "table":
            rep = min((G.multiply(b, h) for h in self.inverse_table),
                      key=lambda g: (G.norm(g), G.sort_key(g)))
        elif len(self.M[0]) == 1:
            rep = self._rank1_rep(b)
        else:
            rep = self._window_rep(b)
        self._reps[b] = rep
        return rep

    def _rank1_rep(self, b):
        v = [row[0] for row in self.M]

        def f(t):
            return sum(abs(bi + t * vi) for bi, vi in zip(b, v))

        bps = [Fraction(-bi, vi) for bi, vi in zip(b, v) if vi != 0]
        lo = math.floor(min(bps)) - 1
        hi = math.ceil(max(bps)) + 1

        def first(pred):
            a, z = lo, hi
            while a < z:
                mid = (a + z) // 2
                if pred(mid):
                    z = mid
                else:
                    a = mid + 1
            return a

        left = first(lambda t: f(t + 1) - f(t) >= 0)
        right = first(lambda t: f(t + 1) - f(t) > 0)
        cands = [tuple(bi + t * vi for bi, vi in zip(b, v)) for t in (left, right)]
        return min(cands, key=lambda g: (sum(map(abs, g)), g))

    def _window_rep(self, b, width=2):
        r = len(self.M[0])
        A, pivots = _row_reduce([row[:] for row in self.M], b)
        # centre from the pivot rows, rounded half up so that translating b by
        # an image vector translates the window
        centre = [Fraction(0)] * r
        for i, col in enumerate(pivots):
            centre[col] = A[i][r]
        centre = [math.floor(c + Fraction(1, 2)) for c in centre]
        best = None
        for off in itertools.product(range(-width, width + 1), repeat=r):
            t = [c + o for c, o in zip(centre, off)]
            g = tuple(bi - sum(row[j] * t[j] for j in range(r)) for bi, row in zip(b, self.M))
            key = (sum(map(abs, g)), g)
            if best is None or key < best:
                best = key
        return best[1]

    def transversal(self, budget=None):
        """Canonical coset representatives, sorted by (norm, key).

        All of them for finite index; otherwise those of norm <= budget.
        """
        G = self.target
        if self._index is not None:
            reps = set()
            radius = 0
            while len(reps) < self._index:
                for g in G.ball_elements(radius):
                    reps.add(self.coset_rep(g))
                radius += 1
                if radius > 10_000:
                    raise OracleFailure("transversal enumeration did not terminate")
        else:
            if budget is None:
                raise ValidationError("infinite index transversal needs a norm budget")
            reps = {self.coset_rep(g) for g in G.ball_elements(budget)}
            reps = {g for g in reps if G.norm(g) <= budget}
        return sorted(reps, key=lambda g: (G.norm(g), G.sort_key(g)))

    def check(self, samples=50):
        """Homomorphism and injectivity checks on generators and sampled products."""
        src, tgt = self.source, self.target
        els = src.ball_elements(2)[:samples]
        for a in els:
            for c in els:
                if self.apply(src.multiply(a, c)) != tgt.multiply(self.apply(a), self.apply(c)):
                    return False
                if a != c and self.apply(a) == self.apply(c):
                    return False
        return all(self.preimage(self.apply(a)) == a for a in els)


# ---------------------------------------------------------------- words

@dataclass(frozen=True)
class GWord:
    start: str
    edges: tuple
    coeffs: tuple

    @property
    def length(self):
        return len(self.edges)


@dataclass
class Edge:
    name: str
    bar: str
    origin: str
    terminus: str


class GraphOfGroups:
    """A graph of groups with base vertex and maximal tree.

    ``edges`` is a list of dicts with keys name, bar, origin, terminus, group,
    phi (images into the terminus group) and phibar (images into the origin
    group).  Each dict describes the pair {y, ybar}.
    """

    def __init__(self, vertex_groups, edges, base, tree=(), name=""):
        self.name = name
        self.vertex_groups = dict(vertex_groups)
        self.base = base
        self.edges = {}
        self.edge_group = {}
        self.phi = {}
        for spec in edges:
            y = spec["name"]
            yb = spec.get("bar") or _default_bar(y)
            if y == yb:
                raise ValidationError(f"edge {y} is its own reverse")
            for e in (y, yb):
                if e in self.edges:
                    raise ValidationError(f"duplicate edge name {e}")
            o, t = spec["origin"], spec["terminus"]
            for v in (o, t):
                if v not in self.vertex_groups:
                    raise ValidationError(f"edge {y} uses unknown vertex {v}")
            self.edges[y] = Edge(y, yb, o, t)
            self.edges[yb] = Edge(yb, y, t, o)
            G = spec.get("group") or FreeAbelianGroup(0)
            self.edge_group[y] = self.edge_group[yb] = G
            self.phi[y] = Injection(G, self.vertex_groups[t], spec.get("phi", []), name=f"phi_{y}")
            self.phi[yb] = Injection(G, self.vertex_groups[o], spec.get("phibar", []), name=f"phi_{yb}")
        if base not in self.vertex_groups:
            raise ValidationError(f"unknown base vertex {base}")
        tree = set(tree)
        for y in list(tree):
            if y not in self.edges:
                raise ValidationError(f"unknown tree edge {y}")
            tree.add(self.edges[y].bar)
        self.tree = frozenset(tree)
        self._check_tree()
        self._tree_paths = self._compute_tree_paths()

    # -- structure

    def bar(self, y):
        return self.edges[y].bar

    def origin(self, y):
        return self.edges[y].origin

    def terminus(self, y):
        return self.edges[y].terminus

    @property
    def vertices(self):
        return list(self.vertex_groups)

    def edges_from(self, P):
        return [y for y, e in self.edges.items() if e.origin == P]

    def _check_tree(self):
        verts = self.vertices
        pairs = {frozenset((y, self.bar(y))) for y in self.tree}
        if len(pairs) != len(verts) - 1:
            raise ValidationError("tree edges do not form a spanning tree (wrong count)")
        seen = {self.base}
        stack = [self.base]
        while stack:
            P = stack.pop()
            for y in self.edges_from(P):
                if y in self.tree and self.terminus(y) not in seen:
                    seen.add(self.terminus(y))
                    stack.append(self.terminus(y))
        if len(seen) != len(verts):
            raise ValidationError("tree edges do not span the graph")

    def _compute_tree_paths(self):
        paths = {self.base: ()}
        queue = deque([self.base])
        while queue:
            P = queue.popleft()
            for y in self.edges_from(P):
                Q = self.terminus(y)
                if y in self.tree and Q not in paths:
                    paths[Q] = paths[P] + (y,)
                    queue.append(Q)
        return paths

    def validate(self):
        """Check involution, endpoints and injection homomorphisms."""
        for y, e in self.edges.items():
            b = self.edges[e.bar]
            if b.bar != y or b.origin != e.terminus or b.terminus != e.origin:
                raise ValidationError(f"edge {y}: involution or endpoints inconsistent")
            if self.edge_group[y] is not self.edge_group[e.bar]:
                raise ValidationError(f"edge {y}: G_y and G_ybar differ")
            if not self.phi[y].check():
                raise ValidationError(f"phi_{y} fails homomorphism checks")
        return True

    # -- words

    def terminal(self, w):
        return self.terminus(w.edges[-1]) if w.edges else w.start

    def vertex_path(self, w):
        out = [w.start]
        for y in w.edges:
            out.append(self.terminus(y))
        return out

    def identity(self, P=None):
        P = self.base if P is None else P
        return GWord(P, (), (self.vertex_groups[P].identity,))

    def word(self, start, *items):
        """Build a word from alternating coefficients and edge names.

        ``gog.word("P", 3, "y", 1, "Y")`` is 3 y 1 ybar 0; omitted coefficients
        are the identity and free abelian coefficients may be given as ints
        when the group has rank one.
        """
        edges, coeffs = [], []
        P = start
        pending = None
        for it in items:
            if isinstance(it, str) and it in self.edges:
                coeffs.append(self._coerce(P, pending))
                if self.origin(it) != P:
                    raise ValidationError(f"edge {it} does not leave {P}")
                edges.append(it)
                P = self.terminus(it)
                pending = None
            else:
                if pending is not None:
                    G = self.vertex_groups[P]
                    pending = G.multiply(self._coerce(P, pending), self._coerce(P, it))
                else:
                    pending = it
        coeffs.append(self._coerce(P, pending))
        w = GWord(start, tuple(edges), tuple(coeffs))
        self.check_word(w)
        return w

    def _coerce(self, P, r):
        G = self.vertex_groups[P]
        if r is None:
            return G.identity
        if isinstance(G, FreeAbelianGroup) and isinstance(r, int):
            if G.rank != 1:
                raise ValidationError(f"coefficient {r} needs {G.rank} entries at {P}")
            return (r,)
        try:
            if isinstance(G, FreeAbelianGroup):
                return tuple(int(c) for c in r)
            return int(r)
        except (TypeError, ValueError) as e:
            raise ValidationError(f"bad coefficient {r!r} at {P}") from e

    def check_word(self, w):
        if w.start not in self.vertex_groups:
            raise ValidationError(f"unknown start vertex {w.start}")
        if len(w.coeffs) != len(w.edges) + 1:
            raise ValidationError("a word needs one more coefficient than edges")
        P = w.start
        for j, y in enumerate(w.edges):
            if y not in self.edges or self.origin(y) != P:
                raise ValidationError(f"edge {y} at position {j} does not leave {P}")
            P = self.terminus(y)
        for P, r in zip(self.vertex_path(w), w.coeffs):
            G = self.vertex_groups[P]
            if isinstance(G, FreeAbelianGroup):
                ok = isinstance(r, tuple) and len(r) == G.rank
            else:
                ok = isinstance(r, int) and 0 <= r < G.order
            if not ok:
                raise ValidationError(f"coefficient {r!r} is not an element of G_{P}")
        return True

    def _pinch(self, y, r):
        """Preimage a with r = phi_y(a), or None; the type (2) test for y r ybar."""
        return self.phi[y].preimage(r)

    def reduce(self, w):
        """Apply type (2) reductions until none is left (stack based)."""
        edges = []
        coeffs = [w.coeffs[0]]
        for y, r_next in zip(w.edges, w.coeffs[1:]):
            if edges and y == self.bar(edges[-1]):
                top = edges[-1]
                a = self._pinch(top, coeffs[-1])
                if a is not None:
                    edges.pop()
                    coeffs.pop()
                    G = self.vertex_groups[self.origin(top)]
                    coeffs[-1] = G.multiply(G.multiply(coeffs[-1], self.phi[self.bar(top)].apply(a)),
                                            r_next)
                    continue
            edges.append(y)
            coeffs.append(r_next)
        return GWord(w.start, tuple(edges), tuple(coeffs))

    def is_reduced(self, w):
        for j in range(len(w.edges) - 1):
            y, z = w.edges[j], w.edges[j + 1]
            if z == self.bar(y) and self.phi[y].contains(w.coeffs[j + 1]):
                return False
        return True

    def normal_form(self, w):
        """Reduced word with each inner coefficient a canonical coset representative.

        Left to right: r_j = t_j phi_ybar(a) with t_j the canonical left coset
        representative of phi_ybar(G_y), and phi_ybar(a) y = y phi_y(a) moves
        the remainder into r_{j+1}.
        """
        w = self.reduce(w)
        coeffs = list(w.coeffs)
        for j, y in enumerate(w.edges):
            yb = self.bar(y)
            inj = self.phi[yb]
            G = inj.target
            t = inj.coset_rep(coeffs[j])
            a = inj.preimage(G.multiply(G.invert(t), coeffs[j]))
            if a is None:
                raise OracleFailure(f"coset representative for phi_{yb} is not in the coset")
            coeffs[j] = t
            H = self.vertex_groups[self.terminus(y)]
            coeffs[j + 1] = H.multiply(self.phi[y].apply(a), coeffs[j + 1])
        return GWord(w.start, w.edges, tuple(coeffs))

    def invert(self, w):
        P = self.terminal(w)
        edges = tuple(self.bar(y) for y in reversed(w.edges))
        path = list(reversed(self.vertex_path(w)))
        coeffs = tuple(self.vertex_groups[Q].invert(r) for Q, r in zip(path, reversed(w.coeffs)))
        return self.normal_form(GWord(P, edges, coeffs))

    def multiply(self, w1, w2):
        P = self.terminal(w1)
        if P != w2.start:
            raise ValidationError(f"path mismatch: first word ends at {P}, second starts at {w2.start}")
        G = self.vertex_groups[P]
        mid = G.multiply(w1.coeffs[-1], w2.coeffs[0])
        w = GWord(w1.start, w1.edges + w2.edges, w1.coeffs[:-1] + (mid,) + w2.coeffs[1:])
        return self.normal_form(w)

    def equal(self, w1, w2):
        return self.normal_form(w1) == self.normal_form(w2)

    def sort_key(self, w):
        path = self.vertex_path(w)
        return (len(w.edges), w.edges,
                tuple(self.vertex_groups[P].sort_key(r) for P, r in zip(path, w.coeffs)))

    def raw_cost(self, w):
        path = self.vertex_path(w)
        return sum(self.vertex_groups[P].norm(r) for P, r in zip(path, w.coeffs)) + len(w.edges)

    def f_norm(self, w):
        """Norm in the alphabet of vertex generators plus edges.

        The cheapest reduced representative of the same element: moving along
        the path, each output coefficient r' is chosen from the left coset
        r phi_ybar(G_y) of the current coefficient and the remainder
        phi_ybar(a) is carried across the edge as phi_y(a).  Branch and bound
        with the unshuttled cost as the starting bound, memoized on
        (position, carried coefficient).
        """
        w = self.reduce(w)
        n = len(w.edges)
        best = self.raw_cost(w) - n
        if n == 0:
            return best
        path = self.vertex_path(w)
        Gs = [self.vertex_groups[P] for P in path]
        seen = {}

        def rec(j, carry, spent):
            nonlocal best
            G = Gs[j]
            if j == n:
                best = min(best, spent + G.norm(carry))
                return
            if seen.get((j, carry), math.inf) <= spent:
                return
            seen[(j, carry)] = spent
            y = w.edges[j]
            inj = self.phi[self.bar(y)]
            for r in G.ball_elements(best - spent):
                c = G.norm(r)
                if spent + c >= best:
                    break
                a = inj.preimage(G.multiply(G.invert(r), carry))
                if a is None:
                    continue
                H = Gs[j + 1]
                rec(j + 1, H.multiply(self.phi[y].apply(a), w.coeffs[j + 1]), spent + c)

        rec(0, w.coeffs[0], 0)
        return best + n

    def distance(self, u, v):
        """f_norm distance between words starting at the same vertex."""
        return self.f_norm(self.multiply(self.invert(u), v))

    def letters_at(self, P):
        """Words of extended length one that can follow a word ending at P."""
        G = self.vertex_groups[P]
        out = [GWord(P, (), (s,)) for s in G.generators]
        for y in self.edges_from(P):
            out.append(GWord(P, (y,), (G.identity, self.vertex_groups[self.terminus(y)].identity)))
        return out

    def extended_norm(self, w, cap=DEFAULT_CAP):
        """Exact norm over vertex generators and edges, by breadth-first search.

        Unlike f_norm this also sees words that are not reduced, e.g.
        t a^3 t^-1 = a^6 in the doubling HNN extension.
        """
        w = self.normal_form(w)
        start = self.identity(w.start)
        if w == start:
            return 0
        seen = {start}
        frontier = [start]
        k = 0
        while frontier:
            k += 1
            nxt = []
            for u in frontier:
                for let in self.letters_at(self.terminal(u)):
                    v = self.multiply(u, let)
                    if v in seen:
                        continue
                    if v == w:
                        return k
                    seen.add(v)
                    nxt.append(v)
                    if len(seen) > cap:
                        raise BudgetExceeded(f"extended norm search exceeds cap {cap}")
            frontier = nxt
        raise ValidationError("word not reachable")

    # -- fundamental group

    def is_closed(self, w, P=None):
        P = self.base if P is None else P
        return w.start == P and self.terminal(w) == P

    pi1_membership = is_closed

    def tree_path_word(self, P):
        """The word c_P along the maximal tree from the base to P."""
        edges = self._tree_paths[P]
        coeffs = [self.vertex_groups[self.base].identity]
        for y in edges:
            coeffs.append(self.vertex_groups[self.terminus(y)].identity)
        return GWord(self.base, edges, tuple(coeffs))

    def conjugate_to_base(self, w):
        """c_{i(w)} w c_{t(w)}^-1, a closed word at the base."""
        cs = self.tree_path_word(w.start)
        ct = self.tree_path_word(self.terminal(w))
        return self.multiply(self.multiply(cs, w), self.invert(ct))

    def vertex_element(self, P, g):
        G = self.vertex_groups[P]
        return self.conjugate_to_base(GWord(P, (), (G.normal_form(g),)))

    def edge_element(self, y):
        P, Q = self.origin(y), self.terminus(y)
        w = GWord(P, (y,), (self.vertex_groups[P].identity, self.vertex_groups[Q].identity))
        return self.conjugate_to_base(w)

    def project_to_pi1T(self, w):
        """Letters of the image in pi1(G,Y,T): ('v', P, g) and ('e', y) for non-tree y.

        Tree edges map to 1 and coefficients keep their vertex labels.
        """
        out = []
        for j, (P, r) in enumerate(zip(self.vertex_path(w), w.coeffs)):
            if r != self.vertex_groups[P].identity:
                out.append(("v", P, r))
            if j < len(w.edges) and w.edges[j] not in self.tree:
                out.append(("e", w.edges[j]))
        return tuple(out)

    def from_pi1T(self, letters):
        """Closed base word of a pi1(G,Y,T) word via g -> c_P g c_P^-1, g_y -> c y c^-1."""
        w = self.identity()
        for let in letters:
            if let[0] == "v":
                w = self.multiply(w, self.vertex_element(let[1], let[2]))
            else:
                w = self.multiply(w, self.edge_element(let[1]))
        return w

    def pi1_group(self):
        return Pi1Group(self)

    # -- Bass-Serre tree

    def key(self, w):
        """Tree vertex of w (a word starting at the base): w G_{t(w)}."""
        w = self.normal_form(w)
        return (w.edges, w.coeffs[:-1])

    @property
    def root(self):
        return ((), ())

    def key_terminal(self, key):
        return self.terminus(key[0][-1]) if key[0] else self.base

    def key_word(self, key):
        P = self.key_terminal(key)
        return GWord(self.base, key[0], key[1] + (self.vertex_groups[P].identity,))

    @staticmethod
    def tree_distance(k1, k2):
        e1, c1 = k1
        e2, c2 = k2
        m = 0
        while m < len(e1) and m < len(e2) and e1[m] == e2[m] and c1[m] == c2[m]:
            m += 1
        return len(e1) + len(e2) - 2 * m

    def act(self, g, key):
        """Left action of a closed base word on a tree vertex."""
        return self.key(self.multiply(g, self.key_word(key)))

    def children(self, key, budget=None):
        """Neighbours of a tree vertex one step further from the root."""
        edges, coeffs = key
        P = self.key_terminal(key)
        out = []
        for y in self.edges_from(P):
            inj = self.phi[self.bar(y)]
            for t in inj.transversal(budget):
                if edges and y == self.bar(edges[-1]) and self.phi[edges[-1]].contains(t):
                    continue  # this is the parent
                out.append(((edges + (y,)), coeffs + (t,)))
        return out

    def coset_label(self, key):
        w = self.key_word(key)
        parts = []
        for j, y in enumerate(w.edges):
            r = w.coeffs[j]
            if r != self.vertex_groups[self.vertex_path(w)[j]].identity:
                parts.append(_fmt(r))
            parts.append(y)
        P = self.key_terminal(key)
        return ("".join(f"{p} " for p in parts) + f"pi_{P}").strip()


def _default_bar(y):
    return y.upper() if y.islower() else y + "~"


def _fmt(r):
    if isinstance(r, tuple):
        return str(r[0]) if len(r) == 1 else "(" + ",".join(map(str, r)) + ")"
    return f"g{r}"


class Pi1Group(GroupModel):
    """pi1(G, Y, P0) as closed base words, generated by c_P s c_P^-1 and c y c^-1."""

    kind = "graph-of-groups"

    def __init__(self, gog):
        self.gog = gog
        self.identity = gog.identity()
        gens, names = [], []
        multi = len(gog.vertices) > 1
        for P, G in gog.vertex_groups.items():
            for s, nm in zip(G.generators, G.generator_names):
                g = gog.vertex_element(P, s)
                if g not in gens:
                    gens.append(g)
                    names.append(f"{P}.{nm}" if multi and not _unique_name(gog, nm) else nm)
        for y in gog.edges:
            if y not in gog.tree:
                g = gog.edge_element(y)
                if g not in gens:
                    gens.append(g)
                    names.append(y)
        self.generators = tuple(gens)
        self.generator_names = tuple(names)

    def multiply(self, a, b):
        return self.gog.multiply(a, b)

    def invert(self, a):
        return self.gog.invert(a)

    def normal_form(self, a):
        return self.gog.normal_form(a)

    def sort_key(self, a):
        return self.gog.sort_key(a)

    def is_free(self):
        return all(getattr(G, "order", None) == 1 or getattr(G, "rank", None) == 0
                   for G in self.gog.vertex_groups.values()) and len(self.gog.vertices) == 1

    def distance_matrix(self, elements, radius, cap=DEFAULT_CAP):
        if not self.is_free():
            return super().distance_matrix(elements, radius, cap)
        # one vertex, trivial groups: reduced edge paths are reduced free words
        n = len(elements)
        L = max((len(g.edges) for g in elements), default=0)
        code = {y: i + 1 for i, y in enumerate(self.gog.edges)}
        W = np.zeros((n, L), dtype=np.int64)
        lens = np.zeros(n, dtype=np.int64)
        for i, g in enumerate(elements):
            lens[i] = len(g.edges)
            W[i, :len(g.edges)] = [code[y] for y in g.edges]
        out = np.empty((n, n), dtype=np.int32)
        chunk = max(1, 4_000_000 // max(n * max(L, 1), 1))
        for lo in range(0, n, chunk):
            same = np.cumprod(W[lo:lo + chunk, None, :] == W[None, :, :], axis=2)
            lcp = np.minimum(same.sum(axis=2), np.minimum(lens[lo:lo + chunk, None], lens[None, :]))
            out[lo:lo + chunk] = lens[lo:lo + chunk, None] + lens[None, :] - 2 * lcp
        return out

    def orbit_key(self, g):
        """The tree vertex g(root)."""
        return (g.edges, g.coeffs[:-1])


def _unique_name(gog, nm):
    count = sum(nm in G.generator_names for G in gog.vertex_groups.values())
    return count == 1


# ---------------------------------------------------------------- enumeration

def enumerate_words(gog, budget, start=None, cap=DEFAULT_CAP):
    """All elements of K with f_norm <= budget, as {normal form: f_norm}.

    Enumerates every reduced word of raw cost (coefficient norms plus path
    length) <= budget; an element's f_norm is the least raw cost among its
    reduced representatives, so the minimum over the enumeration is exact.
    """
    start = gog.base if start is None else start
    out = {}

    def rec(P, edges, coeffs, cost):
        G = gog.vertex_groups[P]
        for r in G.ball_elements(budget - cost):
            c = cost + G.norm(r)
            w = GWord(start, tuple(edges), tuple(coeffs) + (r,))
            nf = gog.normal_form(w)
            old = out.get(nf)
            if old is None or c < old:
                out[nf] = c
                if len(out) > cap:
                    raise BudgetExceeded(f"word enumeration exceeds cap {cap}")
            if c + 1 > budget:
                continue
            for y in gog.edges_from(P):
                if edges and y == gog.bar(edges[-1]) and gog.phi[edges[-1]].contains(r):
                    continue
                rec(gog.terminus(y), edges + [y], coeffs + [r], c + 1)

    rec(start, [], [], 0)
    return out


def extended_bfs_norms(gog, radius, start=None, cap=DEFAULT_CAP):
    """Breadth-first norms in K over vertex generators and edges (right multiplication)."""
    start = gog.base if start is None else start
    e = gog.identity(start)
    norms = {e: 0}
    frontier = [e]
    for k in range(1, radius + 1):
        nxt = []
        for w in frontier:
            for let in gog.letters_at(gog.terminal(w)):
                v = gog.multiply(w, let)
                if v not in norms:
                    norms[v] = k
                    nxt.append(v)
                    if len(norms) > cap:
                        raise BudgetExceeded(f"extended ball exceeds cap {cap}")
        frontier = nxt
    return norms


def r_stabilizer(gog, R, norm_budget, words=None):
    """Enumerated words from the base with path length <= R (they move the root at most R)."""
    words = enumerate_words(gog, norm_budget) if words is None else words
    return {w for w in words if len(w.edges) <= R}


def h_stratum(gog, k, budget, words=None):
    words = enumerate_words(gog, budget) if words is None else words
    return {w for w in words if len(w.edges) == k}


# ---------------------------------------------------------------- tree balls

@dataclass
class TreeBall:
    gog: GraphOfGroups
    radius: int
    vertices: list
    parent: dict
    via: dict = field(default_factory=dict)

    @property
    def root(self):
        return self.vertices[0]

    @property
    def edges(self):
        return [(self.parent[v], v) for v in self.vertices if self.parent[v] is not None]

    def index(self):
        return {v: i for i, v in enumerate(self.vertices)}

    def depth(self, v):
        return len(v[0])

    def neighbours(self):
        nb = {v: set() for v in self.vertices}
        for a, b in self.edges:
            nb[a].add(b)
            nb[b].add(a)
        return nb

    def is_tree(self):
        """|E| = |V| - 1 and connected."""
        if len(self.edges) != len(self.vertices) - 1:
            return False
        nb = self.neighbours()
        seen = {self.root}
        stack = [self.root]
        while stack:
            v = stack.pop()
            for u in nb[v]:
                if u not in seen:
                    seen.add(u)
                    stack.append(u)
        return len(seen) == len(self.vertices)

    def bfs_distances(self, source=None):
        """Graph distances inside the ball (independent of the key formula)."""
        nb = self.neighbours()
        source = self.root if source is None else source
        dist = {source: 0}
        queue = deque([source])
        while queue:
            v = queue.popleft()
            for u in nb[v]:
                if u not in dist:
                    dist[u] = dist[v] + 1
                    queue.append(u)
        return dist

    def label(self, v):
        return self.gog.coset_label(v)

    def edge_stabilizer(self, v):
        """Symbolic stabilizer x y pi_y y^-1 x^-1 of the edge into v."""
        if self.parent[v] is None:
            return None
        y = v[0][-1]
        prefix = self.gog.coset_label(v).rsplit("pi_", 1)[0].strip()
        return f"({prefix}) pi_{y} ({prefix})^-1"

    def to_dot(self, name="tree"):
        """DOT graph of the ball; vertices carry coset labels, edges their stabilizers."""
        idx = self.index()
        lines = [f"graph {name} {{"]
        for v in self.vertices:
            lab = self.label(v).replace('"', "'")
            lines.append(f'  v{idx[v]} [label="{lab}"];')
        for u, v in self.edges:
            stab = (self.edge_stabilizer(v) or "").replace('"', "'")
            lines.append(f'  v{idx[u]} -- v{idx[v]} [label="{stab}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"

    def to_rooted_tree(self):
        from .covers import RootedTree
        idx = self.index()
        parent = [idx[self.parent[v]] if self.parent[v] is not None else -1 for v in self.vertices]
        return RootedTree.from_parents(self.vertices, parent, name=f"tree ball R={self.radius}")


def tree_ball(gog, R, budget=None, cap=DEFAULT_CAP):
    """Bass-Serre tree ball of radius R about the root, by breadth-first search.

    ``budget`` bounds coset representative norms where an edge image has
    infinite index (the tree is then not locally finite).
    """
    root = gog.root
    vertices = [root]
    parent = {root: None}
    frontier = [root]
    for _ in range(R):
        nxt = []
        for v in frontier:
            for c in gog.children(v, budget):
                if c in parent:
                    raise ValidationError(f"non-tree detected: {c} reached twice")
                parent[c] = v
                vertices.append(c)
                nxt.append(c)
                if len(vertices) > cap:
                    raise BudgetExceeded(f"tree ball exceeds cap {cap}")
        frontier = nxt
    ball = TreeBall(gog, R, vertices, parent)
    if not ball.is_tree():
        raise ValidationError("non-tree detected in tree ball")
    return ball


# ---------------------------------------------------------------- strata geometry

@dataclass
class PiecesReport:
    k: int
    edge: str
    r: int
    pieces: dict           # x (normal form) -> truncated piece (list of words)
    full_pieces: dict      # x -> untruncated piece within the ball
    Y_r: set
    covers: bool
    uncovered: list
    min_cross_distance: float
    disjoint: bool
    end_letter_conflicts: int
    vacuous: bool

    def summary(self):
        sizes = [len(p) for p in self.pieces.values()]
        return {"k": self.k, "edge": self.edge, "r": self.r, "pieces": len(self.pieces),
                "nonempty": sum(1 for s in sizes if s), "points": sum(sizes),
                "Y_r": len(self.Y_r), "covers": self.covers,
                "min_cross_distance": self.min_cross_distance,
                "disjoint": self.disjoint, "vacuous": self.vacuous,
                "end_letter_conflicts": self.end_letter_conflicts}


def distance_to_image(gog, y, z, limit):
    """min over a of ||phi_y(a)^-1 z|| in G_t(y), searching a up to norm ``limit``."""
    G = gog.vertex_groups[gog.terminus(y)]
    best = G.norm(z)
    for a in gog.edge_group[y].ball_elements(limit):
        v = G.norm(G.multiply(G.invert(gog.phi[y].apply(a)), z))
        if v < best:
            best = v
    return best


def lemma3_pieces(gog, k, y, r, budget, words=None):
    """Pieces x y G_t(y) of the k-th stratum, their truncation by Y_r, and checks.

    x runs over H_{k-1} words ending at i(y) whose last coefficient is the
    canonical representative modulo phi_ybar(G_y); Y_r collects the words
    x y z with z within r of phi_y(G_y).  Cross-piece distances among the
    truncated pieces are compared with 2r.
    """
    if k < 1:
        raise ValidationError("strata pieces need k >= 1")
    words = enumerate_words(gog, budget) if words is None else words
    Hk = [w for w in words if len(w.edges) == k and w.edges[-1] == y]
    G = gog.vertex_groups[gog.terminus(y)]
    full, pieces, Y_r = {}, {}, set()
    uncovered = []
    for w in Hk:
        x = GWord(w.start, w.edges[:-1], w.coeffs[:-1])
        z = w.coeffs[-1]
        # x must be reduced, of length k-1, and not end in phi_ybar(G_y) unless trivially
        x_ok = gog.is_reduced(x) and gog.phi[gog.bar(y)].coset_rep(x.coeffs[-1]) == x.coeffs[-1]
        if not x_ok:
            uncovered.append(w)
            continue
        full.setdefault(x, []).append(w)
        if distance_to_image(gog, y, z, budget) <= r:
            Y_r.add(w)
        else:
            pieces.setdefault(x, []).append(w)
    for x in full:
        pieces.setdefault(x, [])
    # end-letter constraint: distinct indices never differ by phi_ybar(G_y) on the right
    conflicts = 0
    xs = list(full)
    inj = gog.phi[gog.bar(y)]
    for i, x1 in enumerate(xs):
        for x2 in xs[i + 1:]:
            if x1.edges == x2.edges:
                d = gog.multiply(gog.invert(x1), x2)
                if not d.edges and inj.contains(d.coeffs[0]):
                    conflicts += 1
    min_d = math.inf
    keys = [x for x in xs if pieces[x]]
    for i, x1 in enumerate(keys):
        for x2 in keys[i + 1:]:
            for u in pieces[x1]:
                for v in pieces[x2]:
                    dv = gog.distance(u, v)
                    if dv < min_d:
                        min_d = dv
    npts = sum(len(p) for p in pieces.values())
    return PiecesReport(k=k, edge=y, r=r, pieces=pieces, full_pieces=full, Y_r=Y_r,
                        covers=not uncovered, uncovered=uncovered,
                        min_cross_distance=min_d, disjoint=min_d > 2 * r,
                        end_letter_conflicts=conflicts,
                        vacuous=sum(1 for p in pieces.values() if p) < 2 or npts == 0)
