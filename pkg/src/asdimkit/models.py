"""Bundled graph-of-groups models and independent concrete realizations.

The realizations (affine maps of the plane and of the dyadic line) are
written without any reference to path words, so they serve as a second
route for checking normal forms and tree displacements.
"""

from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .bass_serre import GraphOfGroups
from .groups import FreeAbelianGroup, cyclic_group, trivial_group


def _z(name_pos, name_neg):
    return FreeAbelianGroup(1, names=[name_pos, name_neg])


def klein_model():
    """Z *_2Z Z with both injections doubling: <a, b | a^2 = b^2>."""
    return GraphOfGroups(
        {"P": _z("a", "A"), "Q": _z("b", "B")},
        [{"name": "y", "bar": "Y", "origin": "P", "terminus": "Q",
          "group": _z("c", "C"), "phi": [(2,)], "phibar": [(2,)]}],
        base="P", tree=["y"], name="klein")


def hnn_model():
    """HNN extension of Z over Z by doubling: <a, t | t a t^-1 = a^2>."""
    return GraphOfGroups(
        {"P": _z("a", "A")},
        [{"name": "t", "bar": "T", "origin": "P", "terminus": "P",
          "group": _z("c", "C"), "phi": [(1,)], "phibar": [(2,)]}],
        base="P", tree=[], name="hnn")


def free_model(rank=2):
    """Free group as a one-vertex graph of trivial groups with ``rank`` loops."""
    names = "xyzuvw"
    edges = [{"name": names[i], "bar": names[i].upper(), "origin": "P", "terminus": "P",
              "group": trivial_group()} for i in range(rank)]
    return GraphOfGroups({"P": trivial_group()}, edges, base="P", tree=[], name=f"free{rank}")


def z2_amalgam_model():
    """Z^2 *_Z Z^2 amalgamated along a coordinate line on each side."""
    G = FreeAbelianGroup(2)
    H = FreeAbelianGroup(2, names=["u", "U", "v", "V"])
    return GraphOfGroups(
        {"P": G, "Q": H},
        [{"name": "y", "bar": "Y", "origin": "P", "terminus": "Q",
          "group": _z("c", "C"), "phi": [(1, 0)], "phibar": [(1, 0)]}],
        base="P", tree=["y"], name="z2-amalgam")


def finite_amalgam_model():
    """Z/4 *_Z/2 Z/6 (a virtually free example with finite vertex groups)."""
    return GraphOfGroups(
        {"P": cyclic_group(4), "Q": cyclic_group(6)},
        [{"name": "y", "bar": "Y", "origin": "P", "terminus": "Q",
          "group": cyclic_group(2), "phi": [3], "phibar": [2]}],
        base="P", tree=["y"], name="finite-amalgam")


MODELS = {
    "klein": klein_model,
    "hnn": hnn_model,
    "free2": free_model,
    "z2-amalgam": z2_amalgam_model,
    "finite-amalgam": finite_amalgam_model,
}


# ---------------------------------------------------------------- realizations

@dataclass(frozen=True)
class PlaneMap:
    """(x, y) -> (x + s, e*y + c) with e = +-1."""

    s: int
    e: int
    c: int

    def __mul__(self, other):
        # self after other
        return PlaneMap(self.s + other.s, self.e * other.e, self.e * other.c + self.c)

    def inverse(self):
        return PlaneMap(-self.s, self.e, -self.e * self.c)

    def __pow__(self, k):
        g = PlaneMap(0, 1, 0)
        base = self if k >= 0 else self.inverse()
        for _ in range(abs(k)):
            g = g * base
        return g


KLEIN_A = PlaneMap(1, -1, 0)
KLEIN_B = PlaneMap(1, -1, 1)


class KleinRealization:
    """<a, b | a^2 = b^2> acting on the plane by glide reflections.

    Tree vertices are cosets g<a> and g<b>, told apart by complete coset
    invariants; g<a> is adjacent to g<b> and g a <b>, and g<b> to g<a> and g b <a>.
    """

    identity = PlaneMap(0, 1, 0)

    def from_word(self, gog, w):
        g = self.identity
        path = gog.vertex_path(w)
        for P, r in zip(path, w.coeffs):
            g = g * (KLEIN_A ** r[0] if P == "P" else KLEIN_B ** r[0])
        return g

    @staticmethod
    def vertex(g, side):
        if side == "P":
            return ("P", g.e * (-1) ** (g.s % 2), g.c)
        return ("Q", g.e * (-1) ** (g.s % 2), g.e * (g.s % 2) + g.c)

    def neighbours(self, g, side):
        if side == "P":
            return [(g, "Q"), (g * KLEIN_A, "Q")]
        return [(g, "P"), (g * KLEIN_B, "P")]

    def displacement(self, g, limit=64, side="P"):
        """Distance from the base vertex <a> to g<a> (side P) or g<b> (side Q)."""
        return _bfs_displacement(self, g, side, limit)


@dataclass(frozen=True)
class DyadicMap:
    """x -> 2^k x + m on the dyadic rationals."""

    k: int
    m: Fraction

    def __mul__(self, other):
        return DyadicMap(self.k + other.k, Fraction(2) ** self.k * other.m + self.m)

    def inverse(self):
        return DyadicMap(-self.k, -self.m / Fraction(2) ** self.k)


HNN_A = DyadicMap(0, Fraction(1))
HNN_T = DyadicMap(1, Fraction(0))


class HNNRealization:
    """<a, t | t a t^-1 = a^2> as affine maps; tree vertices are cosets g<a>."""

    identity = DyadicMap(0, Fraction(0))

    def from_word(self, gog, w):
        g = self.identity
        letters = {"t": HNN_T, "T": HNN_T.inverse()}
        for j, r in enumerate(w.coeffs):
            g = g * DyadicMap(0, Fraction(r[0]))
            if j < len(w.edges):
                g = g * letters[w.edges[j]]
        return g

    @staticmethod
    def vertex(g, side="P"):
        return (g.k, g.m % Fraction(2) ** g.k)

    def neighbours(self, g, side="P"):
        return [(g * HNN_T, "P"), (g * HNN_A * HNN_T, "P"), (g * HNN_T.inverse(), "P")]

    def displacement(self, g, limit=64, side="P"):
        return _bfs_displacement(self, g, side, limit)


def _bfs_displacement(real, g, side, limit):
    """Tree distance from the base coset to the vertex g (side), breadth first."""
    target = real.vertex(g, side)
    start = (real.identity, "P")
    seen = {real.vertex(*start)}
    if target in seen:
        return 0
    frontier = [start]
    for dist in range(1, limit + 1):
        nxt = []
        for h, sd in frontier:
            for h2, sd2 in real.neighbours(h, sd):
                v = real.vertex(h2, sd2)
                if v in seen:
                    continue
                if v == target:
                    return dist
                seen.add(v)
                nxt.append((h2, sd2))
        frontier = nxt
    return None


REALIZATIONS = {"klein": KleinRealization, "hnn": HNNRealization}


def realization_ball(real, radius):
    """Tree ball about the base vertex in a realization: {vertex key: distance}."""
    start = (real.identity, "P")
    out = {real.vertex(*start): 0}
    queue = deque([(start, 0)])
    while queue:
        (h, sd), dist = queue.popleft()
        if dist == radius:
            continue
        for h2, sd2 in real.neighbours(h, sd):
            v = real.vertex(h2, sd2)
            if v not in out:
                out[v] = dist + 1
                queue.append(((h2, sd2), dist + 1))
    return out
