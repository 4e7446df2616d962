import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from asdimkit.covers import Cover
from asdimkit.errors import ValidationError
from asdimkit.metric import line_space
from asdimkit.simplicial import (OrientedComplex, SimplicialMap, UniformPoint, all_product_chains,
                                 barycentric_grid, canonical_projection, cylinder_quotient,
                                 embedding_lipschitz, estimate_cn, glue_check, lipschitz_estimate,
                                 mapping_cylinder, nerve, nu, open_star_cover, prism_chains,
                                 prism_lipschitz_exact, prism_lipschitz_sampled, prism_triangulation,
                                 projection_weights, pullback_cover, sample_space, to_dot,
                                 uniform_distance)

F = Fraction


def iv(a, b):
    return frozenset(range(a, b + 1))


def edge():
    return OrientedComplex(["a", "b"], [["a", "b"]])


# -- points and distances ------------------------------------------------------------

def test_uniform_distances():
    K = edge()
    a, b = K.vertex_point("a"), K.vertex_point("b")
    mid = K.point({"a": F(1, 2), "b": F(1, 2)})
    assert uniform_distance(a, a) == 0
    assert uniform_distance(a, b) == pytest.approx(math.sqrt(2))
    assert uniform_distance(mid, a) == pytest.approx(math.sqrt(2) / 2)
    assert mid.is_valid()
    assert not UniformPoint(K, {"a": F(1, 2)}).is_valid()


def test_complex_structure():
    K = OrientedComplex([0, 1, 2, 3], [[0, 1, 2], [2, 3]])
    assert K.dimension == 2
    assert K.f_vector() == [4, 4, 1]
    assert K.maximal() == [(0, 1, 2), (2, 3)]
    assert K.is_downward_closed()
    with pytest.raises(ValidationError):
        K.add_simplex([0, 9])
    with pytest.raises(ValidationError):
        OrientedComplex([0, 0])


# -- nerves and projections ----------------------------------------------------------

def test_nerve_examples():
    X = line_space(0, 20)
    assert nerve(Cover(X, [iv(0, 5), iv(10, 20)])).f_vector() == [2]
    assert nerve(Cover(X, [iv(0, 12), iv(10, 20)])).f_vector() == [2, 1]
    sets = [iv(a, min(20, a + 6)) for a in range(0, 20, 5)]
    K = nerve(Cover(X, sets))
    # consecutive intervals overlap, others do not: a path graph
    edges = sorted(tuple(sorted(s)) for s in K.simplices if len(s) == 2)
    assert edges == [(i, i + 1) for i in range(len(sets) - 1)]
    assert K.dimension == 1


def test_canonical_projection_examples():
    X = line_space(0, 10)
    cov = Cover(X, [iv(0, 6), iv(4, 10)])
    assert canonical_projection(X, cov, 1).coords == {0: 1}
    p = canonical_projection(X, cov, 5)
    assert p.coords == {0: F(1, 2), 1: F(1, 2)}
    # the float matrix agrees with the exact formula everywhere
    W = projection_weights(X, cov.sets)
    for x in range(11):
        q = canonical_projection(X, cov, x)
        assert np.allclose(W[x], [float(q.coords.get(i, 0)) for i in range(2)])


def test_nu_values():
    assert nu(1, 0) == 9
    assert nu(9, 0) == 1
    assert nu(F(1, 2), 1) == 50
    with pytest.raises(ValidationError):
        nu(0, 1)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2), st.sampled_from([F(1), F(1, 2)]), st.integers(0, 10_000))
def test_projection_lipschitz_under_lebesgue_hypothesis(k, eps, seed):
    import random
    from asdimkit.experiments import level_cover
    rng = random.Random(seed)
    X = line_space(0, 400)
    L = int(nu(eps, k))
    cov = level_cover(X, np.arange(401), L, k, rng)
    assume(cov.multiplicity <= k + 1)
    assert cov.lebesgue > nu(eps, k)
    W = projection_weights(X, cov.sets)
    assert embedding_lipschitz(X, W).value <= float(eps) + 1e-12


def test_lipschitz_estimates():
    X = line_space(0, 30)
    const = np.ones((31, 1))
    assert embedding_lipschitz(X, const).value == 0
    ident = np.arange(31, dtype=float)[:, None]
    assert embedding_lipschitz(X, ident).value == pytest.approx(1)
    assert lipschitz_estimate(X, ident).value == pytest.approx(1)
    # sampling path for large domains stays a lower bound
    big = line_space(0, 4000)
    img = np.sqrt(np.arange(4001, dtype=float))[:, None]
    rep = lipschitz_estimate(big, img, max_exhaustive=1000, samples=5000)
    assert not rep.exhaustive and rep.value <= 1 + 1e-12


# -- prisms and cylinders ----------------------------------------------------------

def maximal_chains_brute(k):
    chains = all_product_chains(k)
    return {c for c in chains if not any(c < d for d in chains)}


@pytest.mark.parametrize("k", range(6))
def test_prism_chains_match_brute_force(k):
    ours = {frozenset(ch) for ch in prism_chains(k)}
    if k <= 3:
        assert ours == maximal_chains_brute(k)
    P = prism_triangulation(list(range(k + 1)))
    assert len(P.maximal()) == k + 1
    assert P.dimension == k + 1


def test_small_prisms():
    assert prism_triangulation(["v"]).f_vector() == [2, 1]
    P = prism_triangulation(["a", "b"])
    tris = P.maximal()
    assert len(tris) == 2
    shared = frozenset(tris[0]) & frozenset(tris[1])
    assert shared == {("a", 0), ("b", 1)}


def test_mapping_cylinder_examples():
    V = OrientedComplex(["v"])
    cyl = mapping_cylinder(SimplicialMap(V, V, {"v": "v"}))
    assert cyl.complex.f_vector() == [2, 1]
    W = OrientedComplex(["w"])
    cyl = mapping_cylinder(SimplicialMap(edge(), W, {"a": "w", "b": "w"}))
    assert len(cyl.complex.vertices) == 3 and not cyl.problems()
    assert cyl.complex.maximal() == [(("X", "a"), ("X", "b"), ("Y", "w"))]
    E = edge()
    cyl = mapping_cylinder(SimplicialMap(E, E, {"a": "a", "b": "b"}))
    assert cyl.complex.f_vector()[0] == 4 and len(cyl.complex.maximal()) == 2
    with pytest.raises(ValidationError):
        mapping_cylinder(SimplicialMap(E, OrientedComplex(["u", "v"]), {"a": "u", "b": "v"}))


def test_cylinder_quotient_ends():
    E = edge()
    W = OrientedComplex(["w", "z"], [["w", "z"]])
    cyl = mapping_cylinder(SimplicialMap(E, W, {"a": "w", "b": "z"}))
    a = E.vertex_point("a")
    assert cylinder_quotient(cyl, a, 0).coords == {("X", "a"): 1}
    assert cylinder_quotient(cyl, a, 1).coords == {("Y", "w"): 1}
    mid = E.point({"a": F(1, 2), "b": F(1, 2)})
    q = cylinder_quotient(cyl, mid, F(1, 2))
    assert q.coords == {("X", "a"): F(1, 2), ("Y", "z"): F(1, 2)}
    assert q.is_valid()
    with pytest.raises(ValidationError):
        cylinder_quotient(cyl, mid, 2)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.integers(0, 12), min_size=1, max_size=4), st.integers(0, 12))
def test_cylinder_point_re_embeds(weights, tnum):
    # identity cylinder: the image point, read back in sigma x [0,1], is (p, t)
    assume(sum(weights) > 0)
    verts = [f"v{i}" for i in range(len(weights))]
    S = OrientedComplex(verts, [verts])
    cyl = mapping_cylinder(SimplicialMap(S, S, {v: v for v in verts}))
    tot = sum(weights)
    p = S.point({v: F(w, tot) for v, w in zip(verts, weights)})
    t = F(tnum, 12)
    q = cylinder_quotient(cyl, p, t)
    assert q.is_valid()
    back = {v: q.coords.get(("X", v), 0) + q.coords.get(("Y", v), 0) for v in verts}
    assert back == {v: F(w, tot) for v, w in zip(verts, weights)}
    assert sum(c for v, c in q.coords.items() if v[0] == "Y") == t


def test_prism_lipschitz_constants():
    for k in range(1, 5):
        exact = prism_lipschitz_exact(k)
        sampled, count = prism_lipschitz_sampled(k, samples=20000)
        assert exact >= 1
        assert sampled <= exact * (1 + 1e-6)
        assert count > 19000
    with pytest.raises(ValidationError):
        prism_lipschitz_exact(0)


def test_estimate_cn_monotone():
    c0, info0 = estimate_cn(0, samples=5000)
    c1, info1 = estimate_cn(1, samples=5000)
    assert c1 >= c0 >= 1
    assert set(info1["lambda"]) == {1, 2, 3, 4}


# -- gluing and stars --------------------------------------------------------------

def test_glue_check():
    X = line_space(0, 30)
    const = np.zeros((31, 1))
    assert glue_check(X, [15], range(31), 3, const, 1).ok
    ramp = np.arange(31, dtype=float)[:, None] * 0.5
    rep = glue_check(X, [15], range(31), 3, ramp, 0.5)
    assert rep.ok and rep.eta == 0
    steep = ramp.copy()
    steep[20:] += 5
    assert not glue_check(X, [15], range(31), 3, steep, 0.5).ok


def test_open_star_covers():
    V = OrientedComplex(["v"])
    pts = barycentric_grid(V, 4)
    assert len(open_star_cover(V, pts).sets) == 1
    E = edge()
    cov = open_star_cover(E, barycentric_grid(E, 4))
    assert len(cov.sets) == 2 and cov.multiplicity == 2
    T = OrientedComplex("abc", ["abc"])
    pts = barycentric_grid(T, 6)
    cov = open_star_cover(T, pts, sample_space(T, pts))
    assert cov.multiplicity == 3
    inner = frozenset.intersection(*cov.sets)
    assert all(len(pts[i].coords) == 3 for i in inner)


def test_pullback_covers():
    X = line_space(0, 40)
    K = OrientedComplex(["p"])
    imgs = [K.vertex_point("p")] * 41
    cov, labels = pullback_cover(X, imgs, K)
    assert len(cov.sets) == 1 and cov.is_cover()
    sets = [iv(a, min(40, a + 12)) for a in range(0, 40, 10)]
    icov = Cover(X, sets)
    N = nerve(icov)
    imgs = [canonical_projection(X, icov, x, N) for x in range(41)]
    back, _ = pullback_cover(X, imgs, N)
    assert back.is_cover() and back.multiplicity <= 2


def test_dot_export():
    text = to_dot(OrientedComplex([0, 1, 2], [[0, 1], [1, 2]]), "P")
    assert text.startswith("graph P {") and text.count("--") == 2
