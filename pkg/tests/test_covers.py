from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from asdimkit.coloring import check_coloring, exact_coloring, greedy_clique
from asdimkit.covers import (ColoredFamilies, Cover, RootedTree, check_infinite_union_hypotheses,
                             check_uniform_asdim, colored_to_cover, cover_to_colored, d_disjoint,
                             d_multiplicity, enlarge, lebesgue_number, shrink, tree_cover)
from asdimkit.errors import NotACover, SearchTimeout, ValidationError
from asdimkit.experiments import free_tree_space
from asdimkit.groups import FreeAbelianGroup, cayley_ball
from asdimkit.metric import line_space

Z10 = line_space(0, 10)


def iv(a, b):
    return frozenset(range(a, b + 1))


def brute_lebesgue(D, sets):
    # definition scan: min over x of max over U containing x of d(x, X - U)
    n = D.shape[0]
    best = float("inf")
    for x in range(n):
        m = 0
        for s in sets:
            if x in s:
                comp = [y for y in range(n) if y not in s]
                m = max(m, float("inf") if not comp else min(D[x, y] for y in comp))
        best = min(best, m)
    return best


def brute_multiplicity(D, sets, d):
    n = D.shape[0]
    return max(sum(1 for s in sets if any(D[x, y] <= d for y in s)) for x in range(n))


# -- coloring ---------------------------------------------------------------------

def odd_cycle(n):
    return [{(i - 1) % n, (i + 1) % n} for i in range(n)]


def test_exact_coloring_small_graphs():
    C5 = odd_cycle(5)
    assert exact_coloring(C5, 2) is None
    cols = exact_coloring(C5, 3)
    assert check_coloring(C5, cols, 3)
    K4 = [set(range(4)) - {i} for i in range(4)]
    assert exact_coloring(K4, 3) is None
    assert len(greedy_clique(K4, range(4))) == 4


@settings(max_examples=40, deadline=None)
@given(st.integers(3, 9), st.data())
def test_coloring_agrees_with_brute_force(n, data):
    edges = data.draw(st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=14))
    adj = [set() for _ in range(n)]
    for a, b in edges:
        if a != b:
            adj[a].add(b)
            adj[b].add(a)
    for k in (1, 2, 3):
        import itertools
        exists = any(all(c[a] != c[b] for a in range(n) for b in adj[a])
                     for c in itertools.product(range(k), repeat=n))
        got = exact_coloring(adj, k)
        assert (got is not None) == exists
        if got is not None:
            assert check_coloring(adj, got, k)


def mycielski(adj):
    n = len(adj)
    out = [set(a) for a in adj] + [set() for _ in range(n + 1)]
    for v in range(n):
        for u in adj[v]:
            out[n + v].add(u)
            out[u].add(n + v)
        out[n + v].add(2 * n)
        out[2 * n].add(n + v)
    return out


def test_mycielski_chromatic_numbers():
    # triangle-free graphs whose chromatic number grows by one per step
    g = [{1}, {0}]
    for chi in (3, 4):
        g = mycielski(g)
        assert exact_coloring(g, chi - 1) is None
        assert check_coloring(g, exact_coloring(g, chi), chi)


def test_coloring_timeout():
    import time
    g = [{1}, {0}]
    for _ in range(4):
        g = mycielski(g)  # chromatic number 6, clique number 2
    with pytest.raises(SearchTimeout):
        exact_coloring(g, 5, deadline=time.monotonic() - 1)


# -- predicates -------------------------------------------------------------------

def test_disjointness_examples():
    assert d_disjoint(Z10, [{0}, {5}], 5)
    assert not d_disjoint(Z10, [{0}, {4}], 5)
    assert d_disjoint(Z10, [iv(0, 10)], 100)


def test_multiplicity_examples():
    assert d_multiplicity(Z10, [iv(0, 10)], 4) == 1
    sets = [iv(0, 5), iv(5, 10)]
    assert d_multiplicity(Z10, sets, 0) == 2
    assert d_multiplicity(Z10, sets, 3) == 2 == brute_multiplicity(Z10.dist, sets, 3)


def test_lebesgue_examples():
    assert lebesgue_number(Z10, [iv(0, 10)]) == float("inf")
    sets = [iv(0, 6), iv(4, 10)]
    # frozen from the definition scan: worst point x = 5 with depth 2 in both sets
    assert lebesgue_number(Z10, sets) == 2 == brute_lebesgue(Z10.dist, sets)
    two = line_space(0, 1)
    assert lebesgue_number(two, [{0}, {1}]) == 1


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 20), st.integers(0, 8)), min_size=1, max_size=6))
def test_lebesgue_and_multiplicity_match_definition(raw):
    X = line_space(0, 20)
    sets = [iv(a, min(20, a + w)) for a, w in raw]
    assert lebesgue_number(X, sets) == brute_lebesgue(X.dist, sets)
    for d in (0, 1, 3):
        assert d_multiplicity(X, sets, d) == brute_multiplicity(X.dist, sets, d)


def test_enlarge_and_shrink_examples():
    c = Cover(Z10, [{5}], covers=False)
    assert enlarge(c, 0).sets == c.sets
    assert enlarge(c, 2).sets == [iv(3, 7)]
    full = Cover(Z10, [iv(0, 10)])
    assert shrink(full, 3).sets == full.sets
    assert shrink(Cover(Z10, [iv(0, 6), iv(4, 10)]), 1).sets == [iv(0, 5), iv(5, 10)]
    with pytest.raises(NotACover):
        shrink(Cover(Z10, [iv(0, 6), iv(4, 10)]), 2)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(1, 5), min_size=1, max_size=6), st.integers(0, 3))
def test_shrink_of_enlarge_still_covers(widths, d):
    X = line_space(0, 25)
    sets, a = [], 0
    for w in widths:
        sets.append(iv(a, min(25, a + w)))
        a += w + 1
        if a > 25:
            break
    if a <= 25:
        sets.append(iv(a, 25))
    cov = Cover(X, sets)
    assert cov.is_cover()
    back = shrink(enlarge(cov, d), d)
    assert back.is_cover()
    for s, t in zip(cov.sets, back.sets):
        assert s <= t


def test_enlarged_colored_families_stay_disjoint():
    X = line_space(0, 40)
    fams = [[frozenset({p}) for p in range(0, 41, 12)], [frozenset({p}) for p in range(6, 41, 12)]]
    cf = ColoredFamilies(X, fams, 6)
    assert cf.is_valid() is False  # singletons do not cover
    big = enlarge(ColoredFamilies(X, fams, 12), 2)
    for fam in big.families:
        assert d_disjoint(X, fam, 8)


# -- reformulations ---------------------------------------------------------------

def test_colored_to_cover_examples():
    cf = ColoredFamilies(Z10, [[iv(0, 10)]], 3)
    assert colored_to_cover(cf).multiplicity == 1
    X = line_space(0, 30)
    fams = [[iv(0, 5), iv(12, 17), iv(24, 29)], [iv(6, 11), iv(18, 23), iv(30, 30)]]
    cf = ColoredFamilies(X, fams, 6)
    assert cf.is_valid()
    cov = colored_to_cover(cf)
    assert cov.is_cover() and cov.multiplicity <= 2
    with pytest.raises(ValidationError):
        colored_to_cover(ColoredFamilies(X, [[iv(0, 5)]], 1))


def test_cover_to_colored_examples():
    X = line_space(0, 40)
    whole = Cover(X, [frozenset(range(41))])
    assert len(cover_to_colored(whole, 5, n=0).families) == 1
    # length-10 intervals started every 4 steps: three deep at the overlaps
    sets = [iv(a, min(40, a + 10)) for a in range(0, 40, 4)]
    cov = Cover(X, sets)
    assert cov.multiplicity == 3
    L = cov.lebesgue
    cf = cover_to_colored(cov, Fraction(L, 3))
    assert cf.is_valid() and len(cf.families) <= 3
    with pytest.raises(ValidationError):
        cover_to_colored(cov, L)


def test_brick_cover_colors_within_multiplicity():
    Z2 = cayley_ball(FreeAbelianGroup(2), 6).space
    from asdimkit.search import brick_pieces
    bricks = brick_pieces(Z2, 6, 3, 3)
    cov = enlarge(Cover(Z2, bricks), 1)
    cf = cover_to_colored(cov, Fraction(1, 2))
    assert cf.is_valid() and len(cf.families) <= cov.multiplicity


# -- trees --------------------------------------------------------------------------

def path_tree(n):
    return RootedTree.from_parents(list(range(n)), [-1] + list(range(n - 1)))


def test_tree_cover_single_vertex_and_path():
    t = path_tree(1)
    cf = tree_cover(t, 3)
    assert len(cf.families) == 1 and cf.is_valid()
    t = path_tree(31)
    cf = tree_cover(t, 3)
    assert cf.is_valid() and len(cf.families) == 2
    # bands alternate along the path
    owner = {}
    for c, fam in enumerate(cf.families):
        for s in fam:
            for p in s:
                owner[p] = c
    assert [owner[p] for p in range(0, 31, 3)] == [k % 2 for k in range(11)]


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
def test_tree_cover_on_free_group_ball(d):
    tree = free_tree_space(2, 6)
    cf = tree_cover(tree, d)
    assert cf.is_valid(), cf.problems()
    cov = colored_to_cover(cf)
    assert cov.multiplicity <= 2


def test_tree_metric_matches_bfs():
    from asdimkit.groups import FreeGroup
    tree = free_tree_space(2, 3)
    ball = cayley_ball(FreeGroup(2), 3)
    assert np.array_equal(tree.space.dist, ball.space.dist)


# -- hypothesis checkers ---------------------------------------------------------

def interval_witness(X, d, width):
    pts = sorted(range(X.n), key=lambda i: X.points[i])
    fams = [[], []]
    for k, a in enumerate(range(0, X.n, width)):
        fams[k % 2].append(frozenset(pts[a:a + width]))
    return ColoredFamilies(X, fams, d)


def test_uniform_asdim_checker():
    X1, X2 = line_space(0, 40), line_space(0, 60)
    w1, w2 = interval_witness(X1, 5, 11), interval_witness(X2, 5, 15)
    rep = check_uniform_asdim([X1, X2], [w1, w2], 5, 1)
    assert rep.ok and rep.value == 14
    bad = ColoredFamilies(X1, [fam[1:] for fam in w1.families], 5)
    rep = check_uniform_asdim([X1], [bad], 5, 1)
    assert not rep.ok and any("uncovered" in m for m in rep.diagnostics)


def test_union_checker():
    X = line_space(0, 30)
    rep = check_infinite_union_hypotheses(X, [range(31)], range(31), 1, 1, 3)
    assert rep.ok
    rep = check_infinite_union_hypotheses(X, [range(0, 16), range(15, 31)], [], 1, 1, 3,
                                          search_bound=8)
    assert not rep.ok and rep.diagnostics[-1][0] == "r-disjoint"
