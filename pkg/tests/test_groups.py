import itertools
from collections import deque

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from asdimkit.errors import BudgetExceeded, ValidationError
from asdimkit.groups import (FiniteTableGroup, FreeAbelianGroup, FreeGroup, cayley_ball, cyclic_group,
                             free_abelian_ball_size, free_group_ball_size, trivial_group, word_metric,
                             word_norm)
from asdimkit.metric import FiniteMetricSpace, line_space


def bfs_norm(gens, mult, identity, target, limit=30):
    # plain BFS, independent of the library's search
    seen = {identity: 0}
    q = deque([identity])
    while q:
        g = q.popleft()
        if g == target:
            return seen[g]
        if seen[g] >= limit:
            continue
        for s in gens:
            h = mult(g, s)
            if h not in seen:
                seen[h] = seen[g] + 1
                q.append(h)
    return None


def test_norms_in_z():
    Z = FreeAbelianGroup(1)
    assert word_norm(Z, (0,)) == 0
    assert word_norm(Z, (5,)) == 5
    assert word_metric(Z, (2,), (7,)) == 5


def test_z2_norm_matches_bfs():
    Z2 = FreeAbelianGroup(2)
    add = lambda a, b: (a[0] + b[0], a[1] + b[1])
    gens = [(1, 0), (-1, 0), (0, 1), (0, -1)]
    assert word_norm(Z2, (3, 4)) == 7 == bfs_norm(gens, add, (0, 0), (3, 4))


def test_custom_generators_fall_back_to_search():
    # Z with generators {±2, ±3}: 1 = 3 - 2 has norm 2, 5 = 2 + 3 has norm 2
    Z = FreeAbelianGroup(1, generators=[(2,), (3,)])
    add = lambda a, b: (a[0] + b[0],)
    gens = [(2,), (-2,), (3,), (-3,)]
    for g in range(-8, 9):
        assert Z.norm((g,)) == bfs_norm(gens, add, (0,), (g,))


def test_free_group_metric():
    F = FreeGroup(2)
    ab, aB = (1, 2), (1, -2)
    assert word_metric(F, ab, aB) == 2


@settings(max_examples=60, deadline=None)
@given(st.lists(st.sampled_from([1, -1, 2, -2]), max_size=12))
def test_free_reduction_norm(word):
    F = FreeGroup(2)
    # reduced length equals BFS distance in the Cayley tree
    red = F.reduce(tuple(word))
    assert F.norm(tuple(word)) == len(red)
    assert F.multiply(red, F.invert(red)) == ()


def test_ball_sizes():
    assert cayley_ball(FreeAbelianGroup(1), 3).space.n == 7
    assert cayley_ball(FreeAbelianGroup(2), 2).space.n == 13
    assert cayley_ball(FreeGroup(2), 3).space.n == 53 == free_group_ball_size(2, 3)
    assert free_abelian_ball_size(2, 4) == 41


def test_z_ball_metric_is_absolute_difference():
    ball = cayley_ball(FreeAbelianGroup(1), 3)
    pts = [p[0] for p in ball.space.points]
    assert sorted(pts) == list(range(-3, 4))
    for i, j in itertools.product(range(7), repeat=2):
        assert ball.space.dist[i, j] == abs(pts[i] - pts[j])


def test_ball_uses_ambient_metric():
    # in F2 the ball's ambient distance equals the reduced length of x^-1 y
    F = FreeGroup(2)
    ball = cayley_ball(F, 3)
    for i in range(0, ball.space.n, 7):
        for j in range(0, ball.space.n, 5):
            x, y = ball.elements[i], ball.elements[j]
            assert ball.space.dist[i, j] == len(F.multiply(F.invert(x), y))


def test_generic_distance_matrix_matches_free_formula():
    F = FreeGroup(2)
    els = F.ball_elements(3)
    fast = F.distance_matrix(els, 3)
    slow = super(FreeGroup, F).distance_matrix(els, 3)
    assert np.array_equal(fast, slow)


def test_finite_groups():
    C5 = cyclic_group(5)
    assert cayley_ball(C5, 2).space.n == 5
    assert C5.norm(3) == 2
    T = trivial_group()
    assert cayley_ball(T, 4).space.n == 1
    # Klein four group from its table
    V = FiniteTableGroup([[0, 1, 2, 3], [1, 0, 3, 2], [2, 3, 0, 1], [3, 2, 1, 0]], [1, 2])
    assert V.check_associativity()
    assert V.norm(3) == 2


def test_bad_tables_rejected():
    with pytest.raises(ValidationError):
        FiniteTableGroup([[0, 1], [0, 1]], [1])
    with pytest.raises(ValidationError):
        FiniteTableGroup([[0, 1, 2]], [1])


def test_cap_and_radius_checks():
    with pytest.raises(BudgetExceeded):
        cayley_ball(FreeGroup(2), 8, cap=1000)
    with pytest.raises(ValidationError):
        cayley_ball(FreeGroup(2), -1)


def test_metric_space_basics():
    X = line_space(0, 10)
    assert X.diameter(range(11)) == 10
    assert X.set_distance([0, 1], [5]) == 4
    assert sorted(X.neighborhood([5], 2)) == [3, 4, 5, 6, 7]
    assert X.check_metric() == []
    sub = X.subspace([0, 4, 9])
    assert sub.n == 3 and sub.dist[0, 2] == 9
    assert X.fingerprint() == line_space(0, 10).fingerprint()
    assert X.fingerprint() != line_space(0, 11).fingerprint()


def test_metric_violation_detected():
    D = np.array([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    X = FiniteMetricSpace([0, 1, 2], D)
    assert X.check_metric()
