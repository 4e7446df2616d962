import pytest
from hypothesis import given, settings, strategies as st

from asdimkit.bass_serre import (GWord, GraphOfGroups, enumerate_words, extended_bfs_norms,
                                 h_stratum, lemma3_pieces, r_stabilizer, tree_ball)
from asdimkit.errors import ValidationError
from asdimkit.groups import FreeAbelianGroup
from asdimkit.models import (HNNRealization, KleinRealization, finite_amalgam_model, free_model,
                             hnn_model, klein_model, realization_ball, z2_amalgam_model)

KLEIN = klein_model()
HNN = hnn_model()


def random_word(gog, steps):
    # steps: list of (coefficient, edge choice); Klein words are closed back at P
    P = gog.base
    items = []
    for r, e in steps:
        items.append(r)
        out = gog.edges_from(P)
        y = out[e % len(out)]
        items.append(y)
        P = gog.terminus(y)
    if P != gog.base:
        items.append(gog.edges_from(P)[0])
    return gog.word(gog.base, *items)


steps = st.lists(st.tuples(st.integers(-4, 4), st.integers(0, 3)), max_size=5)


# -- reduction and normal forms ----------------------------------------------------

def test_klein_pinch():
    # b^4 = a^4, so a b^4 = a^5
    w = KLEIN.word("P", 1, "y", 4, "Y")
    assert not KLEIN.is_reduced(w)
    assert KLEIN.reduce(w) == GWord("P", (), ((5,),))
    # odd middle coefficients are not in the image: no reduction
    w = KLEIN.word("P", 1, "y", 1, "Y", 2)
    assert KLEIN.is_reduced(w) and KLEIN.reduce(w) == w


def test_hnn_pinch():
    # t a^3 t^-1 = a^6
    w = HNN.word("P", "t", 3, "T")
    assert HNN.reduce(w) == GWord("P", (), ((6,),))
    # t^-1 a t has no pinch: a is outside the doubled image
    assert HNN.is_reduced(HNN.word("P", "T", 1, "t"))
    assert HNN.reduce(HNN.word("P", "T", 2, "t")) == GWord("P", (), ((1,),))


def test_word_validation():
    with pytest.raises(ValidationError):
        KLEIN.word("P", "Y")
    with pytest.raises(ValidationError):
        KLEIN.check_word(GWord("P", ("y",), ((0,),)))
    with pytest.raises(ValidationError):
        KLEIN.word("P", "x")
    with pytest.raises(ValidationError):
        GraphOfGroups({"P": FreeAbelianGroup(1), "Q": FreeAbelianGroup(1)}, [], base="P")


@pytest.mark.parametrize("gog,real", [(KLEIN, KleinRealization()), (HNN, HNNRealization())])
def test_reduction_preserves_realization(gog, real):
    for w in [gog.word("P", 1, *(["y", 4, "Y"] if gog is KLEIN else ["t", 3, "T"]), 2)]:
        assert real.from_word(gog, w) == real.from_word(gog, gog.normal_form(w))


@settings(max_examples=80, deadline=None)
@given(st.sampled_from(["klein", "hnn"]), steps, steps)
def test_group_laws_against_realizations(name, s1, s2):
    gog, real = (KLEIN, KleinRealization()) if name == "klein" else (HNN, HNNRealization())
    u, v = random_word(gog, s1), random_word(gog, s2)
    uv = gog.multiply(u, v)
    assert real.from_word(gog, uv) == real.from_word(gog, u) * real.from_word(gog, v)
    assert gog.multiply(u, gog.invert(u)) == gog.identity()
    assert real.from_word(gog, gog.invert(u)) == real.from_word(gog, u).inverse()
    # normal forms are faithful: equal realizations iff equal normal forms
    same = real.from_word(gog, u) == real.from_word(gog, v)
    assert same == gog.equal(u, v)
    assert gog.is_reduced(gog.normal_form(u))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["klein", "hnn"]), steps)
def test_path_length_is_tree_displacement(name, s):
    gog, real = (KLEIN, KleinRealization()) if name == "klein" else (HNN, HNNRealization())
    w = gog.normal_form(random_word(gog, s))
    assert real.displacement(real.from_word(gog, w), side=gog.terminal(w)) == len(w.edges)


# -- norms -------------------------------------------------------------------------

def test_f_norm_examples():
    w = KLEIN.word("P", 1, "y", 1, "Y", 2)
    assert KLEIN.raw_cost(w) == 6
    assert KLEIN.f_norm(w) == 6 == KLEIN.extended_norm(w)
    # a^5 written as a b^4: the shuttle finds the pure power
    assert KLEIN.f_norm(KLEIN.word("P", 1, "y", 4, "Y")) == 5
    # a^3 b a^-1 b: shuttling a^2 = b^2 across the edge lowers the cost
    w = KLEIN.word("P", 3, "y", 1, "Y", -1)
    assert KLEIN.f_norm(w) == KLEIN.extended_norm(w) < KLEIN.raw_cost(w)


def test_f_norm_matches_bfs_on_klein():
    words = enumerate_words(KLEIN, 6)
    bfs = extended_bfs_norms(KLEIN, 6)
    assert len(words) == len(bfs) == 64
    assert words == bfs


def test_hnn_shortcut_through_non_reduced_words():
    # a^6 = t a^3 t^-1 costs 5 letters, but no reduced word for it is that cheap
    a6 = HNN.word("P", 6)
    assert HNN.f_norm(a6) == 6
    assert HNN.extended_norm(a6) == 5
    words = enumerate_words(HNN, 6)
    bfs = extended_bfs_norms(HNN, 6)
    assert all(bfs[w] <= c for w, c in words.items() if w in bfs)
    diff = {w for w, c in words.items() if bfs.get(w) != c}
    assert diff == {GWord("P", (), ((6,),)), GWord("P", (), ((-6,),))}


def test_distance_is_symmetric():
    u = KLEIN.word("P", 2, "y", 1, "Y")
    v = KLEIN.word("P", -1, "y", 3, "Y", 1)
    assert KLEIN.distance(u, v) == KLEIN.distance(v, u) > 0
    assert KLEIN.distance(u, u) == 0


# -- enumeration and strata ----------------------------------------------------------

def test_stabilizer_at_radius_zero_is_vertex_group():
    words = enumerate_words(KLEIN, 8)
    stab = r_stabilizer(KLEIN, 0, 8, words)
    assert stab == {GWord("P", (), ((n,),)) for n in range(-8, 9)}
    assert len(r_stabilizer(KLEIN, 1, 8)) == 47


def test_strata_partition_the_enumeration():
    words = enumerate_words(HNN, 6)
    strata = [h_stratum(HNN, k, 6, words) for k in range(7)]
    assert sum(len(s) for s in strata) == len(words)
    assert [len(s) for s in strata[:4]] == [13, 42, 70, 102]
    assert all(len(w.edges) == k for k, s in enumerate(strata) for w in s)


def test_closed_words_and_pi1_round_trip():
    w = KLEIN.word("P", 1, "y", 3, "Y", -2)
    assert KLEIN.is_closed(w)
    assert not KLEIN.is_closed(KLEIN.word("P", 1, "y"))
    for gog, u in [(KLEIN, w), (HNN, HNN.word("P", 1, "t", 1, "t", -3, "T"))]:
        letters = gog.project_to_pi1T(u)
        assert gog.from_pi1T(letters) == gog.normal_form(u)
    assert KLEIN.project_to_pi1T(w) == (("v", "P", (1,)), ("v", "Q", (3,)), ("v", "P", (-2,)))


def test_pi1_group_generators():
    G = KLEIN.pi1_group()
    assert G.generator_names == ("a", "A", "b", "B") and not G.is_free()
    # b is conjugated along the tree edge into a closed word
    assert G.generators[2] == KLEIN.normal_form(KLEIN.word("P", "y", 1, "Y"))
    F = free_model().pi1_group()
    assert F.is_free() and F.generator_names == ("x", "X", "y", "Y")


def test_free_distance_matrix_matches_generic():
    F = free_model().pi1_group()
    els = sorted(enumerate_words(F.gog, 3), key=F.sort_key)
    fast = F.distance_matrix(els, 3)
    slow = super(type(F), F).distance_matrix(els, 3)
    assert (fast == slow).all()


# -- tree balls ------------------------------------------------------------------------

@pytest.mark.parametrize("gog,sizes", [
    (KLEIN, [1, 3, 5, 7]),           # the tree is a line
    (HNN, [1, 4, 10, 22]),           # valence 3
    (free_model(), [1, 5, 17, 53]),  # valence 4
    (finite_amalgam_model(), [1, 3, 7, 11]),  # valences 2 and 3
])
def test_tree_ball_sizes(gog, sizes):
    for R, n in enumerate(sizes):
        ball = tree_ball(gog, R)
        assert len(ball.vertices) == n
        assert ball.is_tree()


@pytest.mark.parametrize("gog,real", [(KLEIN, KleinRealization()), (HNN, HNNRealization())])
def test_tree_ball_matches_realization(gog, real):
    for R in range(4):
        dist = realization_ball(real, R)
        ball = tree_ball(gog, R)
        assert len(ball.vertices) == len(dist)
        depths = sorted(ball.depth(v) for v in ball.vertices)
        assert depths == sorted(dist.values())


def test_tree_ball_distances_and_labels():
    ball = tree_ball(HNN, 3)
    d = ball.bfs_distances()
    for v in ball.vertices:
        assert d[v] == HNN.tree_distance(ball.root, v) == ball.depth(v)
    assert ball.label(ball.root) == "pi_P"
    assert ball.to_dot().startswith("graph")
    assert len(ball.to_rooted_tree().parent) == len(ball.vertices)


def test_infinite_valence_needs_budget():
    gog = z2_amalgam_model()
    small = tree_ball(gog, 1, budget=2)
    big = tree_ball(gog, 1, budget=3)
    assert len(big.vertices) > len(small.vertices) > 1


@settings(max_examples=40, deadline=None)
@given(steps, st.integers(0, 9), st.integers(0, 9))
def test_action_is_an_isometry(s, i, j):
    g = random_word(HNN, s)
    ball = tree_ball(HNN, 2)
    u, v = ball.vertices[i], ball.vertices[j]
    assert HNN.tree_distance(HNN.act(g, u), HNN.act(g, v)) == HNN.tree_distance(u, v)
    assert HNN.act(g, HNN.root) == HNN.key(g)


# -- strata pieces ---------------------------------------------------------------------

def test_klein_pieces_are_vacuous():
    # every coefficient is within 1 of the even integers, so Y_r swallows the stratum
    rep = lemma3_pieces(KLEIN, 1, "y", 2, 8)
    assert rep.covers and rep.vacuous and rep.end_letter_conflicts == 0
    assert rep.summary()["points"] == 0


def test_z2_amalgam_pieces_separate():
    gog = z2_amalgam_model()
    words = enumerate_words(gog, 6)
    rep = lemma3_pieces(gog, 1, "y", 1, 6, words)
    assert rep.covers and not rep.vacuous
    assert rep.min_cross_distance > 2 * rep.r
    assert rep.end_letter_conflicts == 0
    with pytest.raises(ValidationError):
        lemma3_pieces(gog, 0, "y", 1, 6, words)


def test_models_validate():
    for gog in (KLEIN, HNN, free_model(), z2_amalgam_model(), finite_amalgam_model()):
        assert gog.validate()
