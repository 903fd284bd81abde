import pytest
from hypothesis import given, settings, strategies as st

from spinelab.dsl import parse_element, parse_group
from spinelab.group_model import (
    Cut, after_all, before_all, element_to_parent, finite_tails, tail_presentation,
    tail_to_parent_cut,
)
from spinelab.presentation import Coord, ElementLiteral, unit
from spinelab.spine import (
    KINDS, S, T, T_PLUS, DivisibleElement, SpinePoint, apply_map, check_star, colours,
    direct_dimension, end_segment_check, finite_points, iota_plus, is_point, map_s, map_t,
    map_t_plus, recovered_dimension, representative, sort_name, spines, subgroup_bracket,
)

from agreement import element_mismatches, structural_mismatches
from grids import BLOCKS, UNIVERSE, finite_grid, presentation
from oracles import FiniteGroupOracle

LZ = "lex[Zloc{2},Z]"


def G2():
    return parse_group(LZ, UNIVERSE)


def el(text, G=None):
    return parse_element(text, G or G2())


def oracle_cut(O, c):
    return None if c is None else O.cut_of(c)


# ---------------------------------------------------------------- maps

def test_s_map_examples():
    G = G2()
    O = FiniteGroupOracle(G)
    for text, want in (("(0,1)", Cut(2)), ("(1,0)", Cut(1))):
        assert map_s(G, el(text), 2).cut == want
        assert oracle_cut(O, O.s_cut(O.vec(el(text)), 2)) == want
    with pytest.raises(DivisibleElement):
        map_s(G, el("(2,0)"), 2)
    assert O.s_cut(O.vec(el("(2,0)")), 2) is None


def test_s_map_uses_the_most_significant_failing_position():
    G = parse_group("lex[Z,Z]", UNIVERSE)
    O = FiniteGroupOracle(G)
    g = el("(1,1)", G)
    assert map_s(G, g, 2).cut == Cut(0, 0) == O.cut_of(O.s_cut(O.vec(g), 2))


def test_t_map_examples():
    G = G2()
    O = FiniteGroupOracle(G)
    for p in (2, 3, 5):
        assert map_t(G, ElementLiteral(), p).cut == after_all(G)
    for text, p in (("(0,1)", 2), ("(1,0)", 3)):
        assert map_t(G, el(text), p).cut == Cut(2)
        assert O.cut_of(O.t_cut(O.vec(el(text)), p)) == Cut(2)


def test_t_plus_map_examples():
    G = G2()
    O = FiniteGroupOracle(G)
    v = O.vec(el("(0,1)"))
    assert map_t_plus(G, el("(0,1)"), 2).cut == Cut(1) == O.cut_of(O.tplus_cut(v, 2))
    assert map_t_plus(G, el("(0,1)"), 3).cut == before_all(G) == O.cut_of(O.tplus_cut(v, 3))


def truncated_reverse_oracle(K, top, lower=()):
    """T+ of an element of rep(omegaStar,Z) computed on the last ``K`` positions."""
    F = parse_group(f"rep({K},Z)", UNIVERSE)
    O = FiniteGroupOracle(F)
    coords = {(0, K + top): 1}
    coords.update({(0, K + o): 1 for o in lower})
    v = O.vec(ElementLiteral.of({p: Coord(x) for p, x in coords.items()}))
    c = O.tplus_cut(v, 2)
    return Cut(0, -K + c - 1)


@pytest.mark.parametrize("k", [1, 2, 3, 5])
def test_t_plus_on_reversed_segment_matches_truncations(k):
    G = parse_group("rep(omegaStar,Z)", UNIVERSE)
    g = ElementLiteral.of({(0, -k): Coord(1), (0, -1): Coord(3)} if k > 1 else {(0, -1): Coord(1)})
    got = map_t_plus(G, g, 2).cut
    assert got == Cut(0, -k - 1)
    assert got != before_all(G)
    for K in (k + 3, k + 6):
        assert truncated_reverse_oracle(K, -k, (-1,) if k > 1 else ()) == got


@pytest.mark.parametrize("j", [0, 1, 4])
def test_forward_segment_maps_match_truncations(j):
    G = parse_group("rep(omega,Z)", UNIVERSE)
    g = unit((0, j))
    F = parse_group(f"rep({j + 4},Z)", UNIVERSE)
    O = FiniteGroupOracle(F)
    v = O.vec(unit((0, j)))
    assert map_s(G, g, 2).cut == O.cut_of(O.s_cut(v, 2))
    assert map_t(G, g, 2).cut == O.cut_of(O.t_cut(v, 2))
    assert map_t_plus(G, g, 2).cut == O.cut_of(O.tplus_cut(v, 2))


# ----------------------------------------------------------- iota plus

def test_iota_plus_examples():
    Z = parse_group("Z", UNIVERSE)
    assert iota_plus(Z, SpinePoint(after_all(Z), T, 2)) == SpinePoint(after_all(Z), T_PLUS, 2)
    G = G2()
    assert iota_plus(G, SpinePoint(after_all(G), T, 3)).cut == after_all(G)
    image = {iota_plus(G, pt).cut for pt in finite_points(G, T, 3)}
    assert is_point(G, before_all(G), T_PLUS, 3) and before_all(G) not in image
    trivial = parse_group("lex[]", UNIVERSE)
    assert finite_points(trivial, T, 2) == [SpinePoint(Cut(0), T, 2)]


def test_iota_plus_rejects_other_kinds():
    with pytest.raises(ValueError):
        iota_plus(G2(), SpinePoint(Cut(2), S, 2))


# ------------------------------------------------------------ brackets

def test_bracket_examples():
    G = G2()
    O = FiniteGroupOracle(G)
    br = subgroup_bracket(G, SpinePoint(Cut(2), S, 2), 2)
    assert O.bracket_mults(2, 2) == [2, 1]
    assert not br.contains(G, el("(1,0)")) and br.contains(G, el("(2,5)"))
    everything = [el(t) for t in ("(1,0)", "(1/3,1)", "(0,1)", "(5,-7)")]
    top = subgroup_bracket(G, SpinePoint(before_all(G), T_PLUS, 3), 4)
    assert all(top.contains(G, g) for g in everything)
    first = subgroup_bracket(G, SpinePoint(Cut(1), S, 2), 4)
    assert O.bracket_mults(1, 4) == [1, 1]
    assert all(first.contains(G, g) for g in everything)
    with pytest.raises(ValueError):
        subgroup_bracket(G, SpinePoint(Cut(1), S, 2), 0)


# ------------------------------------------------------------- colours

@pytest.mark.parametrize("text,cut,discr,q", [
    ("Z", Cut(1), True, 1),
    ("Block{2,{2}}", Cut(1), False, 2),
    (LZ, Cut(1), False, 1),
])
def test_colour_examples(text, cut, discr, q):
    G = parse_group(text, UNIVERSE)
    O = FiniteGroupOracle(G)
    c = O.index_of(cut)
    col = colours(G, SpinePoint(cut, S, 2))
    assert (col.discr, col.q_dim) == (discr, q) == (O.discr(c), O.q_dim(c, 2))
    assert all(l == 0 for _, l in col.p_dims)
    assert all(O.p_dim(c, 2, n) == 0 for n in (1, 2, 3))


def test_colours_need_an_s_point():
    with pytest.raises(ValueError):
        colours(G2(), SpinePoint(Cut(0), S, 2))


def test_dimension_collapse_on_the_grid():
    for G in finite_grid(2):
        for p in UNIVERSE:
            for pt in finite_points(G, S, p):
                assert all(l == 0 for _, l in colours(G, pt).p_dims)
                for N in (1, 2, 4):
                    assert recovered_dimension(G, pt, N) == direct_dimension(G, pt, N)


# -------------------------------------------------------------- spines

def count(M, sort):
    return sum(1 for seg in M.word for ell in seg.letters for p in ell if p.sort == sort)


def test_integers_and_rationals():
    Z, Q = parse_group("Z", UNIVERSE), parse_group("Q", UNIVERSE)
    assert count(spines(Z), "S_2") == 1 and count(spines(Q), "S_2") == 0
    assert count(spines(Z), "S_*") == 1 and count(spines(Q), "S_*") == 0


def test_t_plus_sort_of_two_block_group():
    G = G2()
    pts = finite_points(G, T_PLUS, 2)
    assert [pt.cut for pt in pts] == [Cut(0), Cut(1), Cut(2)]
    O = FiniteGroupOracle(G)
    assert O.tplus_points(2) == {0, 1, 2}
    assert O.tplus_points(3) == {0, 2} and O.t_points(3) == {2}


def test_trivial_group_spine():
    G = parse_group("lex[]", UNIVERSE)
    assert G.trivial
    M = spines(G)
    for p in G.primes:
        assert count(M, sort_name(G, S, p)) == 0
        assert count(M, sort_name(G, T, p)) == 1
        assert count(M, sort_name(G, T_PLUS, p)) == 1


def test_sort_names_include_the_generic_prime():
    G = G2()
    assert sort_name(G, S, 5) == "S_*" and sort_name(G, T_PLUS, 2) == "T+_2"


def test_spine_word_of_reversed_segment():
    G = parse_group("rep(omegaStar,Z)", UNIVERSE)
    # the finite tail of the reversed segment is absorbed into the repetition
    assert [seg.kind for seg in spines(G).word] == ["omegaStar"]


# ------------------------------------------------ tail conditions

def test_star_condition_examples():
    G = G2()
    rows = {p: ok for p, _, _, ok in check_star(G, Cut(1)).per_prime}
    assert rows[2] is False and rows[3] is True
    assert not check_star(G, Cut(1)).passes
    QZ = parse_group("lex[Q,Z]", UNIVERSE)
    rep = check_star(QZ, Cut(1))
    assert rep.passes and all(r[3] for r in rep.per_prime) and not rep.embedding_mismatches
    assert check_star(G, after_all(G)).passes


def test_end_segment_examples():
    G = G2()
    for H in (Cut(1), before_all(G), after_all(G)):
        assert end_segment_check(G, H)


def test_end_segment_on_infinite_presentations():
    for text in ("lex[rep(omegaStar,Z),Q]", "lex[Zloc{3},rep(omega,Z)]",
                 "lex[rep(omega,Zloc{2}),rep(omegaStar,Z)]"):
        G = parse_group(text, UNIVERSE)
        for H in (Cut(0), Cut(1), Cut(0, 3) if G.segments[0].order == "omega" else Cut(0, -3),
                  after_all(G)):
            assert end_segment_check(G, H)


# ------------------------------------------------------------ properties

WORDS = st.lists(st.sampled_from(BLOCKS), min_size=1, max_size=3).map(tuple)


@st.composite
def grid_element(draw):
    G = presentation(draw(WORDS))
    coords = {}
    for pos in G.positions():
        b = draw(st.integers(-2, 2)) if G.block_at(pos).rank == 2 else 0
        coords[pos] = Coord(draw(st.integers(-4, 4)), b)
    return G, ElementLiteral.of(coords)


@settings(max_examples=300)
@given(grid_element())
def test_closed_forms_match_oracle_with_wider_irrational_parts(Gg):
    G, g = Gg
    O = FiniteGroupOracle(G)
    assert element_mismatches(G, O, O.vec(g), g) == 0


@given(WORDS)
def test_point_sets_and_colours_match_oracle(word):
    G = presentation(word)
    assert structural_mismatches(G, FiniteGroupOracle(G), G.primes) == []


@given(grid_element(), st.sampled_from([2, 3, 5]))
def test_map_values_are_points_with_witnesses(Gg, p):
    G, g = Gg
    for kind in KINDS:
        try:
            pt = apply_map(G, kind, g, p)
        except DivisibleElement:
            continue
        assert is_point(G, pt.cut, kind, p)
        w = representative(G, pt)
        assert apply_map(G, kind, w, p) == pt


@given(grid_element(), st.sampled_from([2, 3, 5]))
def test_maps_are_ordered(Gg, p):
    G, g = Gg
    if g.is_zero:
        return
    O = FiniteGroupOracle(G)
    v = O.vec(g)
    # the T+ tail contains g and the T tail does not
    assert map_t_plus(G, g, p).cut < map_t(G, g, p).cut
    assert not O.in_tail(v, O.t_cut(v, p)) and O.in_tail(v, O.tplus_cut(v, p))


@given(WORDS, st.sampled_from([2, 3, 5]))
def test_iota_plus_is_injective_and_misses_at_most_the_initial_point(word, p):
    G = presentation(word)
    image = [iota_plus(G, pt) for pt in finite_points(G, T, p)]
    assert len({x.cut for x in image}) == len(image)
    assert all(is_point(G, x.cut, T_PLUS, p) for x in image)
    # as families of tails, T+ is T plus possibly the whole group
    extra = {pt.cut for pt in finite_points(G, T_PLUS, p)} - {pt.cut for pt in finite_points(G, T, p)}
    assert extra <= {before_all(G)}


def test_t_to_t_plus_depends_on_the_representative():
    G = parse_group("lex[Z,Z]", UNIVERSE)
    O = FiniteGroupOracle(G)
    zero, low = ElementLiteral(), el("(0,1)", G)
    assert map_t(G, zero, 2) == map_t(G, low, 2)
    assert map_t_plus(G, zero, 2) != map_t_plus(G, low, 2)
    assert O.t_cut(O.vec(zero), 2) == O.t_cut(O.vec(low), 2)
    assert O.tplus_cut(O.vec(zero), 2) != O.tplus_cut(O.vec(low), 2)
    # the least significant representative is used
    assert iota_plus(G, map_t(G, low, 2)) == map_t_plus(G, zero, 2)


@given(grid_element(), st.data())
def test_tail_maps_agree_with_parent_maps(Gg, data):
    G, _ = Gg
    tails = finite_tails(G)
    H = data.draw(st.sampled_from(tails[:-1]))
    Hp = tail_presentation(G, H)
    coords = {}
    for pos in Hp.positions():
        b = data.draw(st.integers(-2, 2)) if Hp.block_at(pos).rank == 2 else 0
        coords[pos] = Coord(data.draw(st.integers(-3, 3)), b)
    a = ElementLiteral.of(coords)
    if a.is_zero:
        return
    ga = element_to_parent(G, H, a)
    for p in (2, 3):
        for kind in (S, T):
            try:
                inner = apply_map(Hp, kind, a, p)
            except DivisibleElement:
                continue
            assert apply_map(G, kind, ga, p).cut == tail_to_parent_cut(G, H, inner.cut)
        inner = map_t_plus(Hp, a, p)
        outer = map_t_plus(G, ga, p).cut
        if inner.cut == before_all(Hp):
            assert outer <= H
        else:
            assert outer == tail_to_parent_cut(G, H, inner.cut)


def test_end_segment_on_full_grid():
    for G in finite_grid(2):
        for H in finite_tails(G):
            assert end_segment_check(G, H)
