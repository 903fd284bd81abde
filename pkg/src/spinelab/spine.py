"""Spine sorts of a presented group, their maps, brackets and colours.

A spine point is a convex tail together with the sort that carries it.  The
spine order is the cut order: a later point denotes a smaller subgroup.
All maps below are closed forms over the segment word; the tests compare
them with a brute-force evaluator on finite presentations.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import gcd
from typing import List, Optional, Tuple

from .group_model import (
    Cut, after_all, before_all, cut_after, cut_before, left_of, max_position,
    tail_families, tail_presentation, tail_to_parent_cut, element_to_parent,
)
from .multiorder import (
    ColouredMultiOrder, Letter, Point, WordSegment, fin, normalize, omega, omega_star,
)
from .presentation import (
    FINITE, OMEGA, OMEGA_STAR, ElementLiteral, GroupPresentation, Position, unit,
)

S, T, T_PLUS = "S", "T", "T+"
KINDS = (S, T, T_PLUS)
DISCR = "discr"
COLOURS = (DISCR, "Q1", "Q2")


class DivisibleElement(ValueError):
    pass


@dataclass(frozen=True)
class SpinePoint:
    cut: Cut
    kind: str
    p: int

    def leq(self, other: "SpinePoint") -> bool:
        """Spine order: ``self <= other`` iff ``other``'s subgroup is inside ``self``'s."""
        return self.cut <= other.cut


@dataclass(frozen=True)
class ColourSet:
    discr: bool
    q_dim: int
    p_dims: Tuple[Tuple[int, int], ...] = ()

    def labels(self) -> frozenset:
        out = {f"Q{self.q_dim}"} if self.q_dim else set()
        if self.discr:
            out.add(DISCR)
        return frozenset(out)


def sort_name(G: GroupPresentation, kind: str, p: int) -> str:
    label = "*" if p not in G.universe else str(p)
    return f"{kind}_{label}"


def sort_names(G: GroupPresentation) -> Tuple[str, ...]:
    return tuple(sort_name(G, k, p) for p in G.primes for k in KINDS)


# ---------------------------------------------------------------- helpers

def _nd(G: GroupPresentation, s: int, p: int) -> bool:
    return not G.segments[s].block.divisible_by(p)


def _next_nd(G: GroupPresentation, start: int, p: int) -> int:
    s = start
    while s < G.n_segments and not _nd(G, s, p):
        s += 1
    return s


def _last_nd_before(G: GroupPresentation, stop: int, p: int) -> Optional[int]:
    for s in range(stop - 1, -1, -1):
        if _nd(G, s, p):
            return s
    return None


def _has_pred_in_segment(G: GroupPresentation, pos: Position) -> bool:
    s, off = pos
    return G.segments[s].order == OMEGA_STAR or off >= 1


def _after_last_nd(G: GroupPresentation, stop: int, p: int) -> Cut:
    s = _last_nd_before(G, stop, p)
    return before_all(G) if s is None else Cut(s + 1)


# ------------------------------------------------------------------- maps

def map_s(G: GroupPresentation, g: ElementLiteral, p: int) -> SpinePoint:
    """Largest convex tail ``H`` with ``g`` outside ``H + pG``."""
    for pos, c in g.support:
        if not G.block_at(pos).contains_multiple(c, p):
            return SpinePoint(cut_after(G, pos), S, p)
    raise DivisibleElement(f"element is divisible by {p}")


def map_t(G: GroupPresentation, g: ElementLiteral, p: int) -> SpinePoint:
    if g.is_zero:
        return SpinePoint(after_all(G), T, p)
    top = g.top
    if _nd(G, top[0], p):
        return SpinePoint(cut_after(G, top), T, p)
    s = _next_nd(G, top[0] + 1, p)
    if s == G.n_segments:
        return SpinePoint(after_all(G), T, p)
    if G.segments[s].order == OMEGA_STAR:
        return SpinePoint(Cut(s), T, p)
    return SpinePoint(cut_after(G, (s, 0)), T, p)


def map_t_plus(G: GroupPresentation, g: ElementLiteral, p: int) -> SpinePoint:
    if g.is_zero:
        return SpinePoint(_after_last_nd(G, G.n_segments, p), T_PLUS, p)
    top = g.top
    if _nd(G, top[0], p) and _has_pred_in_segment(G, top):
        return SpinePoint(cut_before(G, top), T_PLUS, p)
    return SpinePoint(_after_last_nd(G, top[0], p), T_PLUS, p)


# ------------------------------------------------------------- membership

def is_point(G: GroupPresentation, c: Cut, kind: str, p: int) -> bool:
    """Whether the tail at ``c`` is a point of the given sort."""
    if kind == S:
        mp = max_position(G, c)
        return mp is not None and _nd(G, mp[0], p)
    if kind == T:
        if is_point(G, c, S, p) or c == after_all(G):
            return True
        s = c.seg
        return (c.off is None and 1 <= s < G.n_segments and _nd(G, s, p)
                and G.segments[s].order == OMEGA_STAR and not _nd(G, s - 1, p))
    if kind == T_PLUS:
        if c.off is not None:
            return _nd(G, c.seg, p)
        b = c.seg
        if b > 0 and not _nd(G, b - 1, p):
            return False
        s = _next_nd(G, b, p)
        return s > b or s == G.n_segments or G.segments[s].order != OMEGA_STAR
    raise ValueError(kind)


def kinds_at(G: GroupPresentation, c: Cut, p: int) -> List[str]:
    return [k for k in KINDS if is_point(G, c, k, p)]


def representative(G: GroupPresentation, pt: SpinePoint) -> ElementLiteral:
    """An element whose image under the point's map is ``pt``."""
    c, p = pt.cut, pt.p
    if not is_point(G, c, pt.kind, p):
        raise ValueError(f"{c} is not a {pt.kind} point at {p}")
    if pt.kind == S:
        return unit(max_position(G, c))
    if pt.kind == T:
        if c == after_all(G):
            return ElementLiteral()
        mp = max_position(G, c)
        if mp is not None and _nd(G, mp[0], p):
            return unit(mp)
        seg = G.segments[c.seg - 1]
        return unit((c.seg - 1, seg.last_offset if seg.last_offset is not None else 0))
    if c.off is not None:
        return unit((c.seg, c.off + 1))
    s = _next_nd(G, c.seg, p)
    if s > c.seg:
        seg = G.segments[c.seg]
        return unit((c.seg, seg.first_offset if seg.first_offset is not None else -1))
    if s == G.n_segments:
        return ElementLiteral()
    return unit((s, 0))


_MAPS = {S: map_s, T: map_t, T_PLUS: map_t_plus}


def apply_map(G: GroupPresentation, kind: str, g: ElementLiteral, p: int) -> SpinePoint:
    return _MAPS[kind](G, g, p)


def iota_plus(G: GroupPresentation, pt: SpinePoint) -> SpinePoint:
    """Send a T point to the T+ point of its least significant representative."""
    if pt.kind != T:
        raise ValueError("iota_plus is defined on T points")
    return map_t_plus(G, representative(G, pt), pt.p)


# --------------------------------------------------------------- brackets

@dataclass(frozen=True)
class Bracket:
    """The subgroup ``H_{>cut} + mG``: positions left of ``cut`` lie in ``m`` times their block."""

    cut: Cut
    m: int

    def contains(self, G: GroupPresentation, g: ElementLiteral) -> bool:
        return all(G.block_at(pos).contains_multiple(c, self.m)
                   for pos, c in g.support if left_of(self.cut, pos))


def subgroup_bracket(G: GroupPresentation, pt: SpinePoint, m: int) -> Bracket:
    """Intersection of ``H + mG`` over convex ``H`` strictly containing the point's tail."""
    if m < 1:
        raise ValueError("m must be >= 1")
    mp = max_position(G, pt.cut)
    return Bracket(pt.cut if mp is None else cut_before(G, mp), m)


def _positions_between(G: GroupPresentation, lo: Cut, hi: Cut) -> List[Position]:
    """Positions right of ``lo`` and left of ``hi``; must be finitely many."""
    out = []
    c = hi
    while lo < c:
        mp = max_position(G, c)
        if mp is None:
            raise ValueError("infinitely many positions between the cuts")
        out.append(mp)
        c = cut_before(G, mp)
    return out


def quotient_dimension(G: GroupPresentation, p: int, big: Bracket, small: Bracket) -> int:
    """``dim_{F_p} (big + pG) / (small + pG)`` for nested product subgroups."""
    def local(br: Bracket, pos: Position) -> bool:  # True: the full block, False: p * block
        return not left_of(br.cut, pos) or gcd(br.m, p) == 1
    lo, hi = min(big.cut, small.cut), max(big.cut, small.cut)
    dim = 0
    for pos in _positions_between(G, lo, hi):
        a, b = local(big, pos), local(small, pos)
        if a and not b:
            dim += G.block_at(pos).p_dimension(p)
        elif b and not a:
            raise ValueError("subgroups are not nested")
    return dim


def colours(G: GroupPresentation, pt: SpinePoint, depth: int = 3) -> ColourSet:
    if pt.kind != S or not is_point(G, pt.cut, S, pt.p):
        raise ValueError("colours are defined on S points")
    p = pt.p
    mp = max_position(G, pt.cut)
    own = Bracket(pt.cut, p)  # the tail plus pG
    q = quotient_dimension(G, p, subgroup_bracket(G, pt, p), own)
    pd = tuple((n, quotient_dimension(G, p, subgroup_bracket(G, pt, p ** n),
                                      subgroup_bracket(G, pt, p ** (n + 1))))
               for n in range(1, depth + 1))
    return ColourSet(G.block_at(mp).discrete, q, pd)


def recovered_dimension(G: GroupPresentation, pt: SpinePoint, N: int) -> int:
    """``dim (G_a^{[p^N]} + pG)/(G_a + pG)`` rebuilt from the Q and P colours."""
    cs = colours(G, pt, max(N - 1, 1))
    return cs.q_dim - sum(l for n, l in cs.p_dims if n < N)


def direct_dimension(G: GroupPresentation, pt: SpinePoint, N: int) -> int:
    return quotient_dimension(G, pt.p, subgroup_bracket(G, pt, pt.p ** N), Bracket(pt.cut, pt.p))


# ------------------------------------------------------------------ spines

def points_at(G: GroupPresentation, c: Cut) -> Letter:
    pts = []
    for p in G.primes:
        for k in kinds_at(G, c, p):
            cols = colours(G, SpinePoint(c, k, p)).labels() if k == S else frozenset()
            pts.append(Point(sort_name(G, k, p), cols))
    return frozenset(pts)


def spine_items(G: GroupPresentation):
    """``(kind, cut)`` items of the spine word before normalization.

    ``kind`` is ``"fin"`` for single cuts, else the repetition type whose
    uniform letter is read at the representative cut.
    """
    items = []
    for tag, x in tail_families(G):
        if tag == "cut":
            items.append(("fin", x))
        elif tag == OMEGA:
            items += [("fin", Cut(x, 0)), ("fin", Cut(x, 1)), (OMEGA, Cut(x, 2))]
        else:
            items += [(OMEGA_STAR, Cut(x, -3)), ("fin", Cut(x, -2))]
    return items


def spines(G: GroupPresentation) -> ColouredMultiOrder:
    word: List[WordSegment] = []
    for kind, c in spine_items(G):
        ell = points_at(G, c)
        if not ell:
            continue
        if kind == "fin":
            word.append(fin(ell))
        elif kind == OMEGA:
            word.append(omega(ell))
        else:
            word.append(omega_star(ell))
    return ColouredMultiOrder(sort_names(G), COLOURS, normalize(word))


def finite_points(G: GroupPresentation, kind: str, p: int) -> List[SpinePoint]:
    """All points of one sort of a finite presentation, in spine order."""
    from .group_model import finite_tails
    return [SpinePoint(c, kind, p) for c in finite_tails(G) if is_point(G, c, kind, p)]


# ------------------------------------------------------- convex subgroups

def _unit_grid(G: GroupPresentation, width: int = 3) -> List[ElementLiteral]:
    """Small elements touching the first few positions of every segment."""
    out = [ElementLiteral()]
    for s, seg in enumerate(G.segments):
        if seg.order == FINITE:
            offs = range(seg.length)
        elif seg.order == OMEGA:
            offs = range(width)
        else:
            offs = range(-width, 0)
        for off in offs:
            for k in (1, 2, 3, 6):
                out.append(unit((s, off), k))
            if seg.block.rank == 2:
                out.append(unit((s, off), 1, sqrt2=True))
    extra = [a + b for a in out[1:8] for b in out[1:8] if a.top != b.top]
    return out + extra


@dataclass(frozen=True)
class StarReport:
    passes: bool
    per_prime: Tuple[Tuple[int, bool, bool, bool], ...]  # (p, defines H, G/H divisible, pass)
    embedding_mismatches: Tuple[str, ...] = ()


def _defined_by_nonzero(Hp: GroupPresentation, p: int) -> bool:
    """Some nonzero ``a`` in ``H`` has its T+ tail equal to ``H``."""
    if Hp.trivial:
        return False
    seg = Hp.segments[0]
    a = unit((0, seg.first_offset if seg.first_offset is not None else -1))
    return map_t_plus(Hp, a, p).cut == before_all(Hp)


def quotient_divisible(G: GroupPresentation, H: Cut, p: int) -> bool:
    last = H.seg if H.off is not None else H.seg - 1
    return all(G.segments[s].block.divisible_by(p) for s in range(last + 1))


def check_star(G: GroupPresentation, H: Cut) -> StarReport:
    Hp = tail_presentation(G, H)
    rows = []
    for p in G.primes:
        defines = _defined_by_nonzero(Hp, p)
        div = quotient_divisible(G, H, p)
        rows.append((p, defines, div, (not defines) or div))
    ok = all(r[3] for r in rows)
    mism: Tuple[str, ...] = ()
    if ok:
        mism = tuple(embedding_mismatches(G, H))
    return StarReport(ok and not mism, tuple(rows), mism)


def embedding_mismatches(G: GroupPresentation, H: Cut) -> List[str]:
    """Pointwise check that the H-spine maps agree with the G-spine maps on H."""
    Hp = tail_presentation(G, H)
    bad = []
    for a in _unit_grid(Hp):
        if a.is_zero:
            continue
        ga = element_to_parent(G, H, a)
        for p in G.primes:
            for kind in KINDS:
                try:
                    inner = apply_map(Hp, kind, a, p)
                except DivisibleElement:
                    continue
                outer = apply_map(G, kind, ga, p)
                want = tail_to_parent_cut(G, H, inner.cut)
                if kind == T_PLUS and inner.cut == before_all(Hp):
                    want = before_all(G)  # a point defining H goes to G itself
                if outer.cut != want:
                    bad.append(f"{kind}_{p} at {a.support}: {outer.cut} != {want}")
    return bad


def end_segment_check(G: GroupPresentation, H: Cut) -> bool:
    """Points of the tail's spine, minus those denoting the tail itself, match
    the points of the whole spine strictly after the tail."""
    Hp = tail_presentation(G, H)
    if sort_names(Hp) != sort_names(G):
        Hp = Hp.with_universe(G.universe)
    for kind, t in spine_items(Hp):
        if t == before_all(Hp):
            continue
        if points_at(Hp, t) != points_at(G, tail_to_parent_cut(G, H, t)):
            return False
    return True
