"""Element arithmetic, the convex-tail lattice and element-level predicates.

Convex subgroups of a presented group are exactly the tails ``H_{>c}`` of
elements supported strictly after a cut ``c`` of the index order.  A cut is
stored as ``Cut(seg, off)``: ``off is None`` is the boundary just before
segment ``seg`` (``seg == n_segments`` is the end), otherwise the cut just
after position ``(seg, off)``.  Cuts are canonicalized so that each
Dedekind cut has exactly one representation.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Tuple

from .presentation import (
    FINITE, OMEGA, OMEGA_STAR, Coord, ElementLiteral, GroupPresentation, Position,
    PresentationError, unit,
)


@dataclass(frozen=True)
class Cut:
    seg: int
    off: Optional[int] = None

    @property
    def key(self) -> Tuple[int, int, int]:
        return (self.seg, 0, 0) if self.off is None else (self.seg, 1, self.off)

    def __lt__(self, other: "Cut") -> bool:
        return self.key < other.key

    def __le__(self, other: "Cut") -> bool:
        return self.key <= other.key

    def __gt__(self, other: "Cut") -> bool:
        return self.key > other.key

    def __ge__(self, other: "Cut") -> bool:
        return self.key >= other.key

    @property
    def is_boundary(self) -> bool:
        return self.off is None

    def __str__(self) -> str:
        return f"|{self.seg}" if self.off is None else f"{self.seg}:{self.off}|"


# A ConvexTail is its cut: it denotes H_{>cut}.
ConvexTail = Cut


def before_all(G: GroupPresentation) -> Cut:
    return Cut(0)


def after_all(G: GroupPresentation) -> Cut:
    return Cut(G.n_segments)


def cut_after(G: GroupPresentation, pos: Position) -> Cut:
    """Canonical cut just after ``pos``."""
    s, off = pos
    seg = G.segments[s]
    if off == seg.last_offset:
        return Cut(s + 1)
    return Cut(s, off)


def cut_before(G: GroupPresentation, pos: Position) -> Cut:
    """Canonical cut just before ``pos``."""
    s, off = pos
    seg = G.segments[s]
    if seg.order == OMEGA_STAR:
        return Cut(s, off - 1)
    if off == 0:
        return Cut(s)
    return Cut(s, off - 1)


def max_position(G: GroupPresentation, c: Cut) -> Optional[Position]:
    """Greatest position strictly left of the cut, if there is one."""
    if c.off is not None:
        return (c.seg, c.off)
    if c.seg == 0:
        return None
    last = G.segments[c.seg - 1].last_offset
    return None if last is None else (c.seg - 1, last)


def left_of(c: Cut, pos: Position) -> bool:
    """Whether ``pos`` lies left of the cut, i.e. outside ``H_{>c}``."""
    s, off = pos
    return s < c.seg or (s == c.seg and c.off is not None and off <= c.off)


def subset(c1: Cut, c2: Cut) -> bool:
    """``H_{>c1} <= H_{>c2}`` as subgroups."""
    return c2 <= c1


def convex_tails(G: GroupPresentation) -> Iterator[Cut]:
    """Enumerate canonical cuts in increasing order (decreasing subgroups).

    Omega and omega* segments contribute infinitely many interior cuts; the
    generator is lazy, and for those segments yields interior cuts forever.
    Use :func:`tail_families` for a finite description.
    """
    for s, seg in enumerate(G.segments):
        yield Cut(s)
        if seg.order == FINITE:
            for off in range(seg.length - 1):
                yield Cut(s, off)
        elif seg.order == OMEGA:
            k = 0
            while True:
                yield Cut(s, k)
                k += 1
        else:
            k = -2
            while True:  # never reaches the boundary; callers must truncate
                yield Cut(s, k)
                k -= 1
    yield Cut(G.n_segments)


def tail_families(G: GroupPresentation):
    """Finite cut grammar: ``("cut", Cut)`` items and ``("omega"|"omegaStar", s)`` families."""
    out = []
    for s, seg in enumerate(G.segments):
        out.append(("cut", Cut(s)))
        if seg.order == FINITE:
            out.extend(("cut", Cut(s, off)) for off in range(seg.length - 1))
        else:
            out.append((seg.order, s))
    out.append(("cut", Cut(G.n_segments)))
    return out


def finite_tails(G: GroupPresentation):
    if not G.is_finite:
        raise PresentationError("infinite", "finite_tails needs a finite presentation")
    return list(convex_tails(G))


def quotient(G: GroupPresentation, c: Cut) -> "QuotientDescriptor":
    """The prefix group ``G / H_{>c}``."""
    segs = list(G.segments[:c.seg])
    if c.off is not None:
        seg = G.segments[c.seg]
        if seg.order == OMEGA_STAR:
            raise PresentationError("quotient", "prefix of an omega* segment is not presentable")
        from .presentation import Segment
        segs.append(Segment(FINITE, seg.block, c.off + 1))
    head = GroupPresentation(tuple(segs), G.universe)
    mp = max_position(G, c)
    discrete = mp is not None and G.block_at(mp).discrete
    return QuotientDescriptor(head, discrete, unit(mp) if discrete else None)


@dataclass(frozen=True)
class QuotientDescriptor:
    head: GroupPresentation
    discrete: bool
    least_positive: Optional[ElementLiteral]


def tail_presentation(G: GroupPresentation, c: Cut) -> GroupPresentation:
    """``H_{>c}`` as a presentation of its own."""
    from .presentation import Segment
    if c.off is None:
        segs = list(G.segments[c.seg:])
    else:
        seg = G.segments[c.seg]
        if seg.order == FINITE:
            first = Segment(FINITE, seg.block, seg.length - c.off - 1)
        elif seg.order == OMEGA:
            first = seg
        else:
            first = Segment(FINITE, seg.block, -c.off - 1)
        segs = [first] + list(G.segments[c.seg + 1:])
    return GroupPresentation(tuple(segs), G.universe)


def tail_to_parent_position(G: GroupPresentation, c: Cut, pos: Position) -> Position:
    """Translate a position of ``tail_presentation(G, c)`` to a position of ``G``."""
    s, off = pos
    if c.off is None or s > 0:
        return (s + c.seg, off)
    return (c.seg, c.off + 1 + off)


def tail_to_parent_cut(G: GroupPresentation, c: Cut, t: Cut) -> Cut:
    """Translate a cut of ``tail_presentation(G, c)`` to the corresponding cut of ``G``."""
    if t.off is None:
        return c if t.seg == 0 else Cut(c.seg + t.seg)
    return cut_after(G, tail_to_parent_position(G, c, (t.seg, t.off)))


def element_to_parent(G: GroupPresentation, c: Cut, g: ElementLiteral) -> ElementLiteral:
    return ElementLiteral(tuple((tail_to_parent_position(G, c, p), v) for p, v in g.support))


def parent_to_tail_position(G: GroupPresentation, c: Cut, pos: Position) -> Position:
    s, off = pos
    if c.off is None:
        return (s - c.seg, off)
    if s > c.seg:
        return (s - c.seg, off)
    return (0, off - c.off - 1)


def element_to_tail(G: GroupPresentation, c: Cut, g: ElementLiteral) -> ElementLiteral:
    if any(left_of(c, p) for p, _ in g.support):
        raise PresentationError("tail", "element is not in the convex subgroup")
    return ElementLiteral(tuple((parent_to_tail_position(G, c, p), v) for p, v in g.support))


# ---------------------------------------------------------------- arithmetic

def add(g: ElementLiteral, h: ElementLiteral) -> ElementLiteral:
    return g + h


def neg(g: ElementLiteral) -> ElementLiteral:
    return -g


def sign(g: ElementLiteral) -> int:
    return 0 if g.is_zero else g.support[0][1].sign()


def compare(g: ElementLiteral, h: ElementLiteral) -> int:
    """-1, 0 or 1 according to the lexicographic order."""
    return sign(g - h)


def in_multiple(G: GroupPresentation, pos: Position, c: Coord, m: int) -> bool:
    return G.block_at(pos).contains_multiple(c, m)


def in_coset(G: GroupPresentation, g: ElementLiteral, H: Cut, m: int) -> bool:
    """Decide ``g in H + mG``."""
    if m < 1:
        raise ValueError("m must be >= 1")
    return all(in_multiple(G, p, c, m) for p, c in g.support if left_of(H, p))


# ------------------------------------------------------- element predicates

def pred_eq_bullet(G: GroupPresentation, g: ElementLiteral, k: int) -> bool:
    """``g =_bullet k_bullet``."""
    if k == 0:
        raise ValueError("k must be nonzero")
    if g.is_zero:
        return False
    top, c = g.support[0]
    return G.block_at(top).discrete and c == Coord(k)


def pred_cong_bullet(G: GroupPresentation, g: ElementLiteral, m: int, k: int) -> bool:
    """``g ==_{bullet m} k_bullet``."""
    if m < 2 or not 1 <= k <= m - 1:
        raise ValueError("need m >= 2 and 1 <= k <= m-1")
    for pos, c in g.support:
        block = G.block_at(pos)
        if block.discrete and (c.a - k) % m == 0 and (c.a - k).denominator == 1:
            return True
        if not block.contains_multiple(c, m):
            return False
    return False


def pred_D(G: GroupPresentation, g: ElementLiteral, p: int, r: int, s: int) -> bool:
    """``D_{p^r}^{[p^s]}(g)``; on split groups the value does not depend on ``s``."""
    if r < 1 or s < r:
        raise ValueError("need 1 <= r <= s")
    q = p ** r
    for pos, c in g.support:
        if not in_multiple(G, pos, c, q):
            return not G.block_at(pos).divisible_by(p)
    return False
