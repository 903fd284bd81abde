"""Coloured multi-orders presented as segment words over cluster letters.

A cluster letter is a nonempty set of points, at most one per sort, that are
tied in the cross-sort preorder.  A word is a finite sequence of segments:
a finite list of letters, or the omega / omega* repetition of one letter.
Positions use the same ``(segment, offset)`` convention as group
presentations.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

FIN = "fin"
OMEGA = "omega"
OMEGA_STAR = "omegaStar"


class MultiOrderError(ValueError):
    pass


class EmptyStructure(MultiOrderError):
    pass


@dataclass(frozen=True, order=True)
class Point:
    sort: str
    colours: FrozenSet[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "colours", frozenset(self.colours))

    def __repr__(self) -> str:
        if not self.colours:
            return self.sort
        return f"{self.sort}[{','.join(sorted(self.colours))}]"


Letter = FrozenSet[Point]


def letter(*points) -> Letter:
    pts = []
    for p in points:
        if isinstance(p, Point):
            pts.append(p)
        elif isinstance(p, str):
            pts.append(Point(p))
        else:
            pts.append(Point(p[0], frozenset(p[1])))
    out = frozenset(pts)
    if len({p.sort for p in out}) != len(out):
        raise MultiOrderError("a cluster letter holds at most one point per sort")
    return out


def letter_str(ell: Letter) -> str:
    return "{" + " ".join(repr(p) for p in sorted(ell)) + "}"


@dataclass(frozen=True)
class WordSegment:
    kind: str
    letters: Tuple[Letter, ...]

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(frozenset(x) for x in self.letters))
        if self.kind not in (FIN, OMEGA, OMEGA_STAR):
            raise MultiOrderError(f"unknown segment kind {self.kind!r}")
        if self.kind != FIN and len(self.letters) != 1:
            raise MultiOrderError("a repetition segment carries exactly one letter")
        if not self.letters:
            raise MultiOrderError("empty segment")
        for ell in self.letters:
            if not ell:
                raise MultiOrderError("empty cluster letter")

    @property
    def letter(self) -> Letter:
        return self.letters[0]

    def has_offset(self, off: int) -> bool:
        if self.kind == FIN:
            return 0 <= off < len(self.letters)
        return off >= 0 if self.kind == OMEGA else off <= -1

    def at(self, off: int) -> Letter:
        return self.letters[off] if self.kind == FIN else self.letters[0]


def fin(*letters: Letter) -> WordSegment:
    return WordSegment(FIN, tuple(letters))


def omega(ell: Letter) -> WordSegment:
    return WordSegment(OMEGA, (ell,))


def omega_star(ell: Letter) -> WordSegment:
    return WordSegment(OMEGA_STAR, (ell,))


def zeta(ell: Letter) -> Tuple[WordSegment, WordSegment]:
    return (omega_star(ell), omega(ell))


def normalize(segments: Iterable[WordSegment]) -> Tuple[WordSegment, ...]:
    """Canonical word: merge finite runs and absorb letters into adjacent repetitions."""
    out: List[WordSegment] = []
    for seg in segments:
        if seg.kind == FIN:
            for ell in seg.letters:
                if out and out[-1].kind == OMEGA_STAR and out[-1].letter == ell:
                    continue  # l^{w*} l = l^{w*}
                if out and out[-1].kind == FIN:
                    out[-1] = WordSegment(FIN, out[-1].letters + (ell,))
                else:
                    out.append(fin(ell))
        elif seg.kind == OMEGA:
            # l ... l l^w = l^w
            while out and out[-1].kind == FIN and out[-1].letters[-1] == seg.letter:
                rest = out[-1].letters[:-1]
                if rest:
                    out[-1] = WordSegment(FIN, rest)
                else:
                    out.pop()
            out.append(seg)
        else:
            out.append(seg)
    return tuple(out)


@dataclass(frozen=True)
class ColouredMultiOrder:
    sorts: Tuple[str, ...]
    colours: Tuple[str, ...]
    word: Tuple[WordSegment, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sorts", tuple(self.sorts))
        object.__setattr__(self, "colours", tuple(self.colours))
        object.__setattr__(self, "word", tuple(self.word))
        sorts, cols = set(self.sorts), set(self.colours)
        for seg in self.word:
            for ell in seg.letters:
                for pt in ell:
                    if pt.sort not in sorts:
                        raise MultiOrderError(f"unknown sort {pt.sort!r}")
                    if not pt.colours <= cols:
                        raise MultiOrderError(f"unknown colours {sorted(pt.colours - cols)}")

    @property
    def empty(self) -> bool:
        return not self.word

    @property
    def is_finite(self) -> bool:
        return all(seg.kind == FIN for seg in self.word)

    def normalized(self) -> "ColouredMultiOrder":
        return ColouredMultiOrder(self.sorts, self.colours, normalize(self.word))

    def same_vocabulary(self, other: "ColouredMultiOrder") -> bool:
        return set(self.sorts) == set(other.sorts) and set(self.colours) == set(other.colours)

    def with_word(self, word) -> "ColouredMultiOrder":
        return ColouredMultiOrder(self.sorts, self.colours, tuple(word))

    def letter_at(self, pos: Tuple[int, int]) -> Letter:
        return self.word[pos[0]].at(pos[1])

    def valid_position(self, pos: Tuple[int, int]) -> bool:
        s, off = pos
        return 0 <= s < len(self.word) and self.word[s].has_offset(off)

    def positions(self):
        if not self.is_finite:
            raise MultiOrderError("infinite word")
        for s, seg in enumerate(self.word):
            for off in range(len(seg.letters)):
                yield (s, off)

    def n_points(self) -> int:
        if not self.is_finite:
            raise MultiOrderError("infinite word")
        return sum(len(ell) for seg in self.word for ell in seg.letters)

    def slice(self, lo=None, hi=None) -> "ColouredMultiOrder":
        """Sub-word strictly between positions ``lo`` and ``hi`` (``None`` = open end)."""
        return self.with_word(slice_word(self.word, lo, hi))

    def __add__(self, other: "ColouredMultiOrder") -> "ColouredMultiOrder":
        return sum_orders([self, other])


def _seg_slice(seg: WordSegment, lo: Optional[int], hi: Optional[int]) -> List[WordSegment]:
    """Part of a single segment strictly between offsets ``lo`` and ``hi``."""
    if seg.kind == FIN:
        a = 0 if lo is None else lo + 1
        b = len(seg.letters) if hi is None else hi
        return [WordSegment(FIN, seg.letters[a:b])] if a < b else []
    ell = seg.letter
    if seg.kind == OMEGA:
        if hi is None:
            return [seg]  # the omega tail after any copy is again omega
        a = 0 if lo is None else lo + 1
        n = hi - a
        return [WordSegment(FIN, (ell,) * n)] if n > 0 else []
    # omega*
    if lo is None:
        return [seg]
    b = -1 if hi is None else hi - 1
    n = b - lo
    return [WordSegment(FIN, (ell,) * n)] if n > 0 else []


def slice_word(word: Sequence[WordSegment], lo=None, hi=None) -> Tuple[WordSegment, ...]:
    out: List[WordSegment] = []
    for s, seg in enumerate(word):
        if lo is not None and s < lo[0]:
            continue
        if hi is not None and s > hi[0]:
            break
        a = lo[1] if lo is not None and s == lo[0] else None
        b = hi[1] if hi is not None and s == hi[0] else None
        out.extend(_seg_slice(seg, a, b))
    return tuple(out)


# ------------------------------------------------------------------ sums

def sum_orders(parts: Sequence[ColouredMultiOrder]) -> ColouredMultiOrder:
    """Ordered sum: every point of an earlier part lies below every later point."""
    if not parts:
        raise MultiOrderError("sum of an empty sequence needs a vocabulary")
    first = parts[0]
    for other in parts[1:]:
        if not first.same_vocabulary(other):
            raise MultiOrderError("vocabulary mismatch in sum")
    word: List[WordSegment] = []
    for part in parts:
        word.extend(part.word)
    return ColouredMultiOrder(first.sorts, first.colours, tuple(word))


# ------------------------------------------------------------ selections

@dataclass(frozen=True)
class SegmentSelection:
    """Selected sub-letters of one segment.

    ``explicit`` lists sub-letters for the finite part: every position of a
    finite segment, the first ``len(explicit)`` copies of an omega segment,
    or the last ``len(explicit)`` copies of an omega* segment.  ``tail`` is
    the uniform sub-letter selected on the remaining copies.
    """

    explicit: Tuple[FrozenSet[Point], ...] = ()
    tail: FrozenSet[Point] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "explicit", tuple(frozenset(x) for x in self.explicit))
        object.__setattr__(self, "tail", frozenset(self.tail))


@dataclass(frozen=True)
class SubstructureSelection:
    segments: Tuple[SegmentSelection, ...]

    @classmethod
    def whole(cls, B: ColouredMultiOrder) -> "SubstructureSelection":
        segs = []
        for seg in B.word:
            if seg.kind == FIN:
                segs.append(SegmentSelection(seg.letters))
            else:
                segs.append(SegmentSelection((), seg.letter))
        return cls(tuple(segs))

    @classmethod
    def nothing(cls, B: ColouredMultiOrder) -> "SubstructureSelection":
        segs = []
        for seg in B.word:
            if seg.kind == FIN:
                segs.append(SegmentSelection((frozenset(),) * len(seg.letters)))
            else:
                segs.append(SegmentSelection())
        return cls(tuple(segs))

    @classmethod
    def from_positions(cls, B: ColouredMultiOrder, picks) -> "SubstructureSelection":
        """Select whole letters at the given positions of a finite word."""
        picks = set(picks)
        segs = []
        for s, seg in enumerate(B.word):
            if seg.kind != FIN:
                raise MultiOrderError("from_positions needs a finite word")
            segs.append(SegmentSelection(tuple(
                ell if (s, i) in picks else frozenset() for i, ell in enumerate(seg.letters))))
        return cls(tuple(segs))

    def selected_at(self, B: ColouredMultiOrder, pos) -> FrozenSet[Point]:
        s, off = pos
        seg, sel = B.word[s], self.segments[s]
        if seg.kind == FIN:
            return sel.explicit[off]
        k = len(sel.explicit)
        if seg.kind == OMEGA:
            return sel.explicit[off] if off < k else sel.tail
        return sel.explicit[k + off] if off >= -k else sel.tail


def validate_selection(B: ColouredMultiOrder, A: SubstructureSelection) -> None:
    if len(A.segments) != len(B.word):
        raise MultiOrderError("selection does not match the word")
    for seg, sel in zip(B.word, A.segments):
        if seg.kind == FIN:
            if len(sel.explicit) != len(seg.letters):
                raise MultiOrderError("finite segment selection has the wrong length")
            pairs = zip(sel.explicit, seg.letters)
        else:
            pairs = ((sub, seg.letter) for sub in sel.explicit + (sel.tail,))
        if any(not sub <= ell for sub, ell in pairs):
            raise MultiOrderError("selection picks points outside the letter")


@dataclass(frozen=True)
class Unit:
    """One item of an unrolled word: an explicit position or a repetition tail."""

    kind: str  # FIN for a single explicit position, else OMEGA / OMEGA_STAR
    letter: Letter
    selected: FrozenSet[Point]
    pos: Optional[Tuple[int, int]] = None  # explicit positions only
    seg: int = -1


def unroll(B: ColouredMultiOrder, A: Optional[SubstructureSelection] = None,
           copies: int = 0) -> List[Unit]:
    """Expand ``B`` (with selection ``A``) into explicit units and repetition tails.

    Omega segments expose their first ``max(copies, len(explicit))`` copies
    explicitly; omega* segments their last ones.
    """
    if A is None:
        A = SubstructureSelection.whole(B)
    validate_selection(B, A)
    units: List[Unit] = []
    for s, (seg, sel) in enumerate(zip(B.word, A.segments)):
        if seg.kind == FIN:
            for i, ell in enumerate(seg.letters):
                units.append(Unit(FIN, ell, sel.explicit[i], (s, i), s))
            continue
        k = max(copies, len(sel.explicit))
        ell = seg.letter
        if seg.kind == OMEGA:
            for i in range(k):
                units.append(Unit(FIN, ell, A.selected_at(B, (s, i)), (s, i), s))
            units.append(Unit(OMEGA, ell, sel.tail, None, s))
        else:
            units.append(Unit(OMEGA_STAR, ell, sel.tail, None, s))
            for i in range(-k, 0):
                units.append(Unit(FIN, ell, A.selected_at(B, (s, i)), (s, i), s))
    return units


def selected_order(B: ColouredMultiOrder, A: SubstructureSelection) -> ColouredMultiOrder:
    """The sub-multi-order picked out by ``A``."""
    word: List[WordSegment] = []
    for u in unroll(B, A):
        if not u.selected:
            continue
        if u.kind == FIN:
            word.append(fin(u.selected))
        else:
            word.append(WordSegment(u.kind, (u.selected,)))
    return B.with_word(normalize(word))


def restrict(B: ColouredMultiOrder, outer: SubstructureSelection,
             inner: SubstructureSelection):
    """``(outer-structure, inner-selection inside it)`` for ``inner <= outer``."""
    word: List[WordSegment] = []
    segsel: List[SegmentSelection] = []
    outer_units = unroll(B, outer, _explicit_span(outer, inner))
    inner_units = unroll(B, inner, _explicit_span(outer, inner))
    for uo, ui in zip(outer_units, inner_units):
        if not uo.selected:
            if ui.selected:
                raise MultiOrderError("inner selection is not contained in the outer one")
            continue
        if not ui.selected <= uo.selected:
            raise MultiOrderError("inner selection is not contained in the outer one")
        if uo.kind == FIN:
            word.append(fin(uo.selected))
            segsel.append(SegmentSelection((ui.selected,)))
        else:
            word.append(WordSegment(uo.kind, (uo.selected,)))
            segsel.append(SegmentSelection((), ui.selected))
    return B.with_word(word), SubstructureSelection(tuple(segsel))


def _explicit_span(*sels: SubstructureSelection) -> int:
    return max((len(s.explicit) for sel in sels for s in sel.segments), default=0)


def selection_from_units(B: ColouredMultiOrder, units: List[Unit],
                         picks: List[FrozenSet[Point]]) -> SubstructureSelection:
    """Rebuild a selection of ``B`` from per-unit picks on an unrolling of ``B``."""
    explicit: Dict[int, List] = {s: [] for s in range(len(B.word))}
    tails: Dict[int, FrozenSet[Point]] = {}
    for u, pick in zip(units, picks):
        if u.kind == FIN:
            explicit[u.seg].append(pick)
        else:
            tails[u.seg] = pick
    return SubstructureSelection(tuple(
        SegmentSelection(tuple(explicit[s]), tails.get(s, frozenset()))
        for s in range(len(B.word))))


# ----------------------------------------------------------------- hulls

def _hull_picks(B: ColouredMultiOrder, A: SubstructureSelection):
    units = unroll(B, A, _explicit_span(A))
    has = [bool(u.selected) for u in units]
    n = len(units)
    after = [False] * (n + 1)
    for i in range(n - 1, -1, -1):
        after[i] = after[i + 1] or has[i]
    before = [False] * (n + 1)
    for i in range(n):
        before[i + 1] = before[i] or has[i]
    # before[i+1] includes unit i itself: a selected point is tied with its letter
    return units, [before[i + 1] for i in range(n)], [after[i] for i in range(n)]


def convex_hull(B: ColouredMultiOrder, A: SubstructureSelection) -> SubstructureSelection:
    units, below, above = _hull_picks(B, A)
    picks = [u.letter if (lo and hi) else frozenset() for u, lo, hi in zip(units, below, above)]
    return selection_from_units(B, units, picks)


def left_hull(B: ColouredMultiOrder, A: SubstructureSelection) -> SubstructureSelection:
    """``B_{<A} + <A>_B``: everything with a selected point at or after it."""
    units, _, above = _hull_picks(B, A)
    return selection_from_units(B, units, [u.letter if hi else frozenset()
                                           for u, hi in zip(units, above)])


def right_hull(B: ColouredMultiOrder, A: SubstructureSelection) -> SubstructureSelection:
    """``<A>_B + B_{>A}``: everything with a selected point at or before it."""
    units, below, _ = _hull_picks(B, A)
    return selection_from_units(B, units, [u.letter if lo else frozenset()
                                           for u, lo in zip(units, below)])


def intersect(B: ColouredMultiOrder, X: SubstructureSelection,
              Y: SubstructureSelection) -> SubstructureSelection:
    span = _explicit_span(X, Y)
    ux, uy = unroll(B, X, span), unroll(B, Y, span)
    return selection_from_units(B, ux, [a.selected & b.selected for a, b in zip(ux, uy)])


def union(B: ColouredMultiOrder, X: SubstructureSelection,
          Y: SubstructureSelection) -> SubstructureSelection:
    span = _explicit_span(X, Y)
    ux, uy = unroll(B, X, span), unroll(B, Y, span)
    return selection_from_units(B, ux, [a.selected | b.selected for a, b in zip(ux, uy)])


def selection_leq(B: ColouredMultiOrder, X: SubstructureSelection,
                  Y: SubstructureSelection) -> bool:
    span = _explicit_span(X, Y)
    return all(a.selected <= b.selected
               for a, b in zip(unroll(B, X, span), unroll(B, Y, span)))


def selection_eq(B: ColouredMultiOrder, X: SubstructureSelection,
                 Y: SubstructureSelection) -> bool:
    return selection_leq(B, X, Y) and selection_leq(B, Y, X)


# --------------------------------------------------------- boundedness

LEFT = "left"
RIGHT = "right"


def bounded(A: ColouredMultiOrder, sort: str, side: str) -> bool:
    """Whether component ``A_sort`` has a bound in ``A`` on the given side.

    In the segment grammar, ``A_sort`` is unbounded on the right exactly when
    the last segment is an omega repetition whose letter meets ``sort``
    (dually for the left with omega*).  Otherwise a point of the extreme
    letter, or of the last letter meeting the sort, bounds it.
    """
    if A.empty:
        raise EmptyStructure("boundedness is only defined for nonempty multi-orders")
    if side not in (LEFT, RIGHT):
        raise ValueError(side)
    end = A.word[-1] if side == RIGHT else A.word[0]
    kind = OMEGA if side == RIGHT else OMEGA_STAR
    if end.kind == kind:
        return not any(pt.sort == sort for pt in end.letter)
    return True


def unbounded_sorts(A: ColouredMultiOrder, side: str) -> List[str]:
    return [s for s in A.sorts if not bounded(A, s, side)]


def augmentable(A: ColouredMultiOrder, side: str) -> bool:
    return bool(unbounded_sorts(A, side))


def augment_witness(A: ColouredMultiOrder, side: str) -> ColouredMultiOrder:
    """A nonempty ``X`` with ``A`` elementary in ``A + X`` (or ``X + A``).

    The witness is a zeta-indexed copy of the unbounded end letter.
    """
    if not augmentable(A, side):
        raise MultiOrderError(f"no component is unbounded on the {side}")
    ell = A.word[-1].letter if side == RIGHT else A.word[0].letter
    return A.with_word(zeta(ell))


def augmented(A: ColouredMultiOrder, side: str,
              X: Optional[ColouredMultiOrder] = None):
    """``(A + X, selection of A)`` or ``(X + A, selection of A)``."""
    X = augment_witness(A, side) if X is None else X
    if X.empty:
        raise EmptyStructure("augment must be nonempty")
    if side == RIGHT:
        big = A + X
        sel = SubstructureSelection(SubstructureSelection.whole(A).segments
                                    + SubstructureSelection.nothing(X).segments)
    else:
        big = X + A
        sel = SubstructureSelection(SubstructureSelection.nothing(X).segments
                                    + SubstructureSelection.whole(A).segments)
    return big, sel


# ------------------------------------------------------------------ cuts

@dataclass(frozen=True)
class CutDescriptor:
    """A gap of the word: just before segment ``seg``, or inside finite segment ``seg``
    just after offset ``off``.  Gaps are never realized by points of the word itself."""

    seg: int
    off: Optional[int]
    satisfiable: bool
    realized: bool = False
    unbounded_left_of: Tuple[str, ...] = ()
    unbounded_right_of: Tuple[str, ...] = ()

    @property
    def where(self) -> str:
        return f"|{self.seg}" if self.off is None else f"{self.seg}:{self.off}|"


def cuts(A: ColouredMultiOrder) -> List[CutDescriptor]:
    """All gaps of the presentation with their satisfiability."""
    out = []
    n = len(A.word)
    for s in range(n + 1):
        left = A.with_word(A.word[:s])
        right = A.with_word(A.word[s:])
        ul = tuple(unbounded_sorts(left, RIGHT)) if not left.empty else ()
        ur = tuple(unbounded_sorts(right, LEFT)) if not right.empty else ()
        out.append(CutDescriptor(s, None, bool(ul or ur), False, ul, ur))
        if s < n and A.word[s].kind == FIN:
            for off in range(len(A.word[s].letters) - 1):
                out.append(CutDescriptor(s, off, False))
    return out


def satisfiable_unrealized(A: ColouredMultiOrder) -> List[CutDescriptor]:
    return [c for c in cuts(A) if c.satisfiable and not c.realized]


def realize_cuts(A: ColouredMultiOrder, chosen: Sequence[CutDescriptor],
                 filler: ColouredMultiOrder):
    """Insert ``filler`` into each chosen gap; returns ``(order, selection of A)``."""
    if filler.empty:
        raise EmptyStructure("filler must be nonempty")
    if not A.same_vocabulary(filler):
        raise MultiOrderError("vocabulary mismatch")
    allowed = {(c.seg, c.off) for c in satisfiable_unrealized(A)}
    wanted = set()
    for c in chosen:
        if (c.seg, c.off) not in allowed:
            raise MultiOrderError(f"cut {c.where} is not satisfiable-unrealized")
        wanted.add(c.seg)
    word: List[WordSegment] = []
    sel: List[SegmentSelection] = []
    whole = SubstructureSelection.whole(A).segments
    none_f = SubstructureSelection.nothing(filler).segments
    for s in range(len(A.word) + 1):
        if s in wanted:
            word.extend(filler.word)
            sel.extend(none_f)
        if s < len(A.word):
            word.append(A.word[s])
            sel.append(whole[s])
    return A.with_word(word), SubstructureSelection(tuple(sel))
