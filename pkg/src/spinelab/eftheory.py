"""Rank-n Ehrenfeucht-Fraisse theories of coloured multi-orders.

A rank-n token of a word ``W`` is the set of triples
``(info(x), token_{n-1}(W_<x), token_{n-1}(W_>x))`` over the points ``x``,
where ``W_<x`` and ``W_>x`` exclude the whole cluster of ``x`` and ``info``
records the sort and colours of ``x`` together with its cluster letter when
another move remains.  Rank 0 has a single token.  Tokens are interned per
rank, so equality of token ids is rank-n equivalence.

Ordered sums compose on tokens, omega powers are computed exactly from the
finitely many powers of the base token, and omega* powers by mirroring.
"""
from __future__ import annotations

import os
import threading
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from .multiorder import (
    FIN, OMEGA, ColouredMultiOrder, Letter, MultiOrderError, Point, SubstructureSelection, Unit,
    WordSegment, fin, unroll,
)

DEFAULT_MAX_RANK = 4


class RankError(ValueError):
    pass


def max_rank() -> int:
    return int(os.environ.get("SPINELAB_MAX_RANK", DEFAULT_MAX_RANK))


def _check_rank(n: int) -> None:
    if n < 0:
        raise RankError("rank must be non-negative")
    if n > max_rank():
        raise RankError(f"rank {n} exceeds the configured cap {max_rank()}")


# ---------------------------------------------------------------- interning

class _Table:
    def __init__(self):
        self._lock = threading.Lock()
        self._ids: Dict[Tuple[int, FrozenSet], int] = {}
        self._content: Dict[Tuple[int, int], FrozenSet] = {}

    def intern(self, n: int, content: FrozenSet) -> int:
        key = (n, content)
        tid = self._ids.get(key)
        if tid is not None:
            return tid
        with self._lock:
            tid = self._ids.get(key)
            if tid is None:
                tid = len(self._ids)
                self._content[(n, tid)] = content
                self._ids[key] = tid
        return tid

    def content(self, n: int, tid: int) -> FrozenSet:
        return self._content[(n, tid)]

    def size(self) -> int:
        return len(self._ids)


_TABLE = _Table()
TRIVIAL = _TABLE.intern(0, frozenset())

_concat: Dict = {}
_proj: Dict = {}
_mirror: Dict = {}
_omega: Dict = {}
_powers: Dict = {}


def content(n: int, tid: int) -> FrozenSet:
    return _TABLE.content(n, tid)


def empty(n: int) -> int:
    return TRIVIAL if n == 0 else _TABLE.intern(n, frozenset())


def _info(m: int, pt: Point, ell: Letter):
    """Data about a chosen point when ``m`` moves remain."""
    return (pt.sort, pt.colours, ell if m >= 1 else None)


def letter_theory(n: int, ell: Letter) -> int:
    if n == 0:
        return TRIVIAL
    e = empty(n - 1)
    return _TABLE.intern(n, frozenset((_info(n - 1, pt, ell), e, e) for pt in ell))


def concat(n: int, a: int, b: int) -> int:
    if n == 0:
        return TRIVIAL
    key = (n, a, b)
    hit = _concat.get(key)
    if hit is not None:
        return hit
    ca, cb = content(n, a), content(n, b)
    pa, pb = proj(n, a), proj(n, b)
    out = {(i, l, concat(n - 1, r, pb)) for i, l, r in ca}
    out |= {(i, concat(n - 1, pa, l), r) for i, l, r in cb}
    tid = _TABLE.intern(n, frozenset(out))
    _concat[key] = tid
    return tid


def concat_all(n: int, parts: Sequence[int]) -> int:
    out = empty(n)
    for t in parts:
        out = concat(n, out, t)
    return out


def _drop(info, m: int):
    sort, cols, ell = info
    return (sort, cols, ell if m >= 1 else None)


def proj(n: int, t: int) -> int:
    """The rank ``n-1`` token of a structure with rank-``n`` token ``t``."""
    if n <= 1:
        return TRIVIAL
    key = (n, t)
    hit = _proj.get(key)
    if hit is not None:
        return hit
    out = frozenset((_drop(i, n - 2), proj(n - 1, l), proj(n - 1, r))
                    for i, l, r in content(n, t))
    tid = _TABLE.intern(n - 1, out)
    _proj[key] = tid
    return tid


def proj_to(n: int, t: int, m: int) -> int:
    while n > m:
        t = proj(n, t)
        n -= 1
    return t


def mirror(n: int, t: int) -> int:
    """Token of the reversed structure."""
    if n == 0:
        return TRIVIAL
    key = (n, t)
    hit = _mirror.get(key)
    if hit is not None:
        return hit
    out = frozenset((i, mirror(n - 1, r), mirror(n - 1, l)) for i, l, r in content(n, t))
    tid = _TABLE.intern(n, out)
    _mirror[key] = tid
    return tid


def powers(n: int, t: int) -> Tuple[int, ...]:
    """All tokens ``t^k`` (``k >= 0``) in order of first appearance."""
    key = (n, t)
    hit = _powers.get(key)
    if hit is not None:
        return hit
    seen: List[int] = []
    cur = empty(n)
    while cur not in seen:
        seen.append(cur)
        cur = concat(n, cur, t)
    out = tuple(seen)
    _powers[key] = out
    return out


def stabilization_index(n: int, t: int) -> int:
    """Least ``k`` with ``t^k = t^(k+1)``."""
    ps = powers(n, t)
    last = ps[-1]
    if concat(n, last, t) != last:
        raise RankError("powers are periodic, not eventually constant")
    return len(ps) - 1


def omega_power(n: int, t: int) -> int:
    """Token of ``W^omega`` for any ``W`` with token ``t``."""
    if n == 0:
        return TRIVIAL
    key = (n, t)
    hit = _omega.get(key)
    if hit is not None:
        return hit
    u = proj(n, t)
    right = omega_power(n - 1, u)
    pre = powers(n - 1, u)
    out = frozenset((i, concat(n - 1, P, l), concat(n - 1, r, right))
                    for i, l, r in content(n, t) for P in pre)
    tid = _TABLE.intern(n, out)
    _omega[key] = tid
    return tid


def omega_star_power(n: int, t: int) -> int:
    return mirror(n, omega_power(n, mirror(n, t)))


def segment_theory(n: int, seg: WordSegment) -> int:
    if seg.kind == FIN:
        return concat_all(n, [letter_theory(n, ell) for ell in seg.letters])
    base = letter_theory(n, seg.letter)
    return omega_power(n, base) if seg.kind == OMEGA else omega_star_power(n, base)


def word_theory(n: int, word: Sequence[WordSegment]) -> int:
    return concat_all(n, [segment_theory(n, seg) for seg in word])


# ------------------------------------------------------------- public API

@dataclass(frozen=True)
class NTheory:
    rank: int
    token: int

    def content(self):
        return content(self.rank, self.token)


def n_theory(M: ColouredMultiOrder, n: int) -> NTheory:
    _check_rank(n)
    return NTheory(n, word_theory(n, M.word))


def equiv_n(M: ColouredMultiOrder, N: ColouredMultiOrder, n: int) -> bool:
    if not M.same_vocabulary(N):
        raise MultiOrderError("vocabulary mismatch")
    return n_theory(M, n) == n_theory(N, n)


# ------------------------------------------------------------------ arenas

INF = float("inf")


@dataclass(frozen=True)
class Arena:
    """A multi-order, optionally cut down to a selected substructure.

    Points are ``(position, sort)`` pairs in the coordinates of ``order``.
    """

    order: ColouredMultiOrder
    selection: Optional[SubstructureSelection] = None

    def units(self, copies: int) -> List[Unit]:
        return unroll(self.order, self.selection, copies)

    def cluster(self, pos) -> Letter:
        if self.selection is None:
            return self.order.letter_at(pos)
        return self.selection.selected_at(self.order, pos)

    def points(self, window: int) -> List[Tuple[Tuple[int, int], str]]:
        out = []
        for u in self.units(window):
            if u.kind == FIN:
                out.extend((u.pos, pt.sort) for pt in sorted(u.selected))
        return out

    def point(self, pos, sort) -> Point:
        for pt in self.cluster(pos):
            if pt.sort == sort:
                return pt
        raise KeyError((pos, sort))

    def interval(self, lo, hi) -> Tuple[WordSegment, ...]:
        """Sub-word of selected points strictly between positions ``lo`` and ``hi``."""
        span = 1 + max([abs(p[1]) for p in (lo, hi) if p is not None], default=0)
        word = []
        for u in self.units(span):
            k = _unit_key(u)
            if lo is not None and not k > (lo[0], lo[1]):
                continue
            if hi is not None and not k < (hi[0], hi[1]):
                continue
            if not u.selected:
                continue
            if u.kind == FIN:
                word.append(fin(u.selected))
            else:
                word.append(WordSegment(u.kind, (u.selected,)))
        return tuple(word)


def _unit_key(u: Unit):
    if u.kind == FIN:
        return u.pos
    return (u.seg, INF if u.kind == OMEGA else -INF)


Pebble = Tuple[Tuple[int, int], str]


def _cmp(a, b) -> int:
    return (a > b) - (a < b)


def atomic_type(arena: Arena, pebbles: Sequence[Pebble]):
    """Quantifier-free type of a pebble tuple."""
    unary = tuple((s, arena.point(pos, s).colours) for pos, s in pebbles)
    binary = tuple(_cmp(pebbles[i][0], pebbles[j][0])
                   for i in range(len(pebbles)) for j in range(len(pebbles)))
    return unary, binary


def _clusters(pebbles: Sequence[Pebble]):
    return sorted({pos for pos, _ in pebbles})


# ------------------------------------------------------ spoiler strategies

def default_window(n: int, pebbles: Sequence[Pebble] = ()) -> int:
    return max([2 ** n + 4] + [abs(pos[1]) + n + 2 for pos, _ in pebbles])


def spoiler_reach(window: int) -> int:
    return 2 * window + 2


class _Game:
    def __init__(self, A: Arena, B: Arena, window: int):
        self.arenas = {"M": A, "N": B}
        self.window = window
        # Duplicator answers range over the window; Spoiler may reach a little
        # past it so that an answer at the window edge can still be punished.
        self._points = {k: a.points(window) for k, a in self.arenas.items()}
        self._reach = {k: a.points(spoiler_reach(window)) for k, a in self.arenas.items()}

    def theory(self, side: str, lo, hi, r: int) -> int:
        return word_theory(r, self.arenas[side].interval(lo, hi))

    def triple(self, side: str, lo, hi, x: Pebble, r: int):
        arena = self.arenas[side]
        pos, sort = x
        pt = arena.point(pos, sort)
        return (_info(r - 1, pt, arena.cluster(pos)),
                self.theory(side, lo, pos, r - 1), self.theory(side, pos, hi, r - 1))

    def spoiler(self, pm: Tuple[Pebble, ...], pn: Tuple[Pebble, ...], r: int):
        A, B = self.arenas["M"], self.arenas["N"]
        if atomic_type(A, pm) != atomic_type(B, pn):
            return {"atomic": True}
        if r == 0:
            return None
        cm, cn = _clusters(pm), _clusters(pn)
        for a, b in zip(cm, cn):
            la, lb = A.cluster(a), B.cluster(b)
            if la != lb:
                if la - lb:
                    pt = min(la - lb)
                    return self._node("M", (a, pt.sort), pm, pn, r)
                pt = min(lb - la)
                return self._node("N", (b, pt.sort), pm, pn, r)
        bounds_m = [None] + cm + [None]
        bounds_n = [None] + cn + [None]
        for i in range(len(bounds_m) - 1):
            lo_m, hi_m, lo_n, hi_n = bounds_m[i], bounds_m[i + 1], bounds_n[i], bounds_n[i + 1]
            tm = self.theory("M", lo_m, hi_m, r)
            tn = self.theory("N", lo_n, hi_n, r)
            if tm == tn:
                continue
            for side, lo, hi, other in (("M", lo_m, hi_m, tn), ("N", lo_n, hi_n, tm)):
                have = content(r, other)
                for x in self._reach[side]:
                    if not _between(x[0], lo, hi):
                        continue
                    if self.triple(side, lo, hi, x, r) not in have:
                        return self._node(side, x, pm, pn, r)
            raise RankError("no distinguishing move inside the window; enlarge it")
        return None

    def _node(self, side: str, x: Pebble, pm, pn, r: int):
        other = "N" if side == "M" else "M"
        responses = []
        for y in self._points[other]:
            nm, nn = (pm + (x,), pn + (y,)) if side == "M" else (pm + (y,), pn + (x,))
            if atomic_type(self.arenas["M"], nm) != atomic_type(self.arenas["N"], nn):
                continue
            sub = self.spoiler(nm, nn, r - 1)
            if sub is None:
                raise RankError("strategy construction failed: duplicator survives")
            responses.append({"move": _peb_json(y), "then": sub})
        return {"side": side, "move": _peb_json(x), "responses": responses}


def _between(pos, lo, hi) -> bool:
    return (lo is None or pos > lo) and (hi is None or pos < hi)


def _peb_json(x: Pebble):
    (s, off), sort = x
    return [s, off, sort]


def _peb_from_json(v) -> Pebble:
    return ((int(v[0]), int(v[1])), str(v[2]))


@dataclass(frozen=True)
class Witness:
    """A Spoiler strategy refuting rank-``rank`` equivalence of two pebbled arenas."""

    rank: int
    window: int
    pebbles_m: Tuple[Pebble, ...]
    pebbles_n: Tuple[Pebble, ...]
    tree: dict

    def to_json(self) -> dict:
        return {
            "rank": self.rank,
            "window": self.window,
            "pebbles": {"M": [_peb_json(p) for p in self.pebbles_m],
                        "N": [_peb_json(p) for p in self.pebbles_n]},
            "tree": self.tree,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Witness":
        return cls(int(d["rank"]), int(d["window"]),
                   tuple(_peb_from_json(p) for p in d["pebbles"]["M"]),
                   tuple(_peb_from_json(p) for p in d["pebbles"]["N"]), d["tree"])


def game_witness(A: Arena, B: Arena, n: int, pm: Tuple[Pebble, ...] = (),
                 pn: Tuple[Pebble, ...] = (), window: Optional[int] = None) -> Optional[Witness]:
    window = default_window(n, pm + pn) if window is None else window
    tree = _Game(A, B, window).spoiler(tuple(pm), tuple(pn), n)
    return None if tree is None else Witness(n, window, tuple(pm), tuple(pn), tree)


def distinguish(M: ColouredMultiOrder, N: ColouredMultiOrder, n: int,
                window: Optional[int] = None) -> Optional[Witness]:
    """A Spoiler strategy of depth at most ``n`` when ``M`` and ``N`` differ at rank ``n``."""
    if not M.same_vocabulary(N):
        raise MultiOrderError("vocabulary mismatch")
    _check_rank(n)
    if equiv_n(M, N, n):
        return None
    return game_witness(Arena(M), Arena(N), n, window=window)


def replay(w: Witness, A: Arena, B: Arena) -> bool:
    """Play the strategy against every Duplicator answer inside the window.

    Only atomic types are consulted, so this is independent of the token engine.
    """
    arenas = {"M": A, "N": B}
    pts = {k: a.points(w.window) for k, a in arenas.items()}
    reach = {k: a.points(spoiler_reach(w.window)) for k, a in arenas.items()}

    def go(node, pm, pn, r) -> bool:
        if node.get("atomic"):
            return atomic_type(A, pm) != atomic_type(B, pn)
        if r < 1 or atomic_type(A, pm) != atomic_type(B, pn):
            return False
        side = node["side"]
        x = _peb_from_json(node["move"])
        if x not in reach[side]:
            return False
        table = {_peb_from_json(e["move"]): e["then"] for e in node["responses"]}
        other = "N" if side == "M" else "M"
        for y in pts[other]:
            nm, nn = (pm + (x,), pn + (y,)) if side == "M" else (pm + (y,), pn + (x,))
            if atomic_type(A, nm) != atomic_type(B, nn):
                continue
            if y not in table or not go(table[y], nm, nn, r - 1):
                return False
        return True

    return go(w.tree, tuple(w.pebbles_m), tuple(w.pebbles_n), w.rank)


# ------------------------------------------------------- elementarity

@dataclass(frozen=True)
class ElemResult:
    holds: bool
    rank: int
    reason: str = ""
    pebbles: Tuple[Pebble, ...] = ()
    witness: Optional[Witness] = None

    def __bool__(self) -> bool:
        return self.holds


def _copies(B: ColouredMultiOrder, n: int) -> int:
    k = 1
    for seg in B.word:
        if seg.kind != FIN:
            for m in range(n + 1):
                k = max(k, stabilization_index(m, letter_theory(m, seg.letter)))
    return 2 * k + 2


def elem_sub_n(B: ColouredMultiOrder, A: SubstructureSelection, n: int,
               with_witness: bool = False) -> ElemResult:
    """Decide whether the selected substructure is rank-``n`` elementary in ``B``.

    For ``k``-tuples from the substructure with ``k <= n`` the only data that
    can differ are the theories of the intervals between consecutive pebbles
    and the clusters of the pebbles, so single points and pairs suffice.
    Repetition segments are unrolled past the stabilization index of their
    letter, beyond which further copies add nothing new.
    """
    _check_rank(n)
    big = Arena(B)
    small = Arena(B, A)
    R = _copies(B, n)

    def fail(reason, pebs):
        w = None
        if with_witness:
            k = len(pebs)
            w = game_witness(small, big, n - k, pebs, pebs,
                             window=max(R, default_window(n, pebs)))
        return ElemResult(False, n, reason, pebs, w)

    if word_theory(n, small.interval(None, None)) != word_theory(n, B.word):
        return fail("theories differ", ())
    if n == 0:
        return ElemResult(True, n)
    units = unroll(B, A, R)
    pebs = [i for i, u in enumerate(units) if u.kind == FIN and u.selected]
    if n >= 2:
        for u in units:
            if u.selected and u.selected != u.letter:
                pt = min(u.selected)
                pos = u.pos if u.kind == FIN else _tail_rep(B, u, R)
                return fail("cluster is cut by the selection", ((pos, pt.sort),))

    def peb(i):
        return (units[i].pos, min(units[i].selected).sort)

    m = n - 1
    small = [_unit_theory(m, u, u.selected) for u in units]
    big = [_unit_theory(m, u, u.letter) for u in units]
    for i in pebs:
        for lo, hi in ((0, i), (i + 1, len(units))):
            if concat_all(m, small[lo:hi]) != concat_all(m, big[lo:hi]):
                return fail("one-point type differs", (peb(i),))
    if n >= 2:
        m = n - 2
        small = [_unit_theory(m, u, u.selected) for u in units]
        big = [_unit_theory(m, u, u.letter) for u in units]
        marked = set(pebs)
        for i in pebs:
            ts = tb = empty(m)
            for j in range(i + 1, len(units)):
                if j in marked and ts != tb:
                    return fail("two-point type differs", (peb(i), peb(j)))
                ts, tb = concat(m, ts, small[j]), concat(m, tb, big[j])
    return ElemResult(True, n)


def _unit_theory(n: int, u: Unit, ell: Letter) -> int:
    if not ell:
        return empty(n)
    base = letter_theory(n, ell)
    if u.kind == FIN:
        return base
    return omega_power(n, base) if u.kind == OMEGA else omega_star_power(n, base)


def _tail_rep(B: ColouredMultiOrder, u: Unit, R: int):
    return (u.seg, R) if u.kind == OMEGA else (u.seg, -R - 1)
