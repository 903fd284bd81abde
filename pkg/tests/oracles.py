"""Independent reference evaluators used only by the tests.

Nothing here calls the closed forms of the package.  The group oracle works
on finite presentations by listing every convex tail (a tail is identified
with the number ``c`` of positions left of it) and applying the definitions
of the spine maps, the bracket subgroups and the predicates literally.  The
multi-order oracles work on explicit finite lists of points.
"""
from __future__ import annotations

import functools
import itertools
from math import gcd
from typing import Dict, FrozenSet, List, Optional, Sequence, Tuple

from spinelab.group_model import Cut
from spinelab.multiorder import FIN, ColouredMultiOrder
from spinelab.presentation import Coord, ElementLiteral, GroupPresentation


# ------------------------------------------------------------ arithmetic

def _factor(n: int) -> Dict[int, int]:
    out, d = {}, 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


class BlockRing:
    """A block as a subring-style set of reals: denominators avoid ``bad`` primes."""

    def __init__(self, blk):
        self.rank = blk.rank
        self.integral = blk.integral
        self.nondiv = frozenset(blk.nondiv)
        self._dens: Dict[int, bool] = {}
        self._mults: Dict[Tuple, bool] = {}

    def bad(self, q: int) -> bool:
        """``q`` is not invertible in the block."""
        return self.integral or q in self.nondiv

    def has_den(self, den: int) -> bool:
        """A rational with this reduced denominator lies in the block."""
        hit = self._dens.get(den)
        if hit is None:
            hit = self._dens[den] = not any(self.bad(q) for q in _factor(den))
        return hit

    def has_multiple(self, x: "Pair", m: int) -> bool:
        """``x / m`` lies in the block."""
        key = (x, m)
        hit = self._mults.get(key)
        if hit is None:
            hit = self._mults[key] = self.has_den(_den(x[0], m)) and self.has_den(_den(x[1], m))
        return hit

    def index(self, d: int, e: int) -> int:
        """Order of ``dB / eB`` for ``d | e``."""
        assert e % d == 0
        out = 1
        for q, v in _factor(e // d).items():
            if self.bad(q):
                out *= q ** (v * self.rank)
        return out

    @property
    def discrete(self) -> bool:
        return self.integral and self.rank == 1


Pair = Tuple  # (rational part, sqrt(2) part), ints or Fractions


def _den(x, m: int) -> int:
    """Reduced denominator of ``x / m``."""
    if type(x) is int:
        return m // gcd(x, m)
    return x.denominator * (m // gcd(x.numerator, m))


def _log_exact(n: int, p: int) -> int:
    k = 0
    while n > 1:
        assert n % p == 0, "index is not a power of p"
        n //= p
        k += 1
    return k


# --------------------------------------------------------- group oracle

ZERO = (0, 0)


def pair(c: Coord) -> Pair:
    return tuple(int(x) if x.denominator == 1 else x for x in (c.a, c.b))


class FiniteGroupOracle:
    """Definitional evaluator on a finite presentation."""

    def __init__(self, G: GroupPresentation):
        self.G = G
        self.pos: List[Tuple[int, int]] = []
        for s, seg in enumerate(G.segments):
            self.pos += [(s, o) for o in range(seg.length)]
        self.N = len(self.pos)
        self.rings = [BlockRing(G.segments[s].block) for s, _ in self.pos]
        self.primes = G.primes
        self._spts: Dict = {}
        self._br: Dict = {}

    # tails -----------------------------------------------------------
    def cut_of(self, c: int) -> Cut:
        if c == self.N:
            return Cut(self.G.n_segments)
        s, off = self.pos[c]
        return Cut(s) if off == 0 else Cut(s, off - 1)

    def index_of(self, cut: Cut) -> int:
        for c in range(self.N + 1):
            if self.cut_of(c) == cut:
                return c
        raise KeyError(cut)

    def vec(self, g: ElementLiteral) -> Tuple[Pair, ...]:
        """Coordinates of ``g`` in index order; every method below takes this vector."""
        d = dict(g.support)
        return tuple(pair(d[p]) if p in d else ZERO for p in self.pos)

    def _mult(self, i: int, x: Pair, m: int) -> bool:
        return self.rings[i].has_multiple(x, m)

    def in_tail(self, v, c: int) -> bool:
        return all(v[i] == ZERO for i in range(c))

    def in_tail_plus_mult(self, v, c: int, m: int) -> bool:
        """``g in H_c + mG``."""
        return all(self._mult(i, v[i], m) for i in range(c))

    # spine maps ------------------------------------------------------
    def s_cut(self, v, p) -> Optional[int]:
        """Largest tail ``H`` with ``g`` outside ``H + pG``."""
        for c in range(self.N + 1):
            if not self.in_tail_plus_mult(v, c, p):
                return c
        return None

    def s_points(self, p) -> FrozenSet[int]:
        if p not in self._spts:
            pts = set()
            for v in self._probes():
                c = self.s_cut(v, p)
                if c is not None:
                    pts.add(c)
            self._spts[p] = frozenset(pts)
        return self._spts[p]

    def _probes(self):
        """Unit vectors: every value of a map is taken on one of them."""
        for i in range(self.N):
            for x in (((1, 0), (0, 1)) if self.rings[i].rank == 2 else ((1, 0),)):
                yield tuple(x if j == i else ZERO for j in range(self.N))

    def t_cut(self, v, p) -> int:
        """Union of the S tails not containing ``g``."""
        outside = [c for c in self.s_points(p) if not self.in_tail(v, c)]
        return min(outside) if outside else self.N

    def tplus_cut(self, v, p) -> int:
        """Intersection of the S tails containing ``g``."""
        inside = [c for c in self.s_points(p) if self.in_tail(v, c)]
        return max(inside) if inside else 0

    def _images(self, fn, p) -> FrozenSet[int]:
        out = {fn((ZERO,) * self.N, p)}
        out.update(fn(v, p) for v in self._probes())
        return frozenset(out)

    def t_points(self, p):
        return self._images(self.t_cut, p)

    def tplus_points(self, p):
        return self._images(self.tplus_cut, p)

    def points(self, kind: str, p):
        return {"S": self.s_points, "T": self.t_points, "T+": self.tplus_points}[kind](p)

    # brackets --------------------------------------------------------
    def bracket_has(self, v, c: int, m: int) -> bool:
        """``g`` in the intersection of ``H + mG`` over tails strictly above ``H_c``."""
        return all(self.in_tail_plus_mult(v, cc, m) for cc in range(c))

    def bracket_mults(self, c: int, m: int) -> List[int]:
        """Per-position multipliers of the bracket as a product subgroup."""
        key = (c, m)
        if key not in self._br:
            out = []
            for i in range(self.N):
                d = 1
                for cc in range(c):
                    e = m if i < cc else 1
                    d = d * e // gcd(d, e)
                out.append(d)
            self._br[key] = out
        return self._br[key]

    def dim(self, p, big: List[int], small: List[int]) -> int:
        """``dim_{F_p}`` of ``(X + pG)/(Y + pG)`` for product subgroups ``Y <= X``."""
        total = 1
        for i in range(self.N):
            d, e = gcd(big[i], p), gcd(small[i], p)
            total *= self.rings[i].index(d, e)
        return _log_exact(total, p)

    def tail_mults(self, c: int) -> List[int]:
        return [0 if i < c else 1 for i in range(self.N)]

    def _with_p(self, mults: List[int], p) -> List[int]:
        return [p if d == 0 else d for d in mults]

    def q_dim(self, c: int, p) -> int:
        return self.dim(p, self.bracket_mults(c, p), self._with_p(self.tail_mults(c), p))

    def p_dim(self, c: int, p, n: int) -> int:
        return self.dim(p, self.bracket_mults(c, p ** n), self.bracket_mults(c, p ** (n + 1)))

    def n_dim(self, c: int, p, N: int) -> int:
        return self.dim(p, self.bracket_mults(c, p ** N), self._with_p(self.tail_mults(c), p))

    def discr(self, c: int) -> bool:
        """``G / H_c`` has a least positive element."""
        return c >= 1 and self.rings[c - 1].discrete

    # predicates ------------------------------------------------------
    def _unit(self, c: int, k: int) -> List[Pair]:
        return [(k, 0) if i == c - 1 else ZERO for i in range(self.N)]

    def eq_bullet(self, v, k: int) -> bool:
        for c in range(1, self.N + 1):
            if not self.discr(c):
                continue
            u = self._unit(c, k)
            if all(v[i] == u[i] for i in range(c)):
                return True
        return False

    def cong_bullet(self, v, m: int, k: int) -> bool:
        for c in range(1, self.N + 1):
            if not self.discr(c):
                continue
            u = self._unit(c, k)
            if all(self._mult(i, (v[i][0] - u[i][0], v[i][1] - u[i][1]), m) for i in range(c)):
                return True
        return False

    def D(self, v, p, r: int, s: int) -> bool:
        q = p ** r
        for c in self.s_points(p):
            br = self.bracket_mults(c, p ** s)
            in_big = all(self._mult(i, v[i], gcd(br[i], q)) for i in range(self.N))
            if in_big and not self.in_tail_plus_mult(v, c, q):
                return True
        return False


def element_grid(G: GroupPresentation, lo: int = -4, hi: int = 4, r2: int = 2):
    """Every element with integer coordinates in ``[lo, hi]`` and sqrt(2) parts in
    ``[-r2, r2]``, as ``(vector, element)`` pairs."""
    choices = []
    positions = []
    for s, seg in enumerate(G.segments):
        for o in range(seg.length):
            positions.append((s, o))
            bs = range(-r2, r2 + 1) if seg.block.rank == 2 else (0,)
            choices.append([((a, b), Coord(a, b)) for a in range(lo, hi + 1) for b in bs])
    for combo in itertools.product(*choices):
        v = tuple(x for x, _ in combo)
        g = ElementLiteral(tuple((p, c) for p, (_, c) in zip(positions, combo) if c))
        yield v, g


# ------------------------------------------------- finite multi-orders

# A finite structure is a tuple of (cluster index, sort, colours) triples.
Structure = Tuple[Tuple[int, str, FrozenSet[str]], ...]


def structure(M: ColouredMultiOrder) -> Structure:
    out = []
    k = 0
    for seg in M.word:
        assert seg.kind == FIN
        for ell in seg.letters:
            for pt in sorted(ell):
                out.append((k, pt.sort, pt.colours))
            k += 1
    return tuple(out)


def atomic(S: Structure, tup: Sequence[int]):
    pts = [S[i] for i in tup]
    labels = tuple((s, tuple(sorted(c))) for _, s, c in pts)
    rel = tuple((a[0] > b[0]) - (a[0] < b[0]) for a, b in itertools.combinations(pts, 2))
    return labels, rel


@functools.lru_cache(maxsize=None)
def hintikka(S: Structure, n: int, tup: Tuple[int, ...] = ()):
    """Rank-``n`` Hintikka type of the tuple, by exhaustion."""
    if n == 0:
        return atomic(S, tup)
    return (atomic(S, tup), frozenset(hintikka(S, n - 1, tup + (i,)) for i in range(len(S))))


def duplicator_wins(A: Structure, B: Structure, n: int,
                    pa: Tuple[int, ...] = (), pb: Tuple[int, ...] = ()) -> bool:
    """Game-tree search for a Duplicator winning strategy in the ``n``-round game."""
    if atomic(A, pa) != atomic(B, pb):
        return False
    if n == 0:
        return True
    for x in range(len(A)):
        if not any(duplicator_wins(A, B, n - 1, pa + (x,), pb + (y,)) for y in range(len(B))):
            return False
    for y in range(len(B)):
        if not any(duplicator_wins(A, B, n - 1, pa + (x,), pb + (y,)) for x in range(len(A))):
            return False
    return True


def elementary_in(B: Structure, selected: Sequence[int], n: int) -> bool:
    """Every ``k``-tuple (``k <= n``) from the substructure has the same rank ``n - k``
    type there as in ``B``."""
    sub = tuple(B[i] for i in selected)
    for k in range(n + 1):
        for tup in itertools.product(range(len(sub)), repeat=k):
            if hintikka(sub, n - k, tup) != hintikka(B, n - k, tuple(selected[i] for i in tup)):
                return False
    return True


def selected_indices(M: ColouredMultiOrder, sel) -> List[int]:
    """Indices into ``structure(M)`` of the points picked by a finite selection."""
    out, k = [], 0
    for seg, ss in zip(M.word, sel.segments):
        for ell, pick in zip(seg.letters, ss.explicit):
            for pt in sorted(ell):
                if pt in pick:
                    out.append(k)
                k += 1
    return out


# -------------------------------------------------------- hull oracle

def pointwise_hulls(letters: Sequence[FrozenSet], selected: Sequence[FrozenSet]):
    """Hulls on an explicit list of clusters, straight from the definitions.

    A point ``x`` is in the convex hull when some selected ``a`` has
    ``a <= x`` and some selected ``a'`` has ``x <= a'`` (preorder by cluster).
    """
    n = len(letters)
    sel_idx = [i for i in range(n) if selected[i]]
    conv, left, right = [], [], []
    for i in range(n):
        below = any(j <= i for j in sel_idx)
        above = any(j >= i for j in sel_idx)
        conv.append(letters[i] if below and above else frozenset())
        left.append(letters[i] if above else frozenset())
        right.append(letters[i] if below else frozenset())
    return conv, left, right


# ------------------------------------------- batched Hintikka hashing

def _mix(x):
    """splitmix64 finalizer on uint64 arrays (wrapping arithmetic)."""
    import numpy as np
    x = (x + np.uint64(0x9E3779B97F4A7C15)).astype(np.uint64)
    x = (x ^ (x >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
    return x ^ (x >> np.uint64(31))


def _set_hash(child):
    """Hash of the set (not multiset) of values along the last axis."""
    import numpy as np
    a = np.sort(child, axis=-1)
    dup = np.zeros(a.shape, dtype=bool)
    dup[..., 1:] = a[..., 1:] == a[..., :-1]
    a[dup] = 0
    return _mix(a.sum(axis=-1, dtype=np.uint64))


def hintikka_hashes(codes, clus, n: int):
    """Hash of the rank-``n`` Hintikka type of every structure in a batch.

    ``codes[s, i]`` is the label (sort and colours) of point ``i`` of
    structure ``s`` and ``clus[s, i]`` its cluster index.  The type of a
    tuple is its atomic type together with the set of types of its one-point
    extensions; sets are hashed by summing hashes of their distinct members.
    All structures in a batch have the same number of points.
    """
    import numpy as np
    S, N = codes.shape
    codes = codes.astype(np.int64)
    clus = clus.astype(np.int64)

    def atom(k):
        # integer code of the atomic type of every k-tuple, shape (S, N**k)
        idx = np.indices((N,) * k).reshape(k, -1) if k else np.zeros((0, 1), dtype=np.int64)
        acc = np.zeros((S, idx.shape[1]), dtype=np.int64)
        for i in range(k):
            acc = acc * 16 + codes[:, idx[i]]
        for i in range(k):
            for j in range(i + 1, k):
                a, b = clus[:, idx[i]], clus[:, idx[j]]
                acc = acc * 3 + (np.sign(a - b) + 1)
        return _mix((acc * 8 + k).astype(np.uint64))

    h = atom(n)
    for k in range(n - 1, -1, -1):
        sh = _set_hash(h.reshape(S, N ** k, N)) if N else _mix(np.zeros((S, 1), dtype=np.uint64))
        h = _mix(atom(k) ^ _mix(sh + np.uint64(k + 1)))
    return h.reshape(S)
