"""Presented ordered abelian groups: lexicographic Hahn sums with finite support.

A presentation is a finite word of segments.  Each segment pairs an index
order type (a finite chain, omega or omega*) with a uniform archimedean
block.  Earlier segments are more significant.

Positions are ``(segment, offset)`` pairs.  Offsets count from 0 for finite
and omega segments and from -1 (the last position) for omega* segments, so
plain tuple comparison gives the index order.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from typing import Dict, Iterable, Iterator, Mapping, Optional, Tuple

FINITE = "finite"
OMEGA = "omega"
OMEGA_STAR = "omegaStar"
ORDER_TYPES = (FINITE, OMEGA, OMEGA_STAR)

Position = Tuple[int, int]


class PresentationError(ValueError):
    """A presentation, element or selection violates a semantic rule."""

    def __init__(self, rule: str, message: str):
        super().__init__(f"[{rule}] {message}")
        self.rule = rule
        self.message = message


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    i = 2
    while i * i <= n:
        if n % i == 0:
            return False
        i += 1
    return True


def generic_prime(universe: Iterable[int]) -> int:
    """Smallest prime outside ``universe``; stands in for every other prime."""
    universe = set(universe)
    p = 2
    while p in universe or not is_prime(p):
        p += 1
    return p


def prime_factors(n: int) -> Dict[int, int]:
    n = abs(n)
    out: Dict[int, int] = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


@dataclass(frozen=True, order=True)
class BlockProfile:
    """Uniform archimedean block.

    ``integral`` blocks are non-divisible by every prime (realized over the
    integers); the others are localizations ``Z_(S)`` that are divisible by
    every prime outside ``nondiv``.  Rank 2 adds a ``sqrt(2)`` component.
    """

    rank: int = 1
    nondiv: frozenset = frozenset()
    integral: bool = False

    def __post_init__(self):
        if self.rank not in (1, 2):
            raise PresentationError("block-rank", f"rank must be 1 or 2, got {self.rank}")
        for p in self.nondiv:
            if not is_prime(p):
                raise PresentationError("block-prime", f"{p} is not prime")
        if self.integral and self.nondiv:
            # an integral block is non-divisible everywhere; the set is implied
            object.__setattr__(self, "nondiv", frozenset())

    @property
    def discrete(self) -> bool:
        return self.integral and self.rank == 1

    @property
    def tail_flag(self) -> str:
        return "nondivisible-everywhere" if self.integral else "divisible-outside-universe"

    def divisible_by(self, p: int) -> bool:
        return not (self.integral or p in self.nondiv)

    def p_dimension(self, p: int) -> int:
        """dim over F_p of B/pB."""
        return 0 if self.divisible_by(p) else self.rank

    def invertible(self, n: int) -> bool:
        return all(self.divisible_by(q) for q in prime_factors(n))

    def _allowed(self, den: int) -> bool:
        if den == 1:
            return True
        if self.integral:
            return False
        for p in self.nondiv:
            if den % p == 0:
                return False
        return True

    def contains(self, c: "Coord") -> bool:
        if self.rank == 1 and c.b != 0:
            return False
        return self._allowed(c.a.denominator) and self._allowed(c.b.denominator)

    def contains_multiple(self, c: "Coord", m: int) -> bool:
        """Decide ``c in m * B``."""
        if self.rank == 1 and c.b != 0:
            return False
        # the denominator of x/m for x = n/d in lowest terms is d * (m / gcd(n, m))
        a, b = c.a, c.b
        return (self._allowed(a.denominator * (m // gcd(a.numerator, m)))
                and (not b or self._allowed(b.denominator * (m // gcd(b.numerator, m)))))


Z = BlockProfile(1, frozenset(), True)
Q = BlockProfile(1, frozenset(), False)


def zloc(*primes: int) -> BlockProfile:
    return BlockProfile(1, frozenset(primes), False)


@dataclass(frozen=True, order=True)
class Coord:
    """The real number ``a + b*sqrt(2)`` with rational ``a`` and ``b``."""

    a: Fraction = Fraction(0)
    b: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    def __add__(self, other: "Coord") -> "Coord":
        return Coord(self.a + other.a, self.b + other.b)

    def __sub__(self, other: "Coord") -> "Coord":
        return Coord(self.a - other.a, self.b - other.b)

    def __neg__(self) -> "Coord":
        return Coord(-self.a, -self.b)

    def scale(self, k) -> "Coord":
        return Coord(self.a * k, self.b * k)

    def __bool__(self) -> bool:
        return bool(self.a) or bool(self.b)

    def sign(self) -> int:
        a, b = self.a, self.b
        sa = (a > 0) - (a < 0)
        sb = (b > 0) - (b < 0)
        if sa == sb or sb == 0:
            return sa
        if sa == 0:
            return sb
        # opposite signs: compare a^2 with 2 b^2
        d = a * a - 2 * b * b
        return sa if d > 0 else sb

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}r2"
        return f"{self.a}{'' if self.b < 0 else '+'}{self.b}r2"


@dataclass(frozen=True)
class Segment:
    order: str
    block: BlockProfile
    length: Optional[int] = None  # only for finite segments

    def __post_init__(self):
        if self.order not in ORDER_TYPES:
            raise PresentationError("order-type", f"unknown order type {self.order!r}")
        if self.order == FINITE:
            if self.length is None or self.length < 1:
                raise PresentationError("finite-length", "finite segments need length >= 1")
        elif self.length is not None:
            raise PresentationError("finite-length", "only finite segments carry a length")

    def has_offset(self, off: int) -> bool:
        if self.order == FINITE:
            return 0 <= off < self.length
        if self.order == OMEGA:
            return off >= 0
        return off <= -1

    @property
    def first_offset(self) -> Optional[int]:
        return None if self.order == OMEGA_STAR else 0

    @property
    def last_offset(self) -> Optional[int]:
        if self.order == FINITE:
            return self.length - 1
        if self.order == OMEGA_STAR:
            return -1
        return None


@dataclass(frozen=True)
class GroupPresentation:
    segments: Tuple[Segment, ...]
    universe: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "segments", tuple(self.segments))
        object.__setattr__(self, "universe", frozenset(self.universe))
        for p in self.universe:
            if not is_prime(p):
                raise PresentationError("universe-prime", f"{p} is not prime")
        for seg in self.segments:
            missing = seg.block.nondiv - self.universe
            if missing:
                raise PresentationError(
                    "universe", f"primes {sorted(missing)} are not in the prime universe")

    @classmethod
    def of(cls, segments, universe=()) -> "GroupPresentation":
        """Build from segments, merging adjacent finite segments with equal blocks."""
        merged = []
        for seg in segments:
            if (merged and seg.order == FINITE and merged[-1].order == FINITE
                    and merged[-1].block == seg.block):
                merged[-1] = Segment(FINITE, seg.block, merged[-1].length + seg.length)
            else:
                merged.append(seg)
        mentioned = set(universe)
        for seg in merged:
            mentioned |= seg.block.nondiv
        return cls(tuple(merged), frozenset(mentioned))

    def with_universe(self, primes: Iterable[int]) -> "GroupPresentation":
        return GroupPresentation(self.segments, self.universe | frozenset(primes))

    @property
    def trivial(self) -> bool:
        return not self.segments

    @property
    def n_segments(self) -> int:
        return len(self.segments)

    @property
    def is_finite(self) -> bool:
        return all(s.order == FINITE for s in self.segments)

    @property
    def primes(self) -> Tuple:
        """Universe primes in ascending order, followed by a generic outside prime."""
        return tuple(sorted(self.universe)) + (generic_prime(self.universe),)

    def block_at(self, pos: Position) -> BlockProfile:
        return self.segments[pos[0]].block

    def valid_position(self, pos: Position) -> bool:
        s, off = pos
        return 0 <= s < len(self.segments) and self.segments[s].has_offset(off)

    def positions(self) -> Iterator[Position]:
        """All positions of a finite presentation in index order."""
        if not self.is_finite:
            raise PresentationError("infinite", "presentation has infinitely many positions")
        for s, seg in enumerate(self.segments):
            for off in range(seg.length):
                yield (s, off)

    def truncated(self, width: int) -> "GroupPresentation":
        """Finite window keeping ``width`` positions of every omega/omega* segment."""
        segs = [Segment(FINITE, s.block, s.length if s.order == FINITE else width)
                for s in self.segments]
        return GroupPresentation(tuple(segs), self.universe)

    def __add__(self, other: "GroupPresentation") -> "GroupPresentation":
        """Lexicographic sum: ``self`` more significant than ``other``."""
        return GroupPresentation(self.segments + other.segments, self.universe | other.universe)


@dataclass(frozen=True)
class ElementLiteral:
    """Finitely supported element; zero coordinates are absent."""

    support: Tuple[Tuple[Position, Coord], ...] = ()

    def __post_init__(self):
        items = tuple(sorted((tuple(p), c) for p, c in dict(self.support).items() if c))
        object.__setattr__(self, "support", items)

    @classmethod
    def of(cls, mapping: Mapping[Position, object]) -> "ElementLiteral":
        return cls(tuple((p, c if isinstance(c, Coord) else Coord(c)) for p, c in mapping.items()))

    @property
    def coords(self) -> Dict[Position, Coord]:
        return dict(self.support)

    def get(self, pos: Position) -> Coord:
        return self.coords.get(pos, Coord())

    @property
    def is_zero(self) -> bool:
        return not self.support

    @property
    def top(self) -> Optional[Position]:
        """Most significant position in the support."""
        return self.support[0][0] if self.support else None

    def __add__(self, other: "ElementLiteral") -> "ElementLiteral":
        out = self.coords
        for p, c in other.support:
            out[p] = out.get(p, Coord()) + c
        return ElementLiteral(tuple(out.items()))

    def __neg__(self) -> "ElementLiteral":
        return ElementLiteral(tuple((p, -c) for p, c in self.support))

    def __sub__(self, other: "ElementLiteral") -> "ElementLiteral":
        return self + (-other)

    def scale(self, k) -> "ElementLiteral":
        return ElementLiteral(tuple((p, c.scale(k)) for p, c in self.support))

    def shifted(self, segments: int) -> "ElementLiteral":
        return ElementLiteral(tuple(((s + segments, o), c) for (s, o), c in self.support))


def unit(pos: Position, k=1, sqrt2: bool = False) -> ElementLiteral:
    c = Coord(0, k) if sqrt2 else Coord(k)
    return ElementLiteral(((pos, c),))


def check_element(G: GroupPresentation, g: ElementLiteral) -> ElementLiteral:
    for pos, c in g.support:
        if not G.valid_position(pos):
            raise PresentationError("position", f"position {pos} is outside the presentation")
        block = G.block_at(pos)
        if not block.contains(c):
            raise PresentationError(
                "coordinate", f"coordinate {c} at {pos} is not in its block")
    return g
