"""Pipelines from groups to spines to rank-bounded elementarity checks."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

from . import eftheory as ef
from .group_model import Cut, before_all, pred_D, pred_cong_bullet, pred_eq_bullet
from .multiorder import (
    OMEGA, ColouredMultiOrder, SegmentSelection, SubstructureSelection, fin, omega, omega_star,
)
from .presentation import (
    FINITE, OMEGA as G_OMEGA, OMEGA_STAR as G_OMEGA_STAR, Q, ElementLiteral,
    GroupPresentation, Segment, unit,
)
from .spine import (
    KINDS, T_PLUS, SpinePoint, apply_map, colours, is_point, points_at, representative,
    sort_name, spine_items, spines, S,
)


class TrivialGroup(ValueError):
    pass


def _nonzero(*groups: GroupPresentation) -> None:
    for G in groups:
        if G.trivial:
            raise TrivialGroup("the trivial group is a degenerate input here")


def common_universe(*groups: GroupPresentation) -> Tuple[GroupPresentation, ...]:
    u = frozenset().union(*(G.universe for G in groups))
    return tuple(G.with_universe(u) for G in groups)


# ------------------------------------------------------------- equivalence

@dataclass(frozen=True)
class EquivResult:
    verdict: str  # "equivalent_at_rank_n" or "distinguished"
    rank: int
    witness: Optional[ef.Witness] = None

    @property
    def distinguished(self) -> bool:
        return self.verdict == "distinguished"


def check_equiv(G: GroupPresentation, G2: GroupPresentation, n: int) -> EquivResult:
    """Compare the spines at rank ``n``; a refutation is sound, agreement is only evidence."""
    G, G2 = common_universe(G, G2)
    A, B = spines(G), spines(G2)
    w = ef.distinguish(A, B, n)
    if w is None:
        return EquivResult("equivalent_at_rank_n", n)
    return EquivResult("distinguished", n, w)


# --------------------------------------------------- required divisibility

@dataclass(frozen=True)
class RequiredDivisibility:
    primes: frozenset  # universe primes
    all_primes: bool   # every prime, including those outside the universe
    generic: bool      # verdict shared by every prime outside the universe

    def contains(self, p: int, G: GroupPresentation) -> bool:
        return p in self.primes if p in G.universe else self.generic


def required_divisibility(G: GroupPresentation) -> RequiredDivisibility:
    """Primes ``p`` for which the T+ sort has an initial point (the whole group)."""
    _nonzero(G)
    hits = {p for p in G.primes if is_point(G, before_all(G), T_PLUS, p)}
    gp = G.primes[-1]
    universe = frozenset(p for p in hits if p in G.universe)
    generic = gp in hits
    return RequiredDivisibility(universe, generic and universe == G.universe, generic)


def propose_augment(G: GroupPresentation) -> GroupPresentation:
    """A candidate infinite augment; always check it with :func:`verify_augment`."""
    D = required_divisibility(G)
    if D.all_primes:
        return GroupPresentation.of([Segment(FINITE, Q, 1)], G.universe)
    head = G.segments[0]
    if head.order != G_OMEGA_STAR:
        raise AssertionError("a missing prime forces an omega* head segment")
    return GroupPresentation.of([Segment(G_OMEGA_STAR, head.block),
                                 Segment(G_OMEGA, head.block)], G.universe)


# ---------------------------------------------------------- element grid

def element_grid(G: GroupPresentation, size: int = 2, width: int = 2,
                 limit: int = 200) -> List[ElementLiteral]:
    """Deterministic sample: zero, scaled unit vectors and sums of two of them."""
    positions = []
    for s, seg in enumerate(G.segments):
        if seg.order == FINITE:
            offs = list(range(seg.length))
        elif seg.order == G_OMEGA:
            offs = list(range(width))
        else:
            offs = list(range(-width, 0))
        positions += [(s, o) for o in offs]
    units = []
    for pos in positions:
        for k in range(1, size + 1):
            units += [unit(pos, k), unit(pos, -k)]
        if G.block_at(pos).rank == 2:
            units.append(unit(pos, 1, sqrt2=True))
    out = [ElementLiteral()] + units
    seen = set(out)
    for i, a in enumerate(units):
        for b in units[i + 1:]:
            if a.top == b.top:
                continue
            c = a + b
            if c not in seen:
                seen.add(c)
                out.append(c)
            if len(out) >= limit:
                return out
    return out


def predicate_rows(G: GroupPresentation, g: ElementLiteral):
    """Values of the element predicates on ``g`` in a fixed order."""
    rows = []
    for k in (-2, -1, 1, 2, 3):
        rows.append((f"eq_bullet({k})", pred_eq_bullet(G, g, k)))
    for m in (2, 3, 4):
        for k in range(1, m):
            rows.append((f"cong_bullet({m},{k})", pred_cong_bullet(G, g, m, k)))
    for p in G.primes:
        for r, s in ((1, 1), (1, 2), (2, 2)):
            rows.append((f"D({p},{r},{s})", pred_D(G, g, p, r, s)))
    return rows


# ------------------------------------------------------------- augments

@dataclass(frozen=True)
class SpineEmbedding:
    big: ColouredMultiOrder
    selection: SubstructureSelection
    small: ColouredMultiOrder
    problems: Tuple[str, ...] = ()


def _raw_spine(G: GroupPresentation):
    """Unnormalized spine word with the cut behind each segment."""
    word, cuts = [], []
    for kind, c in spine_items(G):
        ell = points_at(G, c)
        if not ell:
            continue
        seg = fin(ell) if kind == "fin" else (omega(ell) if kind == OMEGA else omega_star(ell))
        word.append(seg)
        cuts.append((kind, c))
    return word, cuts


def natural_embedding(G: GroupPresentation, K: GroupPresentation, shift: int) -> SpineEmbedding:
    """Select the image of the spine of ``G`` inside the spine of ``K``.

    ``G`` sits in ``K`` with its positions moved by ``shift`` segments; each
    point of ``G`` is sent to the point of ``K`` computed from the image of
    one of its representatives.
    """
    problems: List[str] = []
    image: Dict[Tuple[Cut, str], Tuple] = {}
    for kind, c in spine_items(G):
        for p in G.primes:
            for k in KINDS:
                if not is_point(G, c, k, p):
                    continue
                a = representative(G, SpinePoint(c, k, p))
                q = apply_map(K, k, a.shifted(shift), p)
                name = sort_name(G, k, p)
                key = (q.cut, name)
                src = (kind, c)
                if key in image and image[key] != src:
                    problems.append(f"{name}: two points map to {q.cut}")
                image[key] = src
                if k == S:
                    if colours(G, SpinePoint(c, k, p)).labels() != colours(K, q).labels():
                        problems.append(f"{name} at {c}: colours change")
    word, cuts = _raw_spine(K)
    segs = []
    for seg, (kind, c) in zip(word, cuts):
        pick = frozenset(pt for pt in seg.letter if (c, pt.sort) in image)
        if kind == "fin":
            segs.append(SegmentSelection((pick,)))
        else:
            segs.append(SegmentSelection((), pick))
    big = ColouredMultiOrder(spines(K).sorts, spines(K).colours, tuple(word))
    sel = SubstructureSelection(tuple(segs))
    found = {(c, pt.sort) for seg, (kind, c) in zip(word, cuts) for pt in seg.letter}
    for key in image:
        if key not in found:
            problems.append(f"{key[1]} image at {key[0]} is not a spine point")
    return SpineEmbedding(big, sel, spines(G), tuple(problems))


@dataclass(frozen=True)
class AugmentReport:
    required_divisibility: RequiredDivisibility
    candidate: GroupPresentation
    rank_checked: int
    spine_verdict: str
    spine_reason: str
    witness: Optional[ef.Witness]
    divisibility_ok: bool
    divisibility_failures: Tuple[int, ...]
    element_sampling: Tuple[Tuple[str, str, bool, bool], ...]
    overall: str
    side: str = "infinite"

    @property
    def passed(self) -> bool:
        return self.overall == "pass"


def verify_augment(H: GroupPresentation, G: GroupPresentation, n: int,
                   grid: int = 2, side: str = "infinite") -> AugmentReport:
    """Rank-``n`` evidence that ``G`` is elementary in ``H + G`` (or ``G + H``).

    ``side="infinite"`` puts ``H`` in front (more significant); the dual
    ``side="infinitesimal"`` appends it.
    """
    _nonzero(H, G)
    H, G = common_universe(H, G)
    if side == "infinite":
        K, shift = H + G, H.n_segments
    elif side == "infinitesimal":
        K, shift = G + H, 0
    else:
        raise ValueError(side)
    D = required_divisibility(G)
    emb = natural_embedding(G, K, shift)
    witness = None
    if emb.problems:
        verdict, reason = "fail", "; ".join(emb.problems)
    else:
        selected_theory = ef.word_theory(n, ef.Arena(emb.big, emb.selection).interval(None, None))
        if selected_theory != ef.word_theory(n, emb.small.word):
            verdict, reason = "fail", "image is not a copy of the spine"
        else:
            res = ef.elem_sub_n(emb.big, emb.selection, n, with_witness=True)
            verdict = "pass" if res.holds else "fail"
            reason, witness = res.reason, res.witness
    failures: Tuple[int, ...] = ()
    if side == "infinite":
        failures = tuple(p for p in H.primes if D.contains(p, G)
                         and not all(s.block.divisible_by(p) for s in H.segments))
    sampling = []
    for g in element_grid(G, grid):
        gk = g.shifted(shift)
        for (name, v), (_, w) in zip(predicate_rows(G, g), predicate_rows(K, gk)):
            sampling.append((name, str(g.support), v, w))
    sample_ok = all(v == w for _, _, v, w in sampling)
    ok = verdict == "pass" and not failures and sample_ok
    return AugmentReport(D, H, n, verdict, reason, witness, not failures, failures,
                         tuple(sampling), "pass" if ok else "fail", side)


def replay_augment_witness(report: AugmentReport, G: GroupPresentation) -> bool:
    """Replay the spine witness of a failed report against the spines it refutes."""
    if report.witness is None:
        return False
    H, G = common_universe(report.candidate, G)
    K, shift = (H + G, H.n_segments) if report.side == "infinite" else (G + H, 0)
    emb = natural_embedding(G, K, shift)
    return ef.replay(report.witness, ef.Arena(emb.big, emb.selection), ef.Arena(emb.big))
