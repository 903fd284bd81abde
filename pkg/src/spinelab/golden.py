"""Worked cases replayed by ``spinelab examples``."""
from __future__ import annotations

from typing import Callable, List, Tuple

from . import eftheory as ef
from .analyst import (
    check_equiv, propose_augment, replay_augment_witness, required_divisibility, verify_augment,
)
from .dsl import parse_element, parse_group, serialize_group
from .group_model import Cut, before_all, tail_presentation
from .spine import check_star, end_segment_check, map_t_plus, spines

UNIVERSE = (2, 3)


def count_sort(M, sort: str) -> int:
    if not M.is_finite:
        raise ValueError("infinite spine")
    return sum(1 for seg in M.word for ell in seg.letters for p in ell if p.sort == sort)


def _z_vs_q() -> List[Tuple[str, object, object]]:
    Z, Q = parse_group("Z", UNIVERSE), parse_group("Q", UNIVERSE)
    res = check_equiv(Z, Q, 1)
    replayed = res.witness is not None and ef.replay(res.witness, ef.Arena(spines(Z)),
                                                     ef.Arena(spines(Q)))
    return [
        ("S_2(Z) has one point", count_sort(spines(Z), "S_2"), 1),
        ("S_2(Q) is empty", count_sort(spines(Q), "S_2"), 0),
        ("Z vs Q at rank 1", res.verdict, "distinguished"),
        ("Z vs Q witness replays", replayed, True),
    ]


def _counterexample() -> List[Tuple[str, object, object]]:
    G = parse_group("lex[Zloc{2},Z]", UNIVERSE)
    H = Cut(1)
    Hp = tail_presentation(G, H)
    g = parse_element("(0, 1)", G)
    h = parse_element("(1)", Hp)
    star = {p: ok for p, _, _, ok in check_star(G, H).per_prime}
    return [
        ("t+_2((0,1)) in G is H", map_t_plus(G, g, 2).cut, H),
        ("t+_3((0,1)) in G is G", map_t_plus(G, g, 3).cut, before_all(G)),
        ("t+_2 of the same element in H is H", map_t_plus(Hp, h, 2).cut, before_all(Hp)),
        ("t+_3 of the same element in H is H", map_t_plus(Hp, h, 3).cut, before_all(Hp)),
        ("condition fails at 2", star[2], False),
        ("condition holds at 3", star[3], True),
        ("end segment for H", end_segment_check(G, H), True),
    ]


def _z_to_q() -> List[Tuple[str, object, object]]:
    Z = parse_group("Z", UNIVERSE)
    D = required_divisibility(Z)
    good = verify_augment(propose_augment(Z), Z, 3)
    bad = verify_augment(Z, Z, 2)
    return [
        ("D(Z) is every universe prime", sorted(D.primes), [2, 3]),
        ("D(Z) carries the all-primes flag", D.all_primes, True),
        ("proposed augment of Z", serialize_group(propose_augment(Z)), "Q"),
        ("Q augments Z at rank 3", good.overall, "pass"),
        ("Z does not augment Z at rank 2", bad.overall, "fail"),
        ("failure witness replays", replay_augment_witness(bad, Z), True),
    ]


def _omega_star() -> List[Tuple[str, object, object]]:
    W = parse_group("rep(omegaStar,Z)", UNIVERSE)
    D = required_divisibility(W)
    cand = propose_augment(W)
    rep = verify_augment(cand, W, 3)
    return [
        ("D(omega* Z) is empty", (sorted(D.primes), D.generic), ([], False)),
        ("proposed augment of omega* Z", serialize_group(cand),
         "lex[rep(omegaStar,Z),rep(omega,Z)]"),
        ("zeta-indexed blocks augment omega* Z at rank 3", rep.overall, "pass"),
    ]


CASES: List[Tuple[str, Callable[[], List[Tuple[str, object, object]]]]] = [
    ("Z versus Q spines", _z_vs_q),
    ("Zloc{2} + Z counterexample", _counterexample),
    ("Z to Q augment", _z_to_q),
    ("omega* Hahn augment", _omega_star),
]


def run() -> List[Tuple[str, str, object, object, bool]]:
    rows = []
    for group, fn in CASES:
        for name, got, want in fn():
            rows.append((group, name, got, want, got == want))
    return rows
