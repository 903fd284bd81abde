"""Shared test inputs."""
from __future__ import annotations

import itertools

from spinelab.dsl import parse_group

UNIVERSE = (2, 3)
BLOCKS = ("Z", "Q", "Zloc{2}", "Zloc{3}", "Block{2,{2}}")


def block_words(max_len: int = 3):
    for n in range(1, max_len + 1):
        yield from itertools.product(BLOCKS, repeat=n)


def presentation(word) -> "GroupPresentation":
    return parse_group("lex[" + ",".join(word) + "]", UNIVERSE)


def finite_grid(max_len: int = 3):
    """Every presentation with at most ``max_len`` finite segments over ``BLOCKS``."""
    return [presentation(w) for w in block_words(max_len)]
