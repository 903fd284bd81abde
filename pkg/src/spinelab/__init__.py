"""Spines of presented ordered abelian groups and rank-bounded model-theoretic checks."""

from .presentation import (
    BlockProfile, Coord, ElementLiteral, GroupPresentation, PresentationError, Segment,
)
from .group_model import Cut, ConvexTail
from .multiorder import ColouredMultiOrder, EmptyStructure, Point, SubstructureSelection
from .spine import SpinePoint, spines
from .eftheory import NTheory, equiv_n, n_theory
from .dsl import parse_element, parse_group, serialize_group

__version__ = "0.1.0"
