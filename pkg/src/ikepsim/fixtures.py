"""Small hand-checkable instances used by tests and the demo command."""
from __future__ import annotations

from .graph import CompatibilityGraph, Vertex


def two_round_example() -> CompatibilityGraph:
    """Three countries, two rounds.

    Round 1 pool is a four-vertex path with countries (0, 1, 1, 2); its
    maximum matching is unique, so every concept plays the same first round.
    All four pairs are matched and leave.  Round 2 brings one pair per
    country with country 0 compatible with both others, giving two maximum
    matchings for the balancing layer to choose between.
    """
    vertices = [
        Vertex(0, 0, arrival_round=1),
        Vertex(1, 1, arrival_round=1),
        Vertex(2, 1, arrival_round=1),
        Vertex(3, 2, arrival_round=1),
        Vertex(4, 0, arrival_round=2),
        Vertex(5, 1, arrival_round=2),
        Vertex(6, 2, arrival_round=2),
    ]
    edges = [(0, 1), (1, 2), (2, 3), (4, 5), (4, 6)]
    return CompatibilityGraph(vertices, edges, 3)


def triangle_example() -> CompatibilityGraph:
    """Unit triangle, one pair per country: no tau/benefit/contribution,
    empty core."""
    return CompatibilityGraph(
        [Vertex(0, 0), Vertex(1, 1), Vertex(2, 2)],
        [(0, 1), (1, 2), (0, 2)], 3)


def four_cycle_example() -> CompatibilityGraph:
    """Unit 4-cycle, one pair per country: tau and benefit both allocate
    one half per country although the game is not convex."""
    return CompatibilityGraph(
        [Vertex(i, i) for i in range(4)],
        [(0, 1), (1, 2), (2, 3), (0, 3)], 4)
