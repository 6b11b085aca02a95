import numpy as np
import pytest

from ikepsim.fixtures import four_cycle_example, triangle_example, two_round_example
from ikepsim.games import generate_game
from ikepsim.graph import CompatibilityGraph, Vertex
from ikepsim.simulator import round_graph


@pytest.fixture(scope="session")
def two_round_instance():
    return two_round_example()


@pytest.fixture(scope="session")
def round1_graph(two_round_instance):
    pool = {v.id for v in two_round_instance.vertices if v.arrival_round == 1}
    return round_graph(two_round_instance, pool)


@pytest.fixture(scope="session")
def round2_graph(two_round_instance):
    pool = {v.id for v in two_round_instance.vertices if v.arrival_round == 2}
    return round_graph(two_round_instance, pool)


@pytest.fixture(scope="session")
def round1_game(round1_graph):
    return generate_game(round1_graph)


@pytest.fixture(scope="session")
def round2_game(round2_graph):
    return generate_game(round2_graph)


@pytest.fixture(scope="session")
def triangle_game():
    return generate_game(triangle_example())


@pytest.fixture(scope="session")
def four_cycle_game():
    return generate_game(four_cycle_example())


def path_graph(countries):
    n = len(countries)
    verts = [Vertex(i, c) for i, c in enumerate(countries)]
    edges = [(i, i + 1) for i in range(n - 1)]
    return CompatibilityGraph(verts, edges, max(countries) + 1)
