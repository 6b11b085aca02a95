import numpy as np
import pytest

from ikepsim.games import (
    CharacteristicFunction,
    GameError,
    accumulate_games,
    credit_adjusted_game,
    generate_game,
    is_convex,
    is_convex_definitional,
    is_essential,
    is_quasibalanced,
    is_superadditive,
    surplus,
)
from ikepsim.graph import CompatibilityGraph, Vertex
from ikepsim.matching import maximum_matching_size
from ikepsim.verify import random_partitioned_graph
from conftest import path_graph


def mask(*players):
    out = 0
    for p in players:
        out |= 1 << p
    return out


def test_generate_game_round1(round1_game):
    v = round1_game
    assert v.value(mask(0)) == 0 and v.value(mask(1)) == 1 and v.value(mask(2)) == 0
    assert v.value(mask(0, 1)) == 1
    assert v.value(mask(0, 2)) == 0
    assert v.value(mask(1, 2)) == 1
    assert v.value(v.grand) == 2


def test_generate_game_round2(round2_game):
    v = round2_game
    assert v.singleton_values().tolist() == [0, 0, 0]
    assert v.value(mask(0, 1)) == 1
    assert v.value(mask(0, 2)) == 1
    assert v.value(mask(1, 2)) == 0
    assert v.value(v.grand) == 1


def test_generate_game_edgeless():
    g = CompatibilityGraph([Vertex(i, i) for i in range(3)], [], 3)
    assert generate_game(g).values.tolist() == [0.0] * 8


def test_generate_game_cap():
    g = CompatibilityGraph([Vertex(i, i) for i in range(16)], [], 16)
    with pytest.raises(GameError, match="2\\^16"):
        generate_game(g)


def test_convexity_examples(four_cycle_game):
    three_path = generate_game(path_graph([0, 1, 2]))
    assert not is_convex(three_path)
    additive = CharacteristicFunction(
        3, np.array([bin(s).count("1") for s in range(8)], dtype=float))
    assert is_convex(additive)
    assert not is_convex(four_cycle_game)


def test_convexity_characterizations_agree():
    rng = np.random.default_rng(8)
    for _ in range(40):
        g = random_partitioned_graph(rng, max_vertices=12, max_countries=5)
        v = generate_game(g)
        assert is_convex(v) == is_convex_definitional(v)
    # randomized non-graph tables as well
    for _ in range(40):
        n = int(rng.integers(2, 5))
        vals = rng.integers(0, 6, size=1 << n).astype(float)
        vals[0] = 0.0
        v = CharacteristicFunction(n, vals)
        assert is_convex(v) == is_convex_definitional(v)


def test_quasibalance_examples(round1_game, round2_game, triangle_game):
    ok, prof = is_quasibalanced(triangle_game)
    assert not ok
    assert prof.a.tolist() == [1, 1, 1] and prof.b.tolist() == [0, 0, 0]
    ok, prof = is_quasibalanced(round2_game)
    assert ok and prof.a.tolist() == [1, 0, 0] and prof.b.tolist() == [1, 0, 0]
    ok, prof = is_quasibalanced(round1_game)
    assert ok and prof.a.tolist() == [0, 1, 0] and prof.b.tolist() == [1, 2, 1]


def test_surplus_and_essential(round1_game):
    assert surplus(round1_game) == 1.0
    assert is_essential(round1_game)
    two_isolated = generate_game(CompatibilityGraph(
        [Vertex(0, 0), Vertex(1, 1)], [], 2))
    assert surplus(two_isolated) == 0.0
    assert not is_essential(two_isolated)
    additive = CharacteristicFunction(
        2, np.array([0.0, 1.0, 1.0, 2.0]))
    assert surplus(additive) == 0.0


def test_credit_adjusted_examples(round2_game):
    c = np.array([-1 / 3, 2 / 3, -1 / 3])
    adj = credit_adjusted_game(round2_game, c)
    assert adj.value(mask(0)) == pytest.approx(-1 / 3)
    assert adj.value(mask(1, 2)) == pytest.approx(1 / 3)
    assert adj.value(adj.grand) == pytest.approx(1.0)
    same = credit_adjusted_game(round2_game, np.zeros(3))
    assert np.array_equal(same.values, round2_game.values)
    with pytest.raises(GameError):
        credit_adjusted_game(round2_game, np.array([0.5, 0.0, 0.0]))


def test_credit_adjustment_preserves_convexity_status():
    rng = np.random.default_rng(17)
    for _ in range(50):
        g = random_partitioned_graph(rng, max_vertices=10, max_countries=4)
        v = generate_game(g)
        c = rng.normal(size=v.n)
        c -= c.mean()
        assert is_convex(v) == is_convex(credit_adjusted_game(v, c))


def test_accumulate_games(round1_game, round2_game):
    total = accumulate_games([round1_game, round2_game])
    assert total.value(total.grand) == 3
    assert total.value(mask(0, 1)) == 2
    assert total.value(mask(0, 2)) == 1
    assert total.value(mask(1, 2)) == 1
    assert np.array_equal(accumulate_games([round1_game]).values, round1_game.values)
    tripled = accumulate_games([round1_game] * 3)
    assert np.array_equal(tripled.values, 3 * round1_game.values)
    with pytest.raises(GameError):
        accumulate_games([round1_game,
                          CharacteristicFunction(2, np.zeros(4))])


def test_generated_games_superadditive_and_monotone():
    rng = np.random.default_rng(23)
    for _ in range(30):
        g = random_partitioned_graph(rng, max_vertices=12, max_countries=5)
        v = generate_game(g)
        assert is_superadditive(v)
        # monotone: v(S) <= v(T) for S subset of T, via single-bit steps
        for s in range(1 << v.n):
            for p in range(v.n):
                if not (s >> p) & 1:
                    assert v.values[s] <= v.values[s | (1 << p)] + 1e-12


def test_grand_value_is_mu():
    rng = np.random.default_rng(29)
    for _ in range(25):
        g = random_partitioned_graph(rng, max_vertices=12, max_countries=4)
        assert generate_game(g).value((1 << g.n_countries) - 1) == \
            maximum_matching_size(g)


def test_game_dump_round_trip(round1_game):
    data = round1_game.to_dict()
    again = CharacteristicFunction.from_dict(data)
    assert again.n == round1_game.n
    assert np.array_equal(again.values, round1_game.values)
