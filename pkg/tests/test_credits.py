import numpy as np
import pytest

from ikepsim.concepts import Allocation
from ikepsim.credits import (
    ADDITIVE_CREDITS,
    CREDIT_ADJUSTED_GAME,
    CreditError,
    CreditLedger,
    RoundRecord,
    UndefinedConceptError,
    concept_allocation,
    initial_allocation,
    target_allocation,
    update_credits,
)
from ikepsim.games import generate_game
from ikepsim.graph import MatchedCounts
from ikepsim.verify import random_partitioned_graph


def test_ledger_invariants():
    CreditLedger(np.zeros(3), 1)
    with pytest.raises(CreditError):
        CreditLedger(np.array([0.5, 0.0]), 2)  # not zero-sum
    with pytest.raises(CreditError):
        CreditLedger(np.array([0.5, -0.5]), 1)  # round 1 must be zero
    with pytest.raises(CreditError):
        CreditLedger(np.zeros(2), 0)


def test_target_allocation_examples():
    c = CreditLedger(np.array([-1 / 3, 2 / 3, -1 / 3]), 2)
    y = Allocation(np.array([4 / 3, 1 / 3, 1 / 3]), 2.0)
    assert target_allocation(y, c).x == pytest.approx([1.0, 1.0, 0.0])
    y = Allocation(np.array([2.0, 0.0, 0.0]), 2.0)
    assert target_allocation(y, c).x == pytest.approx([5 / 3, 2 / 3, -1 / 3])
    zero = CreditLedger.initial(3)
    assert target_allocation(y, zero).x == pytest.approx(y.x)


def test_update_credits_examples():
    s = MatchedCounts(np.array([1, 1, 0]))
    x = Allocation(np.array([1.0, 1.0, 0.0]), 2.0)
    assert update_credits(x, s, 3).credits == pytest.approx([0.0, 0.0, 0.0])
    x = Allocation(np.array([5 / 3, 2 / 3, -1 / 3]), 2.0)
    assert update_credits(x, s, 3).credits == pytest.approx([2 / 3, -1 / 3, -1 / 3])
    x = Allocation(np.array([2 / 3, 8 / 3, 2 / 3]), 4.0)
    s = MatchedCounts(np.array([1, 2, 1]))
    assert update_credits(x, s, 2).credits == pytest.approx([-1 / 3, 2 / 3, -1 / 3])


def test_update_credits_detects_nonmaximum():
    x = Allocation(np.array([1.0, 1.0]), 2.0)
    with pytest.raises(CreditError, match="non-maximum"):
        update_credits(x, MatchedCounts(np.array([0, 0])), 2)


def test_initial_allocation_examples(round1_game, round2_game):
    zero = CreditLedger.initial(3)
    y, fb = initial_allocation(round1_game, "shapley", ADDITIVE_CREDITS, zero)
    assert y.x == pytest.approx([2 / 3, 8 / 3, 2 / 3]) and not fb
    y, fb = initial_allocation(round2_game, "nucleolus", ADDITIVE_CREDITS, zero)
    assert y.x == pytest.approx([2.0, 0.0, 0.0], abs=1e-9)
    y, fb = initial_allocation(round2_game, "banzhaf", ADDITIVE_CREDITS, zero)
    assert y.x == pytest.approx([6 / 5, 2 / 5, 2 / 5])


def test_tau_fallback_flag(triangle_game, round1_game):
    zero = CreditLedger.initial(3)
    # triangle: tau and benefit fail together -> undefined
    with pytest.raises(UndefinedConceptError):
        initial_allocation(triangle_game, "tau", ADDITIVE_CREDITS, zero)
    _, fb = initial_allocation(round1_game, "tau", ADDITIVE_CREDITS, zero)
    assert not fb


def test_undefined_concepts_raise(triangle_game):
    zero = CreditLedger.initial(3)
    for concept in ("benefit", "contribution"):
        with pytest.raises(UndefinedConceptError):
            initial_allocation(triangle_game, concept, ADDITIVE_CREDITS, zero)


def test_unknown_concept_or_regime(round1_game):
    zero = CreditLedger.initial(3)
    with pytest.raises(CreditError):
        concept_allocation(round1_game, "potential")
    with pytest.raises(CreditError):
        initial_allocation(round1_game, "shapley", "multiplicative", zero)


def test_regime_equivalence_for_covariant_concepts():
    rng = np.random.default_rng(53)
    checked = 0
    for _ in range(50):
        g = random_partitioned_graph(rng, max_vertices=11, max_countries=4)
        v = generate_game(g)
        c = rng.normal(size=v.n)
        c -= c.mean()
        ledger = CreditLedger(c, 2)
        for concept in ("shapley", "nucleolus", "tau", "benefit"):
            try:
                y_add, _ = initial_allocation(v, concept, ADDITIVE_CREDITS, ledger)
            except UndefinedConceptError:
                continue
            x_add = target_allocation(y_add, ledger)
            x_bar, _ = initial_allocation(v, concept, CREDIT_ADJUSTED_GAME, ledger)
            assert x_bar.x == pytest.approx(x_add.x, abs=1e-6), concept
            checked += 1
    assert checked > 100


def test_regime_divergence_for_banzhaf(round2_game):
    ledger = CreditLedger(np.array([-1 / 3, 2 / 3, -1 / 3]), 2)
    y_add, _ = initial_allocation(round2_game, "banzhaf", ADDITIVE_CREDITS, ledger)
    x_add = target_allocation(y_add, ledger)
    x_bar, _ = initial_allocation(round2_game, "banzhaf", CREDIT_ADJUSTED_GAME, ledger)
    assert not np.allclose(x_bar.x, x_add.x, atol=1e-9)


def test_round_record_invariant_and_serialization():
    rec = RoundRecord(
        h=2, concept="shapley", scenario="lexmin_c",
        y=np.array([4 / 3, 1 / 3, 1 / 3]), c=np.array([-1 / 3, 2 / 3, -1 / 3]),
        x=np.array([1.0, 1.0, 0.0]), s=np.array([1, 1, 0]),
        matching_edges=((4, 5),), mu=1)
    again = RoundRecord.from_dict(rec.to_dict())
    assert again.x == pytest.approx(rec.x)
    assert again.matching_edges == rec.matching_edges
    with pytest.raises(CreditError):
        RoundRecord(h=2, concept="shapley", scenario="lexmin_c",
                    y=np.array([1.0, 0.0]), c=np.array([0.5, -0.5]),
                    x=np.array([1.0, 1.0]), s=np.array([1, 1]),
                    matching_edges=(), mu=0)
