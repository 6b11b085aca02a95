import json

import numpy as np
import pytest

from ikepsim.graph import graph_to_dict, save_graph
from ikepsim.simulator import (
    ConfigError,
    InstanceReport,
    SimulationConfig,
    advance_pool,
    count_trajectories,
    country_sizes_for,
    generate_instance,
    no_cooperation_baseline,
    round_graph,
    run_batch,
    run_instance,
    run_instance_all_concepts,
)


def test_config_validation_lists_offending_keys():
    with pytest.raises(ConfigError, match="round1_fraction"):
        SimulationConfig(round1_fraction=0.0)
    with pytest.raises(ConfigError, match="unknown keys"):
        SimulationConfig.from_dict({"pool": 100})
    with pytest.raises(ConfigError, match="scenarios"):
        SimulationConfig(scenarios=("d2",))
    with pytest.raises(ConfigError, match="concepts"):
        SimulationConfig(concepts=("potential",))
    with pytest.raises(ConfigError, match="exceeds pool_size"):
        SimulationConfig(n_countries=(64,), pool_size=32)


def test_config_round_trip(tmp_path):
    cfg = SimulationConfig(master_seed=5, n_countries=(4, 5), instances=2)
    path = tmp_path / "cfg.json"
    with open(path, "w") as fh:
        json.dump(cfg.to_dict(), fh)
    again = SimulationConfig.load(path)
    assert again == cfg


def test_country_sizes_equal():
    assert country_sizes_for("equal", 4, 400).tolist() == [100, 100, 100, 100]
    assert country_sizes_for("equal", 3, 10).tolist() == [4, 3, 3]


def test_country_sizes_varying():
    assert country_sizes_for("varying", 6, 600).tolist() == [50, 50, 100, 100, 150, 150]
    sizes = country_sizes_for("varying", 7, 400)
    assert sizes.sum() == 400
    assert len(sizes) == 7


def test_generate_instance_deterministic():
    cfg = SimulationConfig(master_seed=99, n_countries=(4,), pool_size=80, rounds=8)
    a = generate_instance(cfg, "equal", 4, 0)
    b = generate_instance(cfg, "equal", 4, 0)
    assert graph_to_dict(a) == graph_to_dict(b)
    c = generate_instance(cfg, "equal", 4, 1)
    assert graph_to_dict(a) != graph_to_dict(c)


def test_generate_instance_structure():
    cfg = SimulationConfig(master_seed=3, n_countries=(4,), pool_size=80, rounds=8)
    g = generate_instance(cfg, "equal", 4, 0)
    assert g.n_vertices == 80
    assert g.country_sizes.tolist() == [20, 20, 20, 20]
    arrivals = np.array([v.arrival_round for v in g.vertices])
    assert (arrivals == 1).sum() == 20  # ceil(0.25 * 80)
    assert arrivals.min() >= 1 and arrivals.max() <= 8
    for v in g.vertices:
        assert v.donor_blood is not None and v.pra is not None
    # countries hold contiguous id blocks
    assert [g.vertex(i).country for i in range(80)] == sorted(
        g.vertex(i).country for i in range(80))
    # mutual edges respect blood compatibility in both directions
    donor_ok = {"O": set("OABX"), "A": {"A", "X"}, "B": {"B", "X"}, "AB": {"X"}}
    short = {"O": "O", "A": "A", "B": "B", "AB": "X"}
    for (u, w) in list(g.edges)[:200]:
        vu, vw = g.vertex(u), g.vertex(w)
        assert short[vw.patient_blood] in donor_ok[vu.donor_blood]
        assert short[vu.patient_blood] in donor_ok[vw.donor_blood]


def test_advance_pool_rules(two_round_instance):
    pool = {0, 1, 2, 3}
    # all matched -> arrivals only
    nxt = advance_pool(two_round_instance, pool, {0, 1, 2, 3}, 1, 4)
    assert nxt == {4, 5, 6}
    # nobody matched, h <= 3 -> no age-outs
    nxt = advance_pool(two_round_instance, pool, set(), 1, 4)
    assert nxt == {0, 1, 2, 3, 4, 5, 6}
    # vertex arriving in round 1, never matched, leaves after round 4
    nxt = advance_pool(two_round_instance, {0}, set(), 4, 4)
    assert 0 not in nxt


def test_pool_age_bound():
    cfg = SimulationConfig(master_seed=17, n_countries=(3,), pool_size=60, rounds=10)
    inst = generate_instance(cfg, "equal", 3, 0)
    pool = {v.id for v in inst.vertices if v.arrival_round == 1}
    for h in range(1, 11):
        for vid in pool:
            assert h - inst.vertex(vid).arrival_round < 4
        pool = advance_pool(inst, pool, set(), h, 4)


def test_walkthrough_shapley(two_round_instance):
    rep = run_instance(two_round_instance, "shapley", "lexmin_c", rounds=2)
    r1, r2 = rep.rounds
    assert r1.x == pytest.approx([2 / 3, 8 / 3, 2 / 3], abs=1e-9)
    assert r2.c == pytest.approx([-1 / 3, 2 / 3, -1 / 3], abs=1e-9)
    assert r2.x == pytest.approx([1.0, 1.0, 0.0], abs=1e-9)
    assert r2.matching_edges == ((4, 5),)
    assert r2.x - r2.s == pytest.approx([0.0, 0.0, 0.0], abs=1e-9)


def test_walkthrough_nucleolus(two_round_instance):
    rep = run_instance(two_round_instance, "nucleolus", "lexmin_c", rounds=2)
    r2 = rep.rounds[1]
    assert r2.y == pytest.approx([2.0, 0.0, 0.0], abs=1e-9)
    assert r2.x == pytest.approx([5 / 3, 2 / 3, -1 / 3], abs=1e-9)
    assert r2.x - r2.s == pytest.approx([2 / 3, -1 / 3, -1 / 3], abs=1e-9)


def test_arbitrary_scenario_sizes(two_round_instance):
    shared = run_instance_all_concepts(two_round_instance, ["shapley"], rounds=2)
    assert [r.mu for r in shared["shapley"].rounds] == [2, 1]


def test_no_cooperation_examples(two_round_instance):
    # round 1: only the i2-i3 edge is internal -> 2 transplants; round 2: none
    per_round, total = no_cooperation_baseline(two_round_instance, rounds=2)
    assert per_round == [2, 0] and total == 2


def test_no_cooperation_single_country():
    from ikepsim.graph import CompatibilityGraph, Vertex

    g = CompatibilityGraph([Vertex(0, 0), Vertex(1, 0)], [(0, 1)], 1)
    per_round, total = no_cooperation_baseline(g, rounds=1)
    assert total == 2
    rep = run_instance(g, "shapley", "lexmin", rounds=1, country_cap=15)
    assert 2 * rep.total_matching_size == total


def test_bar_scenarios_banzhaf_only(two_round_instance):
    with pytest.raises(ConfigError):
        run_instance(two_round_instance, "shapley", "lexmin_bar", rounds=2)
    rep = run_instance(two_round_instance, "banzhaf", "d1_bar", rounds=2)
    assert not rep.aborted


def test_count_trajectories_matches_paper_accounting():
    concepts = ("shapley", "nucleolus", "banzhaf", "tau", "benefit", "contribution")
    scenarios = ("arbitrary", "d1", "d1_c", "lexmin", "lexmin_c",
                 "d1_bar", "lexmin_bar")
    assert count_trajectories(concepts, scenarios) == 27


def test_run_batch_counting_and_determinism():
    cfg = SimulationConfig(master_seed=21, n_countries=(4, 5), pool_size=48,
                           rounds=4, instances=3,
                           concepts=("shapley", "nucleolus"),
                           scenarios=("d1_c", "lexmin_c"))
    reports = run_batch(cfg)
    assert len(reports) == 2 * 2 * 2 * 3
    again = run_batch(cfg)
    for a, b in zip(reports, again):
        assert a.to_dict(with_timings=False) == b.to_dict(with_timings=False)


def test_report_serialization_round_trip(two_round_instance):
    rep = run_instance(two_round_instance, "shapley", "lexmin_c", rounds=2)
    again = InstanceReport.from_dict(json.loads(json.dumps(rep.to_dict())))
    assert again.to_dict() == rep.to_dict()


def test_instance_file_ingestion(tmp_path, two_round_instance):
    path = tmp_path / "fixture.json"
    save_graph(two_round_instance, path)
    cfg = SimulationConfig(master_seed=1, n_countries=(3,), pool_size=7,
                           rounds=2, instances=1, concepts=("shapley",),
                           scenarios=("lexmin_c",), ingest_files=(str(path),))
    reports = run_batch(cfg)
    assert len(reports) == 1
    assert reports[0].rounds[1].x == pytest.approx([1.0, 1.0, 0.0], abs=1e-9)


def test_matching_sizes_maximum_every_round():
    cfg = SimulationConfig(master_seed=33, n_countries=(4,), pool_size=60, rounds=6)
    inst = generate_instance(cfg, "equal", 4, 0)
    from ikepsim.matching import maximum_matching_size

    for scenario in ("arbitrary", "d1", "lexmin_c"):
        rep = run_instance(inst, "shapley", scenario, rounds=6)
        pool = {v.id for v in inst.vertices if v.arrival_round == 1}
        for rec in rep.rounds:
            g = round_graph(inst, pool)
            assert rec.mu == maximum_matching_size(g)
            matched = {v for e in rec.matching_edges for v in e}
            pool = advance_pool(inst, pool, matched, rec.h, 4)
