"""Multi-round pool simulation: instance generation, dynamics, scenarios.

An instance is one compatibility graph over the whole patient-donor pool,
with per-vertex arrival rounds.  A run walks the rounds: build the current
pool's graph, generate its game, compute the concept's initial allocation,
shift by credits per the scenario, select a maximum matching, realize it,
update credits, advance the pool.  Matched pairs leave; unmatched pairs
persist at most ``max_wait_rounds`` rounds; newcomers enter on their arrival
round.

Instances are reproducible: every instance owns a counter-based RNG stream
derived from the master seed and the (setting, n, index) coordinates, so
scheduling can never perturb draws.
"""
from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _kernels
from .balancing import lexmin_matching, min_d1_matching
from .concepts import Allocation, benefit, tau
from .credits import (
    ADDITIVE_CREDITS,
    CREDIT_ADJUSTED_GAME,
    CONCEPTS,
    CreditLedger,
    RoundRecord,
    UndefinedConceptError,
    initial_allocation,
    target_allocation,
    update_credits,
)
from .games import CharacteristicFunction, generate_game, is_convex, is_quasibalanced
from .graph import (
    BLOOD_TYPES,
    CompatibilityGraph,
    GraphError,
    Matching,
    PRA_CLASSES,
    Vertex,
    graph_from_dict,
    matched_counts,
)
from .matching import maximum_matching

SCENARIOS = ("arbitrary", "d1", "d1_c", "lexmin", "lexmin_c", "d1_bar", "lexmin_bar")

# donor-to-patient ABO compatibility
_BLOOD_OK = {
    "O": ("O", "A", "B", "AB"),
    "A": ("A", "AB"),
    "B": ("B", "AB"),
    "AB": ("AB",),
}

DEFAULT_BLOOD_FREQS = {"O": 0.4814, "A": 0.3373, "B": 0.1428, "AB": 0.0385}
# Sensitization of a pool of pairs that already failed direct donation:
# screening out self-compatible pairs enriches the sensitized classes, so the
# pool marginals sit well above general-population PRA frequencies.
DEFAULT_PRA_CLASSES = {
    "low": {"freq": 0.55, "crossmatch_fail": 0.45},
    "medium": {"freq": 0.30, "crossmatch_fail": 0.70},
    "high": {"freq": 0.15, "crossmatch_fail": 0.90},
}


class ConfigError(ValueError):
    """Raised on malformed simulation configs; message names the keys."""


def scenario_selector(scenario: str) -> str:
    if scenario == "arbitrary":
        return "arbitrary"
    return "d1" if scenario.startswith("d1") else "lexmin"


def scenario_uses_credits(scenario: str) -> bool:
    return scenario.endswith("_c") or scenario.endswith("_bar")


def scenario_is_bar(scenario: str) -> bool:
    return scenario.endswith("_bar")


def count_trajectories(concepts: Sequence[str], scenarios: Sequence[str]) -> int:
    """Distinct simulation trajectories per (setting, n, instance).

    The arbitrary baseline ignores the concept, so it counts once; the
    credit-adjusted scenarios only differ for the Banzhaf value.
    """
    total = 0
    for sc in scenarios:
        if sc == "arbitrary":
            total += 1
        elif scenario_is_bar(sc):
            total += 1 if "banzhaf" in concepts else 0
        else:
            total += len(concepts)
    return total


@dataclass(frozen=True)
class SimulationConfig:
    master_seed: int = 20240401
    settings: tuple[str, ...] = ("equal",)
    n_countries: tuple[int, ...] = (4,)
    pool_size: int = 400
    rounds: int = 24
    round1_fraction: float = 0.25
    max_wait_rounds: int = 4
    instances: int = 1
    concepts: tuple[str, ...] = CONCEPTS
    scenarios: tuple[str, ...] = ("arbitrary", "d1", "d1_c", "lexmin", "lexmin_c")
    blood_type_freqs: Mapping[str, float] = field(
        default_factory=lambda: dict(DEFAULT_BLOOD_FREQS))
    pra_classes: Mapping[str, Mapping[str, float]] = field(
        default_factory=lambda: {k: dict(v) for k, v in DEFAULT_PRA_CLASSES.items()})
    ingest_files: tuple[str, ...] = ()
    country_cap: int = 15

    def __post_init__(self):
        problems = []
        if not (0.0 < self.round1_fraction <= 1.0):
            problems.append("round1_fraction must be in (0, 1]")
        if self.rounds < 1:
            problems.append("rounds must be >= 1")
        if self.max_wait_rounds < 1:
            problems.append("max_wait_rounds must be >= 1")
        if self.instances < 1:
            problems.append("instances must be >= 1")
        for n in self.n_countries:
            if n < 2:
                problems.append(f"n_countries entry {n} must be >= 2")
            if n > self.pool_size:
                problems.append(f"n_countries entry {n} exceeds pool_size")
        for s in self.settings:
            if s not in ("equal", "varying"):
                problems.append(f"settings entry {s!r} not in {{equal, varying}}")
        for c in self.concepts:
            if c not in CONCEPTS:
                problems.append(f"concepts entry {c!r} unknown")
        for sc in self.scenarios:
            if sc not in SCENARIOS:
                problems.append(f"scenarios entry {sc!r} unknown")
        freq_sum = sum(self.blood_type_freqs.get(t, 0.0) for t in BLOOD_TYPES)
        if abs(freq_sum - 1.0) > 1e-6:
            problems.append("blood_type_freqs must sum to 1 over O/A/B/AB")
        pra_sum = sum(v.get("freq", 0.0) for v in self.pra_classes.values())
        if set(self.pra_classes) != set(PRA_CLASSES) or abs(pra_sum - 1.0) > 1e-6:
            problems.append("pra_classes must cover low/medium/high with freqs summing to 1")
        if problems:
            raise ConfigError("invalid config: " + "; ".join(problems))

    @staticmethod
    def from_dict(data: Mapping) -> "SimulationConfig":
        known = {
            "master_seed", "settings", "n_countries", "pool_size", "rounds",
            "round1_fraction", "max_wait_rounds", "instances", "concepts",
            "scenarios", "blood_type_freqs", "pra_classes", "ingest_files",
            "country_cap",
        }
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"invalid config: unknown keys {sorted(unknown)}")
        kwargs = dict(data)
        for key in ("settings", "n_countries", "concepts", "scenarios", "ingest_files"):
            if key in kwargs:
                kwargs[key] = tuple(kwargs[key])
        return SimulationConfig(**kwargs)

    @staticmethod
    def load(path) -> "SimulationConfig":
        with open(path) as fh:
            return SimulationConfig.from_dict(json.load(fh))

    def to_dict(self) -> dict:
        return {
            "master_seed": self.master_seed,
            "settings": list(self.settings),
            "n_countries": list(self.n_countries),
            "pool_size": self.pool_size,
            "rounds": self.rounds,
            "round1_fraction": self.round1_fraction,
            "max_wait_rounds": self.max_wait_rounds,
            "instances": self.instances,
            "concepts": list(self.concepts),
            "scenarios": list(self.scenarios),
            "blood_type_freqs": dict(self.blood_type_freqs),
            "pra_classes": {k: dict(v) for k, v in self.pra_classes.items()},
            "ingest_files": list(self.ingest_files),
            "country_cap": self.country_cap,
        }


def country_sizes_for(setting: str, n: int, pool: int) -> np.ndarray:
    """Country sizes: equal split, or small:medium:large = 1:2:3 by thirds.

    Remainders go to the lowest indices in both settings.
    """
    if setting == "equal":
        base = pool // n
        sizes = np.full(n, base, dtype=np.int64)
        sizes[: pool - base * n] += 1
        return sizes
    group = [n // 3] * 3
    for i in range(n - 3 * (n // 3)):
        group[i] += 1
    weights = np.concatenate([
        np.full(group[0], 1.0), np.full(group[1], 2.0), np.full(group[2], 3.0)])
    raw = weights / weights.sum() * pool
    sizes = np.floor(raw).astype(np.int64)
    short = pool - int(sizes.sum())
    sizes[:short] += 1
    return sizes


def _instance_rng(cfg: SimulationConfig, setting: str, n: int, index: int):
    setting_idx = 0 if setting == "equal" else 1
    seq = np.random.SeedSequence(entropy=cfg.master_seed,
                                 spawn_key=(setting_idx, n, index))
    return np.random.Generator(np.random.Philox(seq))


def generate_instance(cfg: SimulationConfig, setting: str, n: int,
                      index: int) -> CompatibilityGraph:
    """Draw one full-pool instance: blood types, PRA, arrivals, partition.

    A mutual exchange edge needs blood compatibility in both directions and
    two negative crossmatches, each failing with the patient's PRA-class
    probability.  Countries own contiguous id blocks (the pairs themselves
    are i.i.d., so blocks are as arbitrary as any other equal split).
    """
    if n > cfg.pool_size:
        raise ConfigError(f"n={n} exceeds pool_size={cfg.pool_size}")
    rng = _instance_rng(cfg, setting, n, index)
    pool = cfg.pool_size

    blood = np.array(BLOOD_TYPES)
    bfreq = np.array([cfg.blood_type_freqs[t] for t in BLOOD_TYPES])
    pra_names = np.array(PRA_CLASSES)
    pfreq = np.array([cfg.pra_classes[k]["freq"] for k in PRA_CLASSES])
    pfail = np.array([cfg.pra_classes[k]["crossmatch_fail"] for k in PRA_CLASSES])

    patient = rng.choice(len(blood), size=pool, p=bfreq)
    donor = rng.choice(len(blood), size=pool, p=bfreq)
    pra = rng.choice(len(pra_names), size=pool, p=pfreq)
    compat = np.zeros((4, 4), dtype=bool)
    for d, targets in _BLOOD_OK.items():
        for t in targets:
            compat[BLOOD_TYPES.index(d), BLOOD_TYPES.index(t)] = True

    sizes = country_sizes_for(setting, n, pool)
    country = np.empty(pool, dtype=np.int64)
    offset = 0
    for p in range(n):
        country[offset:offset + sizes[p]] = p
        offset += int(sizes[p])

    n_round1 = int(np.ceil(cfg.round1_fraction * pool))
    arrivals = np.empty(pool, dtype=np.int64)
    first = rng.choice(pool, size=n_round1, replace=False)
    arrivals[:] = 0
    arrivals[first] = 1
    rest = np.flatnonzero(arrivals == 0)
    if cfg.rounds > 1:
        arrivals[rest] = rng.integers(2, cfg.rounds + 1, size=len(rest))
    else:
        arrivals[rest] = 1

    blood_ok = compat[donor[:, None], patient[None, :]]
    xm_ok = rng.random((pool, pool)) >= pfail[pra][None, :]
    arc = blood_ok & xm_ok
    mutual = arc & arc.T
    iu, ju = np.nonzero(np.triu(mutual, k=1))
    edges = list(zip(iu.tolist(), ju.tolist()))

    vertices = [
        Vertex(i, int(country[i]), int(arrivals[i]),
               donor_blood=str(blood[donor[i]]), patient_blood=str(blood[patient[i]]),
               pra=str(pra_names[pra[i]]))
        for i in range(pool)
    ]
    return CompatibilityGraph(vertices, edges, n)


def round_graph(instance: CompatibilityGraph, pool_ids: set[int]) -> CompatibilityGraph:
    verts = [instance.vertex(v) for v in sorted(pool_ids)]
    edges = [(u, w) for (u, w) in instance.edges if u in pool_ids and w in pool_ids]
    return CompatibilityGraph(verts, edges, instance.n_countries)


def advance_pool(instance: CompatibilityGraph, pool_ids: set[int],
                 matched_ids: set[int], h: int, max_wait_rounds: int) -> set[int]:
    """Matched pairs leave; unmatched pairs older than the wait limit leave;
    next round's arrivals join."""
    cutoff = h - (max_wait_rounds - 1)
    survivors = {
        v for v in pool_ids
        if v not in matched_ids and instance.vertex(v).arrival_round > cutoff
    }
    newcomers = {v.id for v in instance.vertices if v.arrival_round == h + 1}
    return survivors | newcomers


@dataclass
class InstanceReport:
    """Everything one (instance, concept, scenario) run produced."""

    setting: str
    n: int
    instance_index: int
    concept: str
    scenario: str
    rounds: list[RoundRecord]
    x_star: np.ndarray
    y_star: np.ndarray
    s_star: np.ndarray
    total_matching_size: int
    credit_series: list[float]
    accumulated_game: CharacteristicFunction | None
    no_coop_total: int | None = None
    aborted: bool = False
    abort_reason: str = ""

    def to_dict(self, with_timings: bool = True) -> dict:
        return {
            "setting": self.setting,
            "n": self.n,
            "instance_index": self.instance_index,
            "concept": self.concept,
            "scenario": self.scenario,
            "rounds": [r.to_dict(with_timings) for r in self.rounds],
            "x_star": self.x_star.tolist(),
            "y_star": self.y_star.tolist(),
            "s_star": self.s_star.tolist(),
            "total_matching_size": self.total_matching_size,
            "credit_series": list(map(float, self.credit_series)),
            "accumulated_game": (None if self.accumulated_game is None
                                 else self.accumulated_game.to_dict()),
            "no_coop_total": self.no_coop_total,
            "aborted": self.aborted,
            "abort_reason": self.abort_reason,
        }

    @staticmethod
    def from_dict(d: dict) -> "InstanceReport":
        return InstanceReport(
            setting=d["setting"], n=int(d["n"]),
            instance_index=int(d["instance_index"]), concept=d["concept"],
            scenario=d["scenario"],
            rounds=[RoundRecord.from_dict(r) for r in d["rounds"]],
            x_star=np.asarray(d["x_star"]), y_star=np.asarray(d["y_star"]),
            s_star=np.asarray(d["s_star"]),
            total_matching_size=int(d["total_matching_size"]),
            credit_series=list(d["credit_series"]),
            accumulated_game=(None if d["accumulated_game"] is None else
                              CharacteristicFunction.from_dict(d["accumulated_game"])),
            no_coop_total=d.get("no_coop_total"),
            aborted=bool(d.get("aborted", False)),
            abort_reason=d.get("abort_reason", ""),
        )


def _audit_flags(game: CharacteristicFunction):
    convex = is_convex(game)
    quasi, _ = is_quasibalanced(game)
    t = tau(game)
    be = benefit(game)
    teq = None
    if t is not None and be is not None:
        teq = bool(np.max(np.abs(t.x - be.x)) <= 1e-9)
    return convex, quasi, teq


def run_instance(instance: CompatibilityGraph, concept: str, scenario: str,
                 rounds: int = 24, max_wait_rounds: int = 4,
                 country_cap: int = 15, setting: str = "equal",
                 instance_index: int = 0, audit: bool = True,
                 keep_games: bool = True) -> InstanceReport:
    """Run one 24-round (by default) trajectory for a concept and scenario."""
    if scenario not in SCENARIOS:
        raise ConfigError(f"unknown scenario {scenario!r}")
    if concept not in CONCEPTS:
        raise ConfigError(f"unknown concept {concept!r}")
    if scenario_is_bar(scenario) and concept != "banzhaf":
        raise ConfigError("credit-adjusted scenarios are defined for banzhaf only")
    reports = _run_rounds(instance, [concept], scenario, rounds, max_wait_rounds,
                          country_cap, setting, instance_index, audit, keep_games)
    return reports[concept]


def run_instance_all_concepts(instance: CompatibilityGraph, concepts: Sequence[str],
                              rounds: int = 24, max_wait_rounds: int = 4,
                              country_cap: int = 15, setting: str = "equal",
                              instance_index: int = 0, audit: bool = True,
                              keep_games: bool = True) -> dict[str, InstanceReport]:
    """Arbitrary-matching baseline: one shared trajectory, per-concept records.

    The matching choice ignores the target, so the pool evolution and games
    are computed once and every concept's allocations are read off them.
    """
    return _run_rounds(instance, list(concepts), "arbitrary", rounds,
                       max_wait_rounds, country_cap, setting, instance_index,
                       audit, keep_games)


def _run_rounds(instance, concepts, scenario, rounds, max_wait_rounds,
                country_cap, setting, instance_index, audit, keep_games):
    n = instance.n_countries
    regime = CREDIT_ADJUSTED_GAME if scenario_is_bar(scenario) else ADDITIVE_CREDITS
    credited = scenario_uses_credits(scenario)
    selector = scenario_selector(scenario)

    ledgers = {c: CreditLedger.initial(n) for c in concepts}
    records: dict[str, list[RoundRecord]] = {c: [] for c in concepts}
    credit_series: dict[str, list[float]] = {c: [] for c in concepts}
    aborted: dict[str, str] = {}
    game_sum = np.zeros(1 << n)
    total_size = 0

    pool = {v.id for v in instance.vertices if v.arrival_round == 1}
    for h in range(1, rounds + 1):
        t0 = time.perf_counter()
        g = round_graph(instance, pool)
        t_graph = time.perf_counter() - t0

        t0 = time.perf_counter()
        game = generate_game(g, country_cap)
        t_game = time.perf_counter() - t0
        if keep_games:
            game_sum += game.values

        if audit:
            convex, quasi, teq = _audit_flags(game)
        else:
            convex = quasi = teq = None

        matching_by_concept: dict[str, Matching] = {}
        for concept in concepts:
            if concept in aborted:
                continue
            ledger = ledgers[concept]
            credit_series[concept].append(float(np.abs(ledger.credits).sum()))
            t0 = time.perf_counter()
            try:
                alloc, fell_back = initial_allocation(game, concept, regime, ledger)
            except UndefinedConceptError as exc:
                aborted[concept] = f"round {h}: {exc}"
                continue
            t_concept = time.perf_counter() - t0

            if regime == CREDIT_ADJUSTED_GAME:
                x = alloc
                y = Allocation(x.x - ledger.credits, x.total)
            else:
                y = alloc
                x = target_allocation(y, ledger) if credited else y

            t0 = time.perf_counter()
            if selector == "arbitrary":
                if not matching_by_concept:
                    shared = maximum_matching(g)
                    matching_by_concept = {c: shared for c in concepts}
                m = matching_by_concept[concept]
            elif selector == "d1":
                m, _ = min_d1_matching(g, x)
            else:
                m, _ = lexmin_matching(g, x)
            t_select = time.perf_counter() - t0

            s = matched_counts(g, m)
            # the record's credit column is what the target actually used;
            # uncredited scenarios still accumulate the shadow series
            c_used = ledger.credits if (credited or regime == CREDIT_ADJUSTED_GAME) \
                else np.zeros(n)
            records[concept].append(RoundRecord(
                h=h, concept=concept, scenario=scenario,
                y=y.x, c=c_used, x=x.x, s=s.counts,
                matching_edges=tuple(sorted(m.edges)), mu=m.size,
                tau_fallback=fell_back, convex=convex, quasibalanced=quasi,
                tau_equals_benefit=teq,
                timings={"data_prep": 0.0, "graph_build": t_graph,
                         "game_gen": t_game, "concept": t_concept,
                         "selection": t_select},
            ))
            # one recurrence covers real and shadow ledgers: c' = c + (y - s)
            ledgers[concept] = CreditLedger(
                ledger.credits + (y.x - s.counts), h + 1)

        t0 = time.perf_counter()
        # pool advances along the first live concept's trajectory; for the
        # shared arbitrary baseline all concepts hold the same matching
        driver = next((c for c in concepts if c not in aborted), None)
        if driver is None:
            break
        m_driver = records[driver][-1]
        matched = {v for e in m_driver.matching_edges for v in e}
        total_size += m_driver.mu
        pool = advance_pool(instance, pool, matched, h, max_wait_rounds)
        t_prep = time.perf_counter() - t0
        for concept in concepts:
            if concept not in aborted and records[concept]:
                records[concept][-1].timings["data_prep"] = t_prep

    out = {}
    for concept in concepts:
        recs = records[concept]
        if recs:
            x_star = np.sum([r.x for r in recs], axis=0)
            y_star = np.sum([r.y for r in recs], axis=0)
            s_star = np.sum([r.s for r in recs], axis=0)
            size = int(sum(r.mu for r in recs))
        else:
            x_star = y_star = s_star = np.zeros(n)
            size = 0
        out[concept] = InstanceReport(
            setting=setting, n=n, instance_index=instance_index,
            concept=concept, scenario=scenario, rounds=recs,
            x_star=x_star, y_star=y_star, s_star=s_star,
            total_matching_size=size,
            credit_series=credit_series[concept],
            accumulated_game=(CharacteristicFunction(n, game_sum.copy())
                              if keep_games else None),
            aborted=concept in aborted,
            abort_reason=aborted.get(concept, ""),
        )
    return out


def no_cooperation_baseline(instance: CompatibilityGraph, rounds: int = 24,
                            max_wait_rounds: int = 4) -> tuple[list[int], int]:
    """Each country matches internally; same pool dynamics otherwise.

    Returns per-round transplant counts (2x matching sizes) and their total.
    """
    pool = {v.id for v in instance.vertices if v.arrival_round == 1}
    per_round = []
    for h in range(1, rounds + 1):
        g = round_graph(instance, pool)
        matched: set[int] = set()
        ids = g.vertex_ids
        transplants = 0
        for p in range(g.n_countries):
            mate = np.full(g.n_vertices, -1, dtype=np.int64)
            size = int(_kernels.masked_matching(
                g.indptr, g.indices, g.country, np.int64(1) << p, mate))
            transplants += 2 * size
            for i in range(g.n_vertices):
                if mate[i] >= 0:
                    matched.add(ids[i])
        per_round.append(transplants)
        pool = advance_pool(instance, pool, matched, h, max_wait_rounds)
    return per_round, int(sum(per_round))


def run_batch(cfg: SimulationConfig, progress=None) -> list[InstanceReport]:
    """Cartesian product over settings, n, instances, concepts, scenarios.

    Reports come back in a deterministic order; identical configs give
    identical reports.
    """
    reports: list[InstanceReport] = []
    for setting in cfg.settings:
        for n in cfg.n_countries:
            for index in range(cfg.instances):
                instance = load_or_generate_instance(cfg, setting, n, index)
                base_per_round, base_total = no_cooperation_baseline(
                    instance, cfg.rounds, cfg.max_wait_rounds)
                produced: list[InstanceReport] = []
                if "arbitrary" in cfg.scenarios:
                    shared = run_instance_all_concepts(
                        instance, cfg.concepts, cfg.rounds, cfg.max_wait_rounds,
                        cfg.country_cap, setting, index)
                    produced.extend(shared[c] for c in cfg.concepts)
                for scenario in cfg.scenarios:
                    if scenario == "arbitrary":
                        continue
                    cs = ["banzhaf"] if scenario_is_bar(scenario) else cfg.concepts
                    for concept in cs:
                        if concept not in cfg.concepts:
                            continue
                        produced.append(run_instance(
                            instance, concept, scenario, cfg.rounds,
                            cfg.max_wait_rounds, cfg.country_cap, setting, index))
                for rep in produced:
                    rep.no_coop_total = base_total
                reports.extend(produced)
                if progress is not None:
                    progress(setting, n, index)
    return reports


def load_or_generate_instance(cfg: SimulationConfig, setting: str, n: int,
                              index: int) -> CompatibilityGraph:
    if cfg.ingest_files:
        path = cfg.ingest_files[index % len(cfg.ingest_files)]
        with open(path) as fh:
            g = graph_from_dict(json.load(fh))
        if g.n_countries != n:
            raise ConfigError(
                f"ingested instance {path} has {g.n_countries} countries, expected {n}")
        return g
    return generate_instance(cfg, setting, n, index)
