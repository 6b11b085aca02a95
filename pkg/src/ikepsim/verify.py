"""Randomized oracle suites: every fast path against an independent slow one.

Each suite draws seeded random instances, runs the production code and a
brute-force reference side by side, and returns (ok, message).  The same
functions back the test suite and the command-line ``verify`` subcommand.
"""
from __future__ import annotations

import itertools
import math

import numpy as np

from .balancing import deviation_vector, lexmin_matching, lexmin_matching_bisect, min_d1_matching
from .concepts import Allocation, core_nonempty, excess_vector, min_excess, nucleolus, shapley
from .games import CharacteristicFunction, generate_game
from .graph import CompatibilityGraph, Matching, Vertex, matched_counts
from .lp import LinearProgram, LpInfeasible, LpOptimal, LpUnbounded, solve_lp
from .matching import (
    IntervalConstraints,
    WeightedGraph,
    enumerate_maximum_matchings,
    interval_feasible_maximum_matching,
    interval_feasible_via_weighted,
    max_weight_perfect_matching,
    maximum_matching,
    maximum_matching_size,
)


def random_partitioned_graph(rng, max_vertices=14, max_countries=5,
                             min_vertices=2) -> CompatibilityGraph:
    nc = int(rng.integers(2, max_countries + 1))
    nv = int(rng.integers(min_vertices, max_vertices + 1))
    density = rng.uniform(0.1, 0.7)
    verts = [Vertex(i, int(rng.integers(nc))) for i in range(nv)]
    edges = [(i, j) for i in range(nv) for j in range(i + 1, nv)
             if rng.random() < density]
    return CompatibilityGraph(verts, edges, nc)


def brute_maximum_matching_size(g: CompatibilityGraph) -> int:
    n = g.n_vertices
    adj = [[] for _ in range(n)]
    for (u, v) in g.edges:
        pu, pv = g.position(u), g.position(v)
        adj[pu].append(pv)
        adj[pv].append(pu)
    best = 0

    def rec(v, covered, size):
        nonlocal best
        while v < n and (covered >> v) & 1:
            v += 1
        if v >= n:
            best = max(best, size)
            return
        take = covered | (1 << v)
        for w in adj[v]:
            if not (covered >> w) & 1:
                rec(v + 1, take | (1 << w), size + 1)
        rec(v + 1, take, size)

    rec(0, 0, 0)
    return best


def brute_max_weight_perfect(wg: WeightedGraph) -> int | None:
    n = wg.n_vertices
    if n % 2:
        return None
    adj: dict[int, list[tuple[int, int]]] = {i: [] for i in range(n)}
    for (u, v, w) in wg.edges:
        adj[u].append((v, w))
        adj[v].append((u, w))
    best: list[int | None] = [None]

    def rec(v, covered, total):
        while v < n and (covered >> v) & 1:
            v += 1
        if v >= n:
            if best[0] is None or total > best[0]:
                best[0] = total
            return
        for (w, wt) in adj[v]:
            if not (covered >> w) & 1:
                rec(v + 1, covered | (1 << v) | (1 << w), total + wt)

    rec(0, 0, 0)
    return best[0]


def verify_matching(n_graphs: int = 500, seed: int = 20240901) -> tuple[bool, str]:
    """Cardinality kernel vs exhaustive search on graphs up to 16 vertices."""
    rng = np.random.default_rng(seed)
    for trial in range(n_graphs):
        g = random_partitioned_graph(rng, max_vertices=16)
        m = maximum_matching(g)
        m.validate(g)
        want = brute_maximum_matching_size(g)
        if m.size != want:
            return False, f"trial {trial}: kernel size {m.size}, brute {want}"
    return True, f"{n_graphs} graphs, sizes agree with exhaustive search"


def verify_weighted_matching(n_graphs: int = 400, seed: int = 20240902) -> tuple[bool, str]:
    """Maximum-weight perfect matching vs exhaustive search up to 12 vertices."""
    rng = np.random.default_rng(seed)
    for trial in range(n_graphs):
        nv = int(rng.integers(2, 13))
        density = rng.uniform(0.15, 0.9)
        edges = tuple((i, j, int(rng.integers(0, 9)))
                      for i in range(nv) for j in range(i + 1, nv)
                      if rng.random() < density)
        wg = WeightedGraph(nv, edges)
        pm = max_weight_perfect_matching(wg)
        got = None if pm is None else wg.weight_of(pm)
        want = brute_max_weight_perfect(wg)
        if got != want:
            return False, f"trial {trial}: weight {got}, brute {want}"
    return True, f"{n_graphs} graphs, optimal weights agree with exhaustive search"


def verify_intervals(n_cases: int = 300, seed: int = 20240903,
                     cross_check_weighted: bool = True) -> tuple[bool, str]:
    """Interval-feasibility verdicts vs enumeration; both gadget routes."""
    rng = np.random.default_rng(seed)
    for trial in range(n_cases):
        g = random_partitioned_graph(rng, max_vertices=12)
        sizes = g.country_sizes
        lo = np.array([int(rng.integers(0, s + 1)) if s else 0 for s in sizes])
        hi = np.array([int(rng.integers(l, s + 1)) for l, s in zip(lo, sizes)])
        iv = IntervalConstraints(lo, hi)
        feasible = False
        for m in enumerate_maximum_matchings(g):
            s = matched_counts(g, m).counts
            if np.all(s >= lo) and np.all(s <= hi):
                feasible = True
                break
        routes = [("cardinality", interval_feasible_maximum_matching(g, iv))]
        if cross_check_weighted:
            routes.append(("weighted", interval_feasible_via_weighted(g, iv)))
        for name, res in routes:
            if (res is not None) != feasible:
                return False, f"trial {trial}: {name} verdict {res is not None}, brute {feasible}"
            if res is not None:
                res.validate(g)
                s = matched_counts(g, res).counts
                if res.size != maximum_matching_size(g) or np.any(s < lo) or np.any(s > hi):
                    return False, f"trial {trial}: {name} witness invalid"
    return True, f"{n_cases} interval queries agree with enumeration"


def verify_lexmin(n_cases: int = 200, seed: int = 20240904,
                  max_vertices: int = 14) -> tuple[bool, str]:
    """Greedy and bisection selectors vs enumeration over maximum matchings."""
    rng = np.random.default_rng(seed)
    for trial in range(n_cases):
        g = random_partitioned_graph(rng, max_vertices=max_vertices)
        kind = trial % 3
        if kind == 0:
            x = rng.uniform(-1.0, max(2.0, g.n_vertices / 2.0), g.n_countries)
        elif kind == 1:
            x = rng.integers(0, 2 * max(1, g.n_vertices // 2) + 1, g.n_countries) / 2.0
        else:
            x = rng.integers(-1, g.n_vertices + 1, g.n_countries).astype(float)
        best_vec = None
        best_d1 = None
        for m in enumerate_maximum_matchings(g):
            dv = deviation_vector(x, matched_counts(g, m))
            if best_vec is None or tuple(dv.sorted) < tuple(best_vec):
                best_vec = dv.sorted
            best_d1 = dv.sorted[0] if best_d1 is None else min(best_d1, dv.sorted[0])
        m1, d1 = min_d1_matching(g, x)
        if abs(d1 - best_d1) > 1e-12:
            return False, f"trial {trial}: d1 {d1} vs brute {best_d1}"
        for name, fn in (("greedy", lexmin_matching), ("bisect", lexmin_matching_bisect)):
            m2, dv = fn(g, x)
            if not np.allclose(dv.sorted, best_vec, atol=1e-12):
                return False, (f"trial {trial}: {name} vector {dv.sorted.tolist()} "
                               f"vs brute {np.asarray(best_vec).tolist()}")
            if m2.size != m1.size:
                return False, f"trial {trial}: {name} dropped cardinality"
    return True, f"{n_cases} targets, both selectors lexicographically minimal"


def verify_nucleolus(n_games: int = 100, samples: int = 10_000,
                     seed: int = 20240905, max_countries: int = 8) -> tuple[bool, str]:
    """Nucleolus is an imputation, sits in nonempty cores, and lexicographically
    dominates sampled imputations."""
    rng = np.random.default_rng(seed)
    for trial in range(n_games):
        g = random_partitioned_graph(rng, max_vertices=14,
                                     max_countries=max_countries)
        v = generate_game(g)
        nuc = nucleolus(v)
        singles = v.singleton_values()
        if np.any(nuc.x < singles - 1e-9):
            return False, f"trial {trial}: not individually rational"
        if abs(nuc.x.sum() - v.values[v.grand]) > 1e-9:
            return False, f"trial {trial}: not efficient"
        if core_nonempty(v) and min_excess(v, nuc) < -1e-9:
            return False, f"trial {trial}: outside a nonempty core"
        surp = v.values[v.grand] - singles.sum()
        if surp > 1e-12:
            w = rng.exponential(1.0, size=(samples, v.n))
            w /= w.sum(axis=1, keepdims=True)
            xs = singles[None, :] + w * surp
        else:
            xs = np.tile(singles, (samples, 1))
        masks = np.arange(1, (1 << v.n) - 1)
        ind = ((masks[:, None] >> np.arange(v.n)[None, :]) & 1).astype(float)
        sample_exc = np.sort(xs @ ind.T - v.values[masks][None, :], axis=1)
        nuc_exc = excess_vector(v, nuc)
        diff = sample_exc - nuc_exc[None, :]
        for row in range(samples):
            nz = np.flatnonzero(np.abs(diff[row]) > 1e-7)
            if len(nz) and diff[row][nz[0]] > 0:
                return False, f"trial {trial}: sample {row} lexicographically dominates"
    return True, f"{n_games} games x {samples} sampled imputations dominated"


def _fourier_motzkin_feasible(G: np.ndarray, h: np.ndarray, tol=1e-7) -> bool:
    """Feasibility of Gx <= h by eliminating variables one at a time."""
    G = G.astype(float).copy()
    h = h.astype(float).copy()
    n = G.shape[1]
    for col in range(n):
        pos = [i for i in range(len(G)) if G[i, col] > tol]
        neg = [i for i in range(len(G)) if G[i, col] < -tol]
        zero = [i for i in range(len(G)) if abs(G[i, col]) <= tol]
        rows = [G[i] / G[i, col] for i in pos]
        rhs = [h[i] / G[i, col] for i in pos]
        nrows = [G[i] / -G[i, col] for i in neg]
        nrhs = [h[i] / -G[i, col] for i in neg]
        new_G = [G[i] for i in zero]
        new_h = [h[i] for i in zero]
        for a, ha in zip(rows, rhs):
            for b, hb in zip(nrows, nrhs):
                new_G.append(a + b)
                new_h.append(ha + hb)
        if not new_G:
            return True
        G = np.array(new_G)
        h = np.array(new_h)
        G[:, col] = 0.0
    return bool(np.all(h >= -tol * np.maximum(1.0, np.abs(h))))


def verify_lp(n_cases: int = 300, seed: int = 20240906) -> tuple[bool, str]:
    """solve_lp vs vertex enumeration (values) and Fourier-Motzkin (verdicts)."""
    rng = np.random.default_rng(seed)

    def vertices(A, b):
        m, n = A.shape
        out = []
        for rows in itertools.combinations(range(m), n):
            sub = A[list(rows)]
            if abs(np.linalg.det(sub)) < 1e-10:
                continue
            x = np.linalg.solve(sub, b[list(rows)])
            if np.all(A @ x <= b + 1e-8):
                out.append(x)
        return out

    for trial in range(n_cases):
        n = int(rng.integers(1, 5))
        m = int(rng.integers(1, 9 - n))
        A = rng.integers(-4, 5, size=(m, n)).astype(float)
        b = rng.integers(-4, 6, size=m).astype(float)
        c = rng.integers(-4, 5, size=n).astype(float)
        senses = [("<=", "=", ">=")[int(rng.integers(3))] for _ in range(m)]
        maximize = bool(rng.integers(2))
        rows = []
        for i, s in enumerate(senses):
            if s in ("<=", "="):
                rows.append((A[i], b[i]))
            if s in (">=", "="):
                rows.append((-A[i], -b[i]))
        G = np.array([r[0] for r in rows])
        hh = np.array([r[1] for r in rows])
        f = c if maximize else -c
        fm_feasible = _fourier_motzkin_feasible(G, hh)
        res = solve_lp(LinearProgram(c=c, A=A, senses=senses, b=b, maximize=maximize))
        if fm_feasible != (not isinstance(res, LpInfeasible)):
            return False, f"trial {trial}: FM feasible={fm_feasible}, solver {type(res).__name__}"
        if not fm_feasible:
            continue
        BIG = 1e4
        Gb = np.vstack([G, np.eye(n), -np.eye(n)])
        hb = np.concatenate([hh, np.full(2 * n, BIG)])
        verts = vertices(Gb, hb)
        Gr = np.vstack([G, np.eye(n), -np.eye(n)])
        hr = np.concatenate([np.zeros(len(G)), np.ones(2 * n)])
        ray_best = max(f @ v for v in vertices(Gr, hr))
        if ray_best > 1e-9:
            if not isinstance(res, LpUnbounded):
                return False, f"trial {trial}: should be unbounded, got {type(res).__name__}"
        else:
            best = max(f @ v for v in verts)
            want = best if maximize else -best
            if not (isinstance(res, LpOptimal) and abs(res.value - want) < 1e-8 * max(1, abs(want))):
                return False, f"trial {trial}: value {getattr(res, 'value', res)} vs oracle {want}"
    return True, f"{n_cases} LPs agree with vertex enumeration and Fourier-Motzkin"


def verify_shapley(n_games: int = 60, seed: int = 20240907) -> tuple[bool, str]:
    """Subset-pass Shapley vs the permutation-average definition."""
    rng = np.random.default_rng(seed)
    for trial in range(n_games):
        g = random_partitioned_graph(rng, max_vertices=10, max_countries=5)
        v = generate_game(g)
        phi = shapley(v)
        want = np.zeros(v.n)
        for perm in itertools.permutations(range(v.n)):
            mask = 0
            for p in perm:
                want[p] += v.values[mask | (1 << p)] - v.values[mask]
                mask |= 1 << p
        want /= math.factorial(v.n)
        if not np.allclose(phi.x, want, atol=1e-9):
            return False, f"trial {trial}: {phi.x} vs permutation oracle {want}"
    return True, f"{n_games} games agree with the permutation definition"


LEVELS = {
    "small": {
        "matching": 120, "weighted": 100, "intervals": 80, "lexmin": 60,
        "nucleolus": 20, "samples": 2000, "lp": 100, "shapley": 15,
    },
    "full": {
        "matching": 500, "weighted": 400, "intervals": 300, "lexmin": 200,
        "nucleolus": 100, "samples": 10000, "lp": 300, "shapley": 40,
    },
}


def run_verification(level: str = "small", log=print) -> bool:
    if level not in LEVELS:
        raise ValueError(f"unknown verification level {level!r}")
    sizes = LEVELS[level]
    checks = [
        ("maximum matching", lambda: verify_matching(sizes["matching"])),
        ("weighted perfect matching", lambda: verify_weighted_matching(sizes["weighted"])),
        ("interval feasibility", lambda: verify_intervals(sizes["intervals"])),
        ("lexmin selectors", lambda: verify_lexmin(sizes["lexmin"])),
        ("nucleolus", lambda: verify_nucleolus(sizes["nucleolus"], sizes["samples"])),
        ("linear programming", lambda: verify_lp(sizes["lp"])),
        ("shapley", lambda: verify_shapley(sizes["shapley"])),
    ]
    all_ok = True
    for name, fn in checks:
        ok, msg = fn()
        log(f"[{'PASS' if ok else 'FAIL'}] {name}: {msg}")
        all_ok &= ok
    return all_ok
