"""Maximum matchings, interval-constrained maximum matchings, and oracles.

The interval query ("is there a maximum matching whose per-country matched
counts fall in given boxes?") is answered by a dummy-vertex reduction to one
perfect-matching test, solved with the cardinality kernel:

* country p gets ``|V_p| - u_p`` forced dummies joined to all of V_p (these
  must absorb unmatched vertices, capping the matched count at u_p),
* country p gets ``u_p - l_p`` free dummies joined to all of V_p,
* a global pool of ``2*mu - sum(l)`` wildcard dummies joined to every free
  dummy soaks up exactly the slack between the floors and a maximum matching.

The gadget has a perfect matching iff some maximum matching of the original
graph satisfies every interval, and its real edges are such a matching.  A
second reduction via maximum-weight perfect matching (weight 1 on real edges,
0 on dummy edges, a global free-dummy clique plus a parity pad) is kept as an
independent cross-check route.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .graph import CompatibilityGraph, GraphError, Matching, matched_counts
from .weighted_matching import max_weight_matching

ENUMERATION_CAP = 16


class MatchingError(ValueError):
    """Raised on malformed interval constraints or oversized oracle inputs."""


@dataclass(frozen=True)
class IntervalConstraints:
    """Per-country closed bounds [lower_p, upper_p] on matched counts."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lower", np.asarray(self.lower, dtype=np.int64))
        object.__setattr__(self, "upper", np.asarray(self.upper, dtype=np.int64))
        if self.lower.shape != self.upper.shape:
            raise MatchingError("interval bounds must have equal length")
        if np.any(self.lower > self.upper):
            raise MatchingError("malformed intervals: lower > upper")

    def validate_for(self, g: CompatibilityGraph) -> None:
        if len(self.lower) != g.n_countries:
            raise MatchingError("interval count does not match n_countries")
        if np.any(self.lower < 0) or np.any(self.upper > g.country_sizes):
            raise MatchingError("intervals must lie within [0, |V_p|]")


@dataclass(frozen=True)
class WeightedGraph:
    """Simple graph with non-negative integer edge weights (gadget plumbing)."""

    n_vertices: int
    edges: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        seen = set()
        for (u, v, w) in self.edges:
            if u == v or not (0 <= u < self.n_vertices) or not (0 <= v < self.n_vertices):
                raise MatchingError(f"bad edge ({u}, {v})")
            if w < 0 or int(w) != w:
                raise MatchingError("weights must be non-negative integers")
            key = (u, v) if u < v else (v, u)
            if key in seen:
                raise MatchingError(f"duplicate edge ({u}, {v})")
            seen.add(key)

    def weight_of(self, m: Matching) -> int:
        table = {}
        for (u, v, w) in self.edges:
            table[(u, v) if u < v else (v, u)] = w
        return sum(table[e] for e in m.edges)


def _mate_to_matching(g: CompatibilityGraph, mate: np.ndarray) -> Matching:
    ids = g.vertex_ids
    pairs = []
    for i in range(len(mate)):
        j = mate[i]
        if j > i:
            pairs.append((ids[i], ids[int(j)]))
    return Matching.from_pairs(pairs)


def maximum_matching(g: CompatibilityGraph) -> Matching:
    """Deterministic maximum-cardinality matching (lowest-id augmentation)."""
    mate = np.full(g.n_vertices, -1, dtype=np.int64)
    _kernels.max_matching(g.indptr, g.indices, mate)
    return _mate_to_matching(g, mate)


def maximum_matching_size(g: CompatibilityGraph) -> int:
    mate = np.full(g.n_vertices, -1, dtype=np.int64)
    return int(_kernels.max_matching(g.indptr, g.indices, mate))


def _csr_from_pairs(n: int, us: np.ndarray, vs: np.ndarray):
    src = np.concatenate([us, vs])
    dst = np.concatenate([vs, us])
    order = np.lexsort((dst, src))
    src = src[order]
    dst = dst[order]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
    return indptr, dst.astype(np.int64)


def interval_feasible_maximum_matching(
        g: CompatibilityGraph, iv: IntervalConstraints) -> Matching | None:
    """Maximum matching with every matched count inside its interval, or None.

    Maximum cardinality is computed internally and never sacrificed: the
    result (when not None) always has size mu(g).
    """
    iv.validate_for(g)
    n = g.n_vertices
    lower = iv.lower
    upper = iv.upper
    sizes = g.country_sizes

    mate = np.full(n, -1, dtype=np.int64)
    mu = int(_kernels.max_matching(g.indptr, g.indices, mate))
    counts = np.zeros(g.n_countries, dtype=np.int64)
    for i in range(n):
        if mate[i] >= 0:
            counts[g.country[i]] += 1
    if np.all(counts >= lower) and np.all(counts <= upper):
        return _mate_to_matching(g, mate)

    wildcards = 2 * mu - int(lower.sum())
    free_total = int((upper - lower).sum())
    if wildcards < 0 or wildcards > free_total:
        return None

    forced = sizes - upper
    free = upper - lower
    n_total = n + int(forced.sum()) + free_total + wildcards

    us = [np.fromiter((g.position(u) for (u, _) in sorted(g.edges)),
                      dtype=np.int64, count=len(g.edges))]
    vs = [np.fromiter((g.position(v) for (_, v) in sorted(g.edges)),
                      dtype=np.int64, count=len(g.edges))]
    positions_by_country = [
        np.flatnonzero(g.country == p) for p in range(g.n_countries)
    ]
    nxt = n
    free_ids = []
    for p in range(g.n_countries):
        members = positions_by_country[p]
        for _ in range(int(forced[p])):
            us.append(np.full(len(members), nxt, dtype=np.int64))
            vs.append(members)
            nxt += 1
        for _ in range(int(free[p])):
            us.append(np.full(len(members), nxt, dtype=np.int64))
            vs.append(members)
            free_ids.append(nxt)
            nxt += 1
    free_arr = np.asarray(free_ids, dtype=np.int64)
    for _ in range(wildcards):
        us.append(np.full(len(free_arr), nxt, dtype=np.int64))
        vs.append(free_arr)
        nxt += 1
    assert nxt == n_total and n_total % 2 == 0

    indptr, indices = _csr_from_pairs(n_total, np.concatenate(us), np.concatenate(vs))
    gmate = np.full(n_total, -1, dtype=np.int64)
    gmate[:n] = mate  # warm start from the unconstrained maximum matching
    size = int(_kernels.max_matching(indptr, indices, gmate))
    if 2 * size != n_total:
        return None
    pairs = []
    ids = g.vertex_ids
    for i in range(n):
        j = int(gmate[i])
        if j > i and j < n:
            pairs.append((ids[i], ids[j]))
    result = Matching.from_pairs(pairs)
    assert result.size == mu
    return result


def max_weight_perfect_matching(wg: WeightedGraph) -> Matching | None:
    """Perfect matching of maximum total weight, or None if none exists."""
    if wg.n_vertices % 2 == 1:
        return None
    mate = max_weight_matching(wg.n_vertices, list(wg.edges), cardinality_first=True)
    if any(m == -1 for m in mate):
        return None
    return Matching.from_pairs((i, mate[i]) for i in range(wg.n_vertices) if mate[i] > i)


def interval_gadget_weighted(g: CompatibilityGraph,
                             iv: IntervalConstraints) -> WeightedGraph:
    """Weighted-perfect-matching form of the interval query (cross-check route).

    Real edges get weight 1, dummy edges weight 0.  Forced dummies attach to
    their country; free dummies additionally form one global clique, padded
    by one extra vertex when the total vertex count would be odd.  A maximum
    weight perfect matching has weight mu(g) iff the query is feasible.
    """
    iv.validate_for(g)
    n = g.n_vertices
    edges: list[tuple[int, int, int]] = [
        (g.position(u), g.position(v), 1) for (u, v) in sorted(g.edges)
    ]
    positions_by_country = [
        np.flatnonzero(g.country == p) for p in range(g.n_countries)
    ]
    nxt = n
    free_ids: list[int] = []
    for p in range(g.n_countries):
        members = positions_by_country[p]
        for _ in range(int(g.country_sizes[p] - iv.upper[p])):
            edges.extend((nxt, int(m), 0) for m in members)
            nxt += 1
        for _ in range(int(iv.upper[p] - iv.lower[p])):
            edges.extend((nxt, int(m), 0) for m in members)
            free_ids.append(nxt)
            nxt += 1
    if (n + (nxt - n)) % 2 == 1:
        free_ids.append(nxt)  # parity pad lives inside the clique
        nxt += 1
    for a in range(len(free_ids)):
        for b in range(a + 1, len(free_ids)):
            edges.append((free_ids[a], free_ids[b], 0))
    return WeightedGraph(nxt, tuple(edges))


def interval_feasible_via_weighted(
        g: CompatibilityGraph, iv: IntervalConstraints) -> Matching | None:
    """Interval query answered through the weighted gadget (slow, exact)."""
    iv.validate_for(g)
    mu = maximum_matching_size(g)
    wg = interval_gadget_weighted(g, iv)
    pm = max_weight_perfect_matching(wg)
    if pm is None or wg.weight_of(pm) != mu:
        return None
    ids = g.vertex_ids
    n = g.n_vertices
    pairs = [(ids[u], ids[v]) for (u, v) in pm.edges if u < n and v < n]
    return Matching.from_pairs(pairs)


def enumerate_maximum_matchings(g: CompatibilityGraph,
                                cap: int = ENUMERATION_CAP) -> list[Matching]:
    """All maximum matchings, canonically ordered (exhaustive; testing oracle)."""
    if g.n_vertices > cap:
        raise MatchingError(
            f"graph has {g.n_vertices} vertices, enumeration capped at {cap}")
    mu = maximum_matching_size(g)
    n = g.n_vertices
    adj = [[] for _ in range(n)]
    for (u, v) in g.edges:
        pu, pv = g.position(u), g.position(v)
        adj[pu].append(pv)
        adj[pv].append(pu)
    for lst in adj:
        lst.sort()

    results: list[tuple[tuple[int, int], ...]] = []
    covered = [False] * n
    chosen: list[tuple[int, int]] = []

    def recurse(lowest: int, size: int):
        while lowest < n and covered[lowest]:
            lowest += 1
        remaining = n - lowest
        if size + remaining // 2 < mu:
            return
        if lowest >= n:
            if size == mu:
                results.append(tuple(sorted(chosen)))
            return
        v = lowest
        covered[v] = True
        for w in adj[v]:
            if not covered[w]:
                covered[w] = True
                chosen.append((v, w) if v < w else (w, v))
                recurse(lowest + 1, size + 1)
                chosen.pop()
                covered[w] = False
        recurse(lowest + 1, size)  # leave v exposed
        covered[v] = False

    recurse(0, 0)
    ids = g.vertex_ids
    out = sorted(set(results))
    return [Matching.from_pairs((ids[u], ids[v]) for (u, v) in m) for m in out]
