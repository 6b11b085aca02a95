"""Compatibility graphs, country partitions, matchings, and matched-count bookkeeping.

A pool of patient-donor pairs is an undirected graph: vertices are pairs, an
edge means a mutual two-way exchange is feasible.  Vertices carry a country
index (the partition every game-theoretic quantity is built on) and the round
in which the pair enters the pool.  Graphs are immutable after construction.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

BLOOD_TYPES = ("O", "A", "B", "AB")
PRA_CLASSES = ("low", "medium", "high")


class GraphError(ValueError):
    """Raised on malformed graphs, matchings, or instance files."""


@dataclass(frozen=True)
class Vertex:
    """One patient-donor pair: identity, owning country, and generator metadata.

    Blood types and the PRA class are optional; ingested instances may omit
    them because the matching and balancing layers only need topology.
    """

    id: int
    country: int
    arrival_round: int = 1
    donor_blood: str | None = None
    patient_blood: str | None = None
    pra: str | None = None

    def __post_init__(self):
        if self.id < 0:
            raise GraphError(f"vertex id must be >= 0, got {self.id}")
        if self.country < 0:
            raise GraphError(f"country must be >= 0, got {self.country}")
        if self.arrival_round < 1:
            raise GraphError(f"arrival_round must be >= 1, got {self.arrival_round}")
        for field, allowed in (
            (self.donor_blood, BLOOD_TYPES),
            (self.patient_blood, BLOOD_TYPES),
            (self.pra, PRA_CLASSES),
        ):
            if field is not None and field not in allowed:
                raise GraphError(f"invalid value {field!r}, expected one of {allowed}")


class CompatibilityGraph:
    """Undirected compatibility graph with an n-way country partition.

    Vertex ids are preserved across induced subgraphs (they need not be
    dense); positional CSR adjacency is kept internally for the matching
    kernels.  Instances are immutable and safe for concurrent reads.
    """

    def __init__(self, vertices: Sequence[Vertex], edges: Iterable[tuple[int, int]],
                 n_countries: int):
        if n_countries < 1:
            raise GraphError("n_countries must be >= 1")
        verts = sorted(vertices, key=lambda v: v.id)
        ids = [v.id for v in verts]
        if len(set(ids)) != len(ids):
            raise GraphError("duplicate vertex ids")
        for v in verts:
            if v.country >= n_countries:
                raise GraphError(f"vertex {v.id} has country {v.country} >= n_countries")
        self.vertices: tuple[Vertex, ...] = tuple(verts)
        self.n_countries = n_countries
        self._pos = {v.id: i for i, v in enumerate(verts)}

        norm: set[tuple[int, int]] = set()
        for u, w in edges:
            if u == w:
                raise GraphError(f"self-loop at vertex {u}")
            if u not in self._pos or w not in self._pos:
                raise GraphError(f"edge ({u}, {w}) references unknown vertex")
            norm.add((u, w) if u < w else (w, u))
        self.edges: frozenset[tuple[int, int]] = frozenset(norm)

        n = len(verts)
        self.country = np.fromiter((v.country for v in verts), dtype=np.int64, count=n)
        self.country_sizes = np.bincount(self.country, minlength=n_countries).astype(np.int64)
        deg = np.zeros(n, dtype=np.int64)
        for u, w in norm:
            deg[self._pos[u]] += 1
            deg[self._pos[w]] += 1
        self.indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(deg, out=self.indptr[1:])
        self.indices = np.zeros(self.indptr[-1], dtype=np.int64)
        fill = self.indptr[:-1].copy()
        for u, w in sorted(norm):
            pu, pw = self._pos[u], self._pos[w]
            self.indices[fill[pu]] = pw
            fill[pu] += 1
            self.indices[fill[pw]] = pu
            fill[pw] += 1
        # neighbour lists sorted by position for deterministic traversal
        for i in range(n):
            lo, hi = self.indptr[i], self.indptr[i + 1]
            self.indices[lo:hi] = np.sort(self.indices[lo:hi])

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def vertex_ids(self) -> list[int]:
        return [v.id for v in self.vertices]

    def position(self, vertex_id: int) -> int:
        return self._pos[vertex_id]

    def vertex(self, vertex_id: int) -> Vertex:
        return self.vertices[self._pos[vertex_id]]

    def has_edge(self, u: int, w: int) -> bool:
        return ((u, w) if u < w else (w, u)) in self.edges

    def __repr__(self):
        return (f"CompatibilityGraph(|V|={self.n_vertices}, |E|={len(self.edges)}, "
                f"n_countries={self.n_countries})")


@dataclass(frozen=True)
class Matching:
    """A set of pairwise vertex-disjoint edges, stored as sorted id pairs."""

    edges: frozenset[tuple[int, int]]

    @staticmethod
    def from_pairs(pairs: Iterable[tuple[int, int]]) -> "Matching":
        norm = set()
        seen: set[int] = set()
        for u, w in pairs:
            if u == w:
                raise GraphError(f"matching edge ({u}, {w}) is a self-loop")
            if u in seen or w in seen:
                raise GraphError("matching edges share a vertex")
            seen.add(u)
            seen.add(w)
            norm.add((u, w) if u < w else (w, u))
        return Matching(frozenset(norm))

    @property
    def size(self) -> int:
        return len(self.edges)

    def covered_ids(self) -> set[int]:
        out: set[int] = set()
        for u, w in self.edges:
            out.add(u)
            out.add(w)
        return out

    def validate(self, g: CompatibilityGraph) -> None:
        seen: set[int] = set()
        for u, w in self.edges:
            if u not in g._pos or w not in g._pos:
                raise GraphError(f"matching edge ({u}, {w}) references unknown vertex")
            if not g.has_edge(u, w):
                raise GraphError(f"matching edge ({u}, {w}) not present in graph")
            if u in seen or w in seen:
                raise GraphError("matching edges share a vertex")
            seen.add(u)
            seen.add(w)


@dataclass(frozen=True)
class MatchedCounts:
    """Per-country counts of matched vertices; entries sum to 2|M|."""

    counts: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "counts", np.asarray(self.counts, dtype=np.int64))

    def __getitem__(self, p: int) -> int:
        return int(self.counts[p])

    def __len__(self) -> int:
        return len(self.counts)

    def total(self) -> int:
        return int(self.counts.sum())


def induced_subgraph(g: CompatibilityGraph, coalition: Iterable[int]) -> CompatibilityGraph:
    """Subgraph on the vertices of the given countries, ids preserved.

    An empty coalition yields the empty graph; the full country set yields a
    graph equal to ``g``.
    """
    coal = set(coalition)
    for p in coal:
        if not 0 <= p < g.n_countries:
            raise GraphError(f"country {p} outside 0..{g.n_countries - 1}")
    keep = [v for v in g.vertices if v.country in coal]
    keep_ids = {v.id for v in keep}
    edges = [(u, w) for (u, w) in g.edges if u in keep_ids and w in keep_ids]
    return CompatibilityGraph(keep, edges, g.n_countries)


def matched_counts(g: CompatibilityGraph, m: Matching) -> MatchedCounts:
    """Count matched vertices per country: counts[p] = |{v in V_p matched by m}|."""
    m.validate(g)
    counts = np.zeros(g.n_countries, dtype=np.int64)
    for u, w in m.edges:
        counts[g.vertex(u).country] += 1
        counts[g.vertex(w).country] += 1
    return MatchedCounts(counts)


def graph_to_dict(g: CompatibilityGraph) -> dict:
    verts = []
    for v in g.vertices:
        d = {"id": v.id, "country": v.country, "arrival_round": v.arrival_round}
        if v.donor_blood is not None:
            d["donor_blood"] = v.donor_blood
        if v.patient_blood is not None:
            d["patient_blood"] = v.patient_blood
        if v.pra is not None:
            d["pra"] = v.pra
        verts.append(d)
    return {
        "n_countries": g.n_countries,
        "vertices": verts,
        "edges": [list(e) for e in sorted(g.edges)],
    }


def graph_from_dict(data: Mapping) -> CompatibilityGraph:
    try:
        n_countries = int(data["n_countries"])
        raw_vertices = data["vertices"]
        raw_edges = data["edges"]
    except KeyError as exc:
        raise GraphError(f"instance file missing key {exc}") from exc
    vertices = []
    for d in raw_vertices:
        vertices.append(Vertex(
            id=int(d["id"]),
            country=int(d["country"]),
            arrival_round=int(d.get("arrival_round", 1)),
            donor_blood=d.get("donor_blood"),
            patient_blood=d.get("patient_blood"),
            pra=d.get("pra"),
        ))
    ids = sorted(v.id for v in vertices)
    if ids != list(range(len(vertices))):
        raise GraphError("instance file ids must be 0..|V|-1")
    edges = [(int(e[0]), int(e[1])) for e in raw_edges]
    return CompatibilityGraph(vertices, edges, n_countries)


def save_graph(g: CompatibilityGraph, path) -> None:
    with open(path, "w") as fh:
        json.dump(graph_to_dict(g), fh)


def load_graph(path) -> CompatibilityGraph:
    with open(path) as fh:
        return graph_from_dict(json.load(fh))
