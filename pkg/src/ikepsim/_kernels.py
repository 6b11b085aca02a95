"""Compiled matching kernels.

Augmenting-path maximum matching with odd-cycle (blossom) contraction on CSR
adjacency, restricted to a coalition of countries given as a bitmask.  The
subset-lattice walk in :func:`game_table` warm-starts each coalition from its
parent's matching: a maximum matching of G[S] is a valid partial matching of
G[S + {c}], and every augmenting path search that fails for a root keeps
failing after later augmentations, so each exposed vertex is tried once.

All tie-breaking is by lowest vertex position (roots ascending, sorted
adjacency), which makes every result reproducible across runs.
"""
from __future__ import annotations

import numpy as np
from numba import njit

ONE = np.int64(1)


@njit(cache=True)
def _find_path(indptr, indices, country, mask, mate,
               parent, base, queue, used, blossom, lca_mark, root):
    """Search one augmenting path from ``root``; augment in place if found."""
    n = mate.shape[0]
    for i in range(n):
        parent[i] = -1
        base[i] = i
        used[i] = False
    used[root] = True
    qh = 0
    qt = 0
    queue[qt] = root
    qt += 1
    while qh < qt:
        v = queue[qh]
        qh += 1
        for ei in range(indptr[v], indptr[v + 1]):
            to = indices[ei]
            if (mask >> country[to]) & ONE == 0:
                continue
            if base[v] == base[to] or mate[v] == to:
                continue
            if to == root or (mate[to] != -1 and parent[mate[to]] != -1):
                # odd cycle met: contract the blossom at the common base
                for i in range(n):
                    lca_mark[i] = False
                a = v
                while True:
                    a = base[a]
                    lca_mark[a] = True
                    if mate[a] == -1:
                        break
                    a = parent[mate[a]]
                b = to
                curbase = -1
                while True:
                    b = base[b]
                    if lca_mark[b]:
                        curbase = b
                        break
                    b = parent[mate[b]]
                for i in range(n):
                    blossom[i] = False
                x = v
                child = to
                while base[x] != curbase:
                    blossom[base[x]] = True
                    blossom[base[mate[x]]] = True
                    parent[x] = child
                    child = mate[x]
                    x = parent[mate[x]]
                x = to
                child = v
                while base[x] != curbase:
                    blossom[base[x]] = True
                    blossom[base[mate[x]]] = True
                    parent[x] = child
                    child = mate[x]
                    x = parent[mate[x]]
                for i in range(n):
                    if blossom[base[i]]:
                        base[i] = curbase
                        if not used[i]:
                            used[i] = True
                            queue[qt] = i
                            qt += 1
            elif parent[to] == -1:
                parent[to] = v
                if mate[to] == -1:
                    # exposed vertex reached: flip the alternating path
                    x = to
                    while x != -1:
                        pv = parent[x]
                        nxt = mate[pv]
                        mate[x] = pv
                        mate[pv] = x
                        x = nxt
                    return True
                u = mate[to]
                used[u] = True
                queue[qt] = u
                qt += 1
    return False


@njit(cache=True)
def _max_matching_masked(indptr, indices, country, mask, mate,
                         parent, base, queue, used, blossom, lca_mark):
    """Grow ``mate`` to a maximum matching of the coalition-induced subgraph."""
    n = mate.shape[0]
    for root in range(n):
        if (mask >> country[root]) & ONE == 1 and mate[root] == -1:
            _find_path(indptr, indices, country, mask, mate,
                       parent, base, queue, used, blossom, lca_mark, root)
    size = 0
    for i in range(n):
        if mate[i] != -1:
            size += 1
    return size // 2


@njit(cache=True)
def max_matching(indptr, indices, mate):
    """Maximum matching of a plain graph; ``mate`` may carry a warm start."""
    n = mate.shape[0]
    country = np.zeros(n, dtype=np.int64)
    parent = np.empty(n, dtype=np.int64)
    base = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    used = np.zeros(n, dtype=np.bool_)
    blossom = np.zeros(n, dtype=np.bool_)
    lca_mark = np.zeros(n, dtype=np.bool_)
    return _max_matching_masked(indptr, indices, country, ONE, mate,
                                parent, base, queue, used, blossom, lca_mark)


@njit(cache=True)
def masked_matching(indptr, indices, country, mask, mate):
    """Maximum matching of the subgraph induced by the countries in ``mask``."""
    n = mate.shape[0]
    parent = np.empty(n, dtype=np.int64)
    base = np.empty(n, dtype=np.int64)
    queue = np.empty(n, dtype=np.int64)
    used = np.zeros(n, dtype=np.bool_)
    blossom = np.zeros(n, dtype=np.bool_)
    lca_mark = np.zeros(n, dtype=np.bool_)
    return _max_matching_masked(indptr, indices, country, mask, mate,
                                parent, base, queue, used, blossom, lca_mark)


@njit(cache=True)
def game_table(indptr, indices, country, n_countries):
    """Coalition value table: values[S] = maximum matching size of G[V(S)].

    Walks the subset lattice depth-first, adding one country below the
    current lowest set bit, so every coalition inherits its parent's matching
    and only pays for the marginal augmentations.
    """
    n_vertices = country.shape[0]
    values = np.zeros(ONE << n_countries, dtype=np.float64)
    mates = np.full((n_countries + 1, n_vertices), -1, dtype=np.int64)
    parent = np.empty(n_vertices, dtype=np.int64)
    base = np.empty(n_vertices, dtype=np.int64)
    queue = np.empty(n_vertices, dtype=np.int64)
    used = np.zeros(n_vertices, dtype=np.bool_)
    blossom = np.zeros(n_vertices, dtype=np.bool_)
    lca_mark = np.zeros(n_vertices, dtype=np.bool_)
    stack_mask = np.zeros(n_countries + 1, dtype=np.int64)
    stack_child = np.zeros(n_countries + 1, dtype=np.int64)
    depth = 0
    while depth >= 0:
        mask = stack_mask[depth]
        child = stack_child[depth]
        if mask == 0:
            limit = n_countries
        else:
            limit = 0
            while (mask >> limit) & ONE == 0:
                limit += 1
        if child >= limit:
            depth -= 1
            continue
        stack_child[depth] = child + 1
        child_mask = mask | (ONE << child)
        for i in range(n_vertices):
            mates[depth + 1, i] = mates[depth, i]
        size = _max_matching_masked(indptr, indices, country, child_mask,
                                    mates[depth + 1], parent, base, queue,
                                    used, blossom, lca_mark)
        values[child_mask] = size
        depth += 1
        stack_mask[depth] = child_mask
        stack_child[depth] = 0
    return values
