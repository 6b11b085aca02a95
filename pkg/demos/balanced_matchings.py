"""How matching selection reacts to a target allocation.

On a small pool with several maximum matchings, compare the canonical
(arbitrary) choice, the one minimizing the largest country deviation, and
the lexicographically minimal one, for a few targets.  Also pokes the
interval-feasibility primitive that powers both selectors.
"""
import numpy as np

from ikepsim.balancing import (
    arbitrary_maximum_matching,
    deviation_vector,
    lexmin_matching,
    min_d1_matching,
)
from ikepsim.graph import CompatibilityGraph, Vertex, matched_counts
from ikepsim.matching import (
    IntervalConstraints,
    enumerate_maximum_matchings,
    interval_feasible_maximum_matching,
)


def build_pool():
    # two disjoint three-pair chains: country 1 bridges countries 0 and 2,
    # so each chain must choose which side receives its transplants
    verts = [Vertex(0, 0), Vertex(1, 1), Vertex(2, 2),
             Vertex(3, 0), Vertex(4, 1), Vertex(5, 2)]
    edges = [(0, 1), (1, 2), (3, 4), (4, 5)]
    return CompatibilityGraph(verts, edges, 3)


def main():
    g = build_pool()
    print(f"pool: {g.n_vertices} pairs, {len(g.edges)} mutual edges")
    mms = enumerate_maximum_matchings(g)
    print(f"{len(mms)} maximum matchings, size {mms[0].size}:")
    for m in mms:
        print("   ", sorted(m.edges), "-> counts",
              matched_counts(g, m).counts)
    print()

    for x in (np.array([1.0, 2.0, 1.0]), np.array([2.0, 2.0, 0.0]),
              np.array([0.3, 1.9, 1.4])):
        print(f"target x = {x}")
        m = arbitrary_maximum_matching(g)
        print("  arbitrary:", sorted(m.edges), "deviations",
              deviation_vector(x, matched_counts(g, m)).sorted)
        m, d1 = min_d1_matching(g, x)
        print(f"  min d1  : {sorted(m.edges)} with d1 = {d1:g}")
        m, dv = lexmin_matching(g, x)
        print(f"  lexmin  : {sorted(m.edges)} sorted deviations {dv.sorted}")
        print()

    print("interval queries (maximum size is never sacrificed):")
    for lo, hi in (([1, 2, 1], [1, 2, 1]), ([2, 2, 2], [2, 2, 2]),
                   ([0, 0, 2], [2, 2, 2])):
        iv = IntervalConstraints(lo, hi)
        m = interval_feasible_maximum_matching(g, iv)
        verdict = "infeasible" if m is None else \
            f"{sorted(m.edges)} counts {matched_counts(g, m).counts}"
        print(f"  s in [{lo}..{hi}] -> {verdict}")


if __name__ == "__main__":
    main()
