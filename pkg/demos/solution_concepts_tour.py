"""A tour of the six allocation concepts on small hand-built games.

Shows the game tables, which concepts exist where, and the structural
predicates (essential, convex, quasibalanced, core nonempty) driving them.
"""
import numpy as np

from ikepsim.concepts import (
    banzhaf,
    benefit,
    contribution,
    core_nonempty,
    excess_vector,
    min_excess,
    nucleolus,
    shapley,
    tau,
)
from ikepsim.fixtures import four_cycle_example, triangle_example, two_round_example
from ikepsim.games import generate_game, is_convex, is_essential, is_quasibalanced
from ikepsim.simulator import round_graph


def describe(name, g):
    v = generate_game(g)
    print(f"=== {name}: |V|={g.n_vertices}, countries={g.n_countries}, "
          f"v(N)={v.value(v.grand):g} ===")
    quasi, prof = is_quasibalanced(v)
    print(f"essential={is_essential(v)}  convex={is_convex(v)}  "
          f"quasibalanced={quasi}  core_nonempty={core_nonempty(v)}")
    print(f"minimal rights a = {prof.a},  utopia b = {prof.b}")
    rows = [("shapley", shapley(v)), ("nucleolus", nucleolus(v)),
            ("banzhaf", banzhaf(v).normalized), ("tau", tau(v)),
            ("benefit", benefit(v)), ("contribution", contribution(v))]
    for label, alloc in rows:
        if alloc is None:
            print(f"  {label:>12}: does not exist for this game")
        else:
            body = ", ".join(f"{x:.4f}" for x in alloc.x)
            print(f"  {label:>12}: ({body})")
    nuc = nucleolus(v)
    print(f"  nucleolus min excess: {min_excess(v, nuc):+.4f}; "
          f"excess vector {np.round(excess_vector(v, nuc), 4)}")
    print()


def main():
    instance = two_round_example()
    pool1 = {v.id for v in instance.vertices if v.arrival_round == 1}
    pool2 = {v.id for v in instance.vertices if v.arrival_round == 2}
    describe("four-pair path", round_graph(instance, pool1))
    describe("two-option star", round_graph(instance, pool2))
    describe("triangle (nothing exists)", triangle_example())
    describe("four-cycle (tau = benefit despite non-convexity)",
             four_cycle_example())


if __name__ == "__main__":
    main()
