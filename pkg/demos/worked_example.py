"""Two rounds of an international exchange, played out by hand.

Three countries pool their patient-donor pairs.  Round 1 is a path of four
pairs whose maximum matching is forced, so every solution concept agrees on
what happens; the interesting part is the credit it leaves behind.  Round 2
has two maximum matchings, and the credits decide which one the programme
picks.
"""
import numpy as np

from ikepsim.fixtures import two_round_example
from ikepsim.simulator import run_instance


def show(vec):
    return "(" + ", ".join(f"{v:+.3f}" for v in vec) + ")"


def main():
    instance = two_round_example()
    print(__doc__)
    for concept in ("shapley", "nucleolus", "banzhaf", "tau",
                    "benefit", "contribution"):
        rep = run_instance(instance, concept, "lexmin_c", rounds=2)
        r1, r2 = rep.rounds
        print(f"--- initial allocations from the {concept} value ---")
        print(f"round 1: target x1 = {show(r1.x)}; matched s1 = {show(r1.s)}")
        print(f"round 2: credits c2 = {show(r2.c)} shift y2 = {show(r2.y)}")
        print(f"         target  x2 = {show(r2.x)}")
        print(f"         chosen matching {sorted(r2.matching_edges)} "
              f"with s2 = {show(r2.s)}")
        print(f"         next credits   {show(r2.x - r2.s)}")
        print()


if __name__ == "__main__":
    main()
