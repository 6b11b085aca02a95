"""A miniature version of the full evaluation pipeline.

Generates a handful of pooled instances, runs every concept under the five
scenarios, and prints the balancedness table: how far the realized
transplant counts land from the targets, scenario by scenario.  Writes the
aggregate CSV and an SVG chart next to this script.  Takes about a minute.
"""
import time
from pathlib import Path

import numpy as np

from ikepsim.reporting import aggregate, emit_csv, render_line_chart
from ikepsim.simulator import SimulationConfig, run_batch

CONCEPTS = ("shapley", "nucleolus", "banzhaf", "tau", "benefit", "contribution")
SCENARIOS = ("arbitrary", "d1", "d1_c", "lexmin", "lexmin_c")


def main(out_dir=None):
    out = Path(out_dir) if out_dir else Path(__file__).resolve().parent
    cfg = SimulationConfig(
        master_seed=20260809, settings=("equal",), n_countries=(4, 6, 8),
        pool_size=200, rounds=24, instances=5,
        concepts=CONCEPTS, scenarios=SCENARIOS)
    t0 = time.time()
    reports = run_batch(cfg)
    agg = aggregate(reports)
    print(f"{len(reports)} instance reports in {time.time() - t0:.0f}s\n")

    print("average total relative deviation (percent of transplants)")
    header = "concept/scenario".ljust(24) + "".join(
        f"n={n}".rjust(9) for n in cfg.n_countries)
    print(header)
    for concept in CONCEPTS:
        for scenario in SCENARIOS:
            row = f"{concept} {scenario}".ljust(24)
            for n in cfg.n_countries:
                trd = agg.metric("equal", concept, scenario, n,
                                 "total_relative_deviation")
                row += f"{100 * trd:8.2f}%"
            print(row)
        print()

    print("gain over lexmin_c vs d1_c (relative improvement)")
    for n in cfg.n_countries:
        imps = [agg.relative_improvement("equal", c, n) for c in CONCEPTS]
        print(f"  n={n}: mean {100 * float(np.mean(imps)):.1f}%  "
              + "  ".join(f"{c}={100 * i:.0f}%" for c, i in zip(CONCEPTS, imps)))

    emit_csv(agg, out / "desk_study.csv")
    series = {}
    for concept in CONCEPTS:
        xs, ys = [], []
        for n in cfg.n_countries:
            xs.append(float(n))
            ys.append(agg.metric("equal", concept, "lexmin_c", n,
                                 "total_relative_deviation"))
        series[concept] = (xs, ys)
    render_line_chart(series, "lexmin+credits: deviation vs country count",
                      out / "desk_study.svg")
    print(f"\nwrote {out / 'desk_study.csv'} and {out / 'desk_study.svg'}")


if __name__ == "__main__":
    main()
