"""Command-line entry point: generate instances, run batches, report, verify.

Subcommands:
  generate   write simulation instances as JSON graph files
  run        run the configured batch and write instance reports (JSONL)
  report     aggregate instance reports into CSV / JSONL / markdown (+SVG)
  verify     run the randomized oracle suites
  demo       two-round worked example with the credit walkthrough printed

A single JSON config drives everything; command-line flags override or
filter it.  The same config and seed give byte-identical outputs regardless
of --parallel.
"""
from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from fractions import Fraction
from pathlib import Path

import numpy as np

from .fixtures import two_round_example
from .reporting import (
    AggregateReport,
    aggregate,
    emit,
    load_jsonl,
    render_line_chart,
)
from .simulator import (
    ConfigError,
    InstanceReport,
    SimulationConfig,
    generate_instance,
    no_cooperation_baseline,
    run_instance,
    run_instance_all_concepts,
    scenario_is_bar,
)
from .graph import save_graph
from .verify import run_verification


def _parse_list(text: str, cast=str) -> tuple:
    return tuple(cast(part) for part in text.split(",") if part)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ikepsim",
        description="International kidney exchange simulation")
    parser.add_argument("--config", type=Path, help="JSON simulation config")
    parser.add_argument("--out", type=Path, default=Path("out"),
                        help="output directory")
    parser.add_argument("--seed", type=int, help="override the master seed")
    parser.add_argument("--parallel", type=int, default=1,
                        help="instance-level worker processes")
    parser.add_argument("--setting", choices=("equal", "varying"),
                        help="restrict to one country-size setting")
    parser.add_argument("--n", type=str, help="comma list of country counts")
    parser.add_argument("--concepts", type=str, help="comma list of concepts")
    parser.add_argument("--scenarios", type=str, help="comma list of scenarios")
    parser.add_argument("--format", choices=("csv", "jsonl", "md"), default="csv",
                        help="report output format")
    parser.add_argument("--svg", action="store_true",
                        help="also render SVG line charts with `report`")
    parser.add_argument("command", choices=("generate", "run", "report",
                                            "verify", "demo"))
    parser.add_argument("arg", nargs="?",
                        help="verify level (small|full) or report input dir")
    return parser


def load_config(args) -> SimulationConfig:
    cfg = SimulationConfig.load(args.config) if args.config else SimulationConfig()
    updates = {}
    if args.seed is not None:
        updates["master_seed"] = args.seed
    if args.setting:
        if args.setting not in cfg.settings:
            raise ConfigError(f"--setting {args.setting} not in config settings")
        updates["settings"] = (args.setting,)
    if args.n:
        wanted = _parse_list(args.n, int)
        missing = [n for n in wanted if n not in cfg.n_countries]
        if missing:
            raise ConfigError(f"--n values {missing} not in config n_countries")
        updates["n_countries"] = wanted
    if args.concepts:
        wanted = _parse_list(args.concepts)
        missing = [c for c in wanted if c not in cfg.concepts]
        if missing:
            raise ConfigError(f"--concepts values {missing} not in config concepts")
        updates["concepts"] = wanted
    if args.scenarios:
        wanted = _parse_list(args.scenarios)
        missing = [s for s in wanted if s not in cfg.scenarios]
        if missing:
            raise ConfigError(f"--scenarios values {missing} not in config scenarios")
        updates["scenarios"] = wanted
    if updates:
        data = cfg.to_dict()
        data.update({k: list(v) if isinstance(v, tuple) else v
                     for k, v in updates.items()})
        cfg = SimulationConfig.from_dict(data)
    return cfg


def cmd_generate(cfg: SimulationConfig, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    count = 0
    for setting in cfg.settings:
        for n in cfg.n_countries:
            for index in range(cfg.instances):
                g = generate_instance(cfg, setting, n, index)
                path = out / f"instance_{setting}_n{n:02d}_{index:03d}.json"
                save_graph(g, path)
                count += 1
    print(f"wrote {count} instance files to {out}")
    return 0


def _instance_reports(cfg_dict: dict, setting: str, n: int, index: int) -> list[dict]:
    cfg = SimulationConfig.from_dict(cfg_dict)
    from .simulator import load_or_generate_instance

    instance = load_or_generate_instance(cfg, setting, n, index)
    _, base_total = no_cooperation_baseline(instance, cfg.rounds, cfg.max_wait_rounds)
    produced: list[InstanceReport] = []
    if "arbitrary" in cfg.scenarios:
        shared = run_instance_all_concepts(
            instance, cfg.concepts, cfg.rounds, cfg.max_wait_rounds,
            cfg.country_cap, setting, index)
        produced.extend(shared[c] for c in cfg.concepts)
    for scenario in cfg.scenarios:
        if scenario == "arbitrary":
            continue
        concepts = ["banzhaf"] if scenario_is_bar(scenario) else cfg.concepts
        for concept in concepts:
            if concept not in cfg.concepts:
                continue
            produced.append(run_instance(
                instance, concept, scenario, cfg.rounds, cfg.max_wait_rounds,
                cfg.country_cap, setting, index))
    for rep in produced:
        rep.no_coop_total = base_total
    return [rep.to_dict() for rep in produced]


def cmd_run(cfg: SimulationConfig, out: Path, parallel: int) -> int:
    out.mkdir(parents=True, exist_ok=True)
    tasks = [(setting, n, index)
             for setting in cfg.settings
             for n in cfg.n_countries
             for index in range(cfg.instances)]
    cfg_dict = cfg.to_dict()
    results: dict[tuple, list[dict]] = {}
    if parallel > 1:
        with ProcessPoolExecutor(max_workers=parallel) as pool:
            futures = {key: pool.submit(_instance_reports, cfg_dict, *key)
                       for key in tasks}
            for key, fut in futures.items():
                results[key] = fut.result()
    else:
        for key in tasks:
            results[key] = _instance_reports(cfg_dict, *key)
    report_path = out / "reports.jsonl"
    timing_rows = []
    with open(report_path, "w") as fh:
        for key in tasks:  # deterministic order independent of scheduling
            for rep in sorted(results[key],
                              key=lambda d: (d["scenario"], d["concept"])):
                for rec in rep["rounds"]:
                    t = rec.pop("timings", None)
                    if t is not None:
                        timing_rows.append((rep["setting"], rep["concept"],
                                            rep["scenario"], rep["n"], t))
                fh.write(json.dumps(rep, sort_keys=True) + "\n")
    with open(out / "config.json", "w") as fh:
        json.dump(cfg.to_dict(), fh, indent=2, sort_keys=True)
    _write_timings(timing_rows, out / "timings.csv")
    print(f"wrote {sum(len(v) for v in results.values())} reports to {report_path}")
    return 0


def _write_timings(rows, path) -> None:
    """Mean per-round wall-clock per task; profiling output, not reproducible."""
    import csv
    from collections import defaultdict

    sums: dict = defaultdict(lambda: defaultdict(float))
    counts: dict = defaultdict(int)
    for setting, concept, scenario, n, t in rows:
        key = (setting, concept, scenario, n)
        counts[key] += 1
        for task, value in t.items():
            sums[key][task] += value
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["setting", "concept", "scenario", "n", "task",
                         "mean_seconds", "rounds"])
        for key in sorted(sums):
            for task in sorted(sums[key]):
                writer.writerow([*key, task, sums[key][task] / counts[key],
                                 counts[key]])


def _load_reports(path: Path) -> list[InstanceReport]:
    reports = []
    with open(path) as fh:
        for line in fh:
            if line.strip():
                reports.append(InstanceReport.from_dict(json.loads(line)))
    return reports


def cmd_report(args, out: Path) -> int:
    source = Path(args.arg) if args.arg else out
    report_file = source / "reports.jsonl" if source.is_dir() else source
    if not report_file.exists():
        print(f"no reports found at {report_file}", file=sys.stderr)
        return 2
    reports = _load_reports(report_file)
    agg = aggregate(reports)
    out.mkdir(parents=True, exist_ok=True)
    suffix = {"csv": "csv", "jsonl": "jsonl", "md": "md"}[args.format]
    target = out / f"aggregate.{suffix}"
    emit(agg, args.format, target)
    print(f"wrote {target}")
    if args.svg:
        _render_charts(agg, out)
    return 0


def _render_charts(agg: AggregateReport, out: Path) -> None:
    settings = sorted({k[0] for k in agg.cells})
    for setting in settings:
        scenarios = sorted({k[2] for k in agg.cells if k[0] == setting})
        for scenario in scenarios:
            series = {}
            for (s, concept, sc, n), cell in sorted(agg.cells.items()):
                if s != setting or sc != scenario:
                    continue
                if "total_relative_deviation" not in cell.metrics:
                    continue
                xs, ys = series.setdefault(concept, ([], []))
                xs.append(float(n))
                ys.append(cell.metrics["total_relative_deviation"])
            if series:
                path = out / f"deviation_{setting}_{scenario}.svg"
                render_line_chart(series,
                                  f"avg total relative deviation, {setting}, {scenario}",
                                  path)
        series = {}
        for (s, concept, sc, n), cell in sorted(agg.cells.items()):
            if s != setting or not cell.credit_series_mean:
                continue
            label = f"{concept}/{sc}/n{n}"
            series[label] = (list(range(1, len(cell.credit_series_mean) + 1)),
                             cell.credit_series_mean)
        if series:
            render_line_chart(series, f"avg accumulated deviation, {setting}",
                              out / f"credits_{setting}.svg")
    print(f"wrote SVG charts to {out}")


def _fmt_vec(vec) -> str:
    return "(" + ", ".join(str(Fraction(float(v)).limit_denominator(10_000))
                           for v in vec) + ")"


def cmd_demo() -> int:
    instance = two_round_example()
    print("Two-round worked example, three countries")
    print()
    for concept in ("shapley", "nucleolus"):
        rep = run_instance(instance, concept, "lexmin_c", rounds=2)
        r1, r2 = rep.rounds
        c3 = r2.x - r2.s
        print(f"[{concept}]")
        print(f"  round 1: y^1 = x^1 = {_fmt_vec(r1.x)}, matched s(M^1) = {_fmt_vec(r1.s)}")
        print(f"  credits: c^2 = {_fmt_vec(r2.c)}")
        print(f"  round 2: y^2 = {_fmt_vec(r2.y)}, target x^2 = {_fmt_vec(r2.x)}")
        print(f"  chosen  M^2 = {sorted(r2.matching_edges)} with s(M^2) = {_fmt_vec(r2.s)}")
        print(f"  credits: c^3 = {_fmt_vec(c3)}")
        print()
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "demo":
            return cmd_demo()
        if args.command == "verify":
            level = args.arg or "small"
            return 0 if run_verification(level) else 1
        cfg = load_config(args)
        if args.command == "generate":
            return cmd_generate(cfg, args.out)
        if args.command == "run":
            return cmd_run(cfg, args.out, args.parallel)
        if args.command == "report":
            return cmd_report(args, args.out)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
