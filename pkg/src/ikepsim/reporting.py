"""Aggregate metrics over instance reports, and machine-readable outputs.

A cell is one (setting, concept, scenario, n) combination; metrics are
averaged over its instances.  Balancedness is measured on the 24-round
totals: the total relative deviation sums |x*_p - s*_p| over countries and
divides by the total number of transplants 2|M*|, the maximum relative
deviation takes the largest country term instead of the sum.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .concepts import Allocation, core_nonempty, min_excess
from .simulator import InstanceReport

CellKey = tuple[str, str, str, int]

TIMING_TASKS = ("data_prep", "graph_build", "game_gen", "concept", "selection")


def total_relative_deviation(x_star, s_star, matching_size: int) -> float:
    """sum_p |x*_p - s*_p| / (2 |M*|); an empty matching reports zero."""
    if matching_size == 0:
        return 0.0
    return float(np.abs(np.asarray(x_star) - np.asarray(s_star)).sum()
                 / (2.0 * matching_size))


def max_relative_deviation(x_star, s_star, matching_size: int) -> float:
    """max_p |x*_p - s*_p| / (2 |M*|); an empty matching reports zero."""
    if matching_size == 0:
        return 0.0
    return float(np.abs(np.asarray(x_star) - np.asarray(s_star)).max()
                 / (2.0 * matching_size))


def accumulated_deviation_series(reports: list[InstanceReport]) -> list[float]:
    """Round-by-round average of sum_p |c_p^h| over same-cell reports."""
    if not reports:
        return []
    key = _key(reports[0])
    rounds = max(len(r.credit_series) for r in reports)
    out = []
    for h in range(rounds):
        vals = [r.credit_series[h] for r in reports
                if len(r.credit_series) > h]
        out.append(float(np.mean(vals)))
    for r in reports:
        if _key(r) != key:
            raise ValueError("reports span multiple cells")
    return out


def stability_report(reports: list[InstanceReport]) -> dict:
    """Core distances of the accumulated allocations vs the doubled
    accumulated game: min excess of y* = sum y^h and of s*, plus how often
    the accumulated core was nonempty."""
    init, sol, nonempty = [], [], []
    for r in reports:
        if r.accumulated_game is None or r.aborted:
            continue
        doubled = r.accumulated_game.scaled(2.0)
        total = float(doubled.values[doubled.grand])
        init.append(min_excess(doubled, Allocation(r.y_star, total)))
        sol.append(min_excess(doubled, Allocation(r.s_star, total)))
        nonempty.append(core_nonempty(doubled))
    if not init:
        return {"min_excess_initial": math.nan, "min_excess_solution": math.nan,
                "core_nonempty_rate": math.nan, "instances": 0}
    return {
        "min_excess_initial": float(np.mean(init)),
        "min_excess_solution": float(np.mean(sol)),
        "core_nonempty_rate": float(np.mean(nonempty)),
        "instances": len(init),
    }


def _key(r: InstanceReport) -> CellKey:
    return (r.setting, r.concept, r.scenario, r.n)


@dataclass
class CellStats:
    setting: str
    concept: str
    scenario: str
    n: int
    instances: int
    metrics: dict[str, float]
    errors: dict[str, float] = field(default_factory=dict)
    credit_series_mean: list[float] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "setting": self.setting, "concept": self.concept,
            "scenario": self.scenario, "n": self.n, "instances": self.instances,
            "metrics": {k: self.metrics[k] for k in sorted(self.metrics)},
            "errors": {k: self.errors[k] for k in sorted(self.errors)},
            "credit_series_mean": list(self.credit_series_mean),
        }

    @staticmethod
    def from_dict(d: dict) -> "CellStats":
        return CellStats(d["setting"], d["concept"], d["scenario"], int(d["n"]),
                         int(d["instances"]), dict(d["metrics"]),
                         dict(d["errors"]), list(d["credit_series_mean"]))


@dataclass
class AggregateReport:
    cells: dict[CellKey, CellStats] = field(default_factory=dict)

    def cell(self, setting: str, concept: str, scenario: str, n: int) -> CellStats:
        return self.cells[(setting, concept, scenario, n)]

    def metric(self, setting: str, concept: str, scenario: str, n: int,
               name: str) -> float:
        return self.cell(setting, concept, scenario, n).metrics[name]

    def relative_improvement(self, setting: str, concept: str, n: int,
                             metric: str = "total_relative_deviation",
                             over: tuple[str, str] = ("lexmin_c", "d1_c")) -> float:
        """(d1_c - lexmin_c) / d1_c for a deviation metric (fractional gain)."""
        better = self.metric(setting, concept, over[0], n, metric)
        base = self.metric(setting, concept, over[1], n, metric)
        if base == 0.0:
            return 0.0
        return (base - better) / base


def aggregate(reports: list[InstanceReport]) -> AggregateReport:
    by_cell: dict[CellKey, list[InstanceReport]] = {}
    for r in reports:
        by_cell.setdefault(_key(r), []).append(r)
    agg = AggregateReport()
    for key, cell_reports in sorted(by_cell.items()):
        live = [r for r in cell_reports if not r.aborted]
        metrics: dict[str, float] = {}
        errors: dict[str, float] = {}
        metrics["aborted_count"] = float(len(cell_reports) - len(live))
        if live:
            trd = [total_relative_deviation(r.x_star, r.s_star, r.total_matching_size)
                   for r in live]
            mrd = [max_relative_deviation(r.x_star, r.s_star, r.total_matching_size)
                   for r in live]
            metrics["total_relative_deviation"] = float(np.mean(trd))
            errors["total_relative_deviation"] = _stderr(trd)
            metrics["max_relative_deviation"] = float(np.mean(mrd))
            errors["max_relative_deviation"] = _stderr(mrd)
            metrics["zero_matching_flag"] = float(
                any(r.total_matching_size == 0 for r in live))
            transplants = [2.0 * r.total_matching_size for r in live]
            metrics["transplants"] = float(np.mean(transplants))
            gains = [2.0 * r.total_matching_size / r.no_coop_total
                     for r in live if r.no_coop_total]
            if gains:
                metrics["no_coop_transplants"] = float(np.mean(
                    [r.no_coop_total for r in live if r.no_coop_total]))
                metrics["cooperation_gain"] = float(np.mean(gains))
            flags = [rec for r in live for rec in r.rounds]
            audited = [rec for rec in flags if rec.quasibalanced is not None]
            if audited:
                metrics["not_quasibalanced_rate"] = float(np.mean(
                    [not rec.quasibalanced for rec in audited]))
                metrics["convex_rate"] = float(np.mean(
                    [bool(rec.convex) for rec in audited]))
                nonconvex = [rec for rec in audited
                             if rec.convex is False and rec.tau_equals_benefit is not None]
                if nonconvex:
                    metrics["nonconvex_tau_eq_benefit_rate"] = float(np.mean(
                        [bool(rec.tau_equals_benefit) for rec in nonconvex]))
            metrics["tau_fallback_rate"] = float(np.mean(
                [rec.tau_fallback for rec in flags])) if flags else 0.0
            for task in TIMING_TASKS:
                per_round = [rec.timings.get(task, 0.0) for rec in flags]
                metrics[f"time_mean_{task}"] = float(np.mean(per_round)) if per_round else 0.0
            metrics["time_mean_round_total"] = float(sum(
                metrics[f"time_mean_{task}"] for task in TIMING_TASKS))
            stab = stability_report(live)
            for name in ("min_excess_initial", "min_excess_solution",
                         "core_nonempty_rate"):
                if not math.isnan(stab[name]):
                    metrics[name] = stab[name]
        series = accumulated_deviation_series(live) if live else []
        agg.cells[key] = CellStats(
            setting=key[0], concept=key[1], scenario=key[2], n=key[3],
            instances=len(cell_reports), metrics=metrics, errors=errors,
            credit_series_mean=series,
        )
    return agg


def _stderr(values) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / math.sqrt(len(values)))


def emit_csv(agg: AggregateReport, path) -> None:
    """One row per (cell, metric): plot-ready long format."""
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["setting", "concept", "scenario", "n", "metric",
                         "value", "instances", "stderr"])
        for key in sorted(agg.cells):
            cell = agg.cells[key]
            for metric in sorted(cell.metrics):
                writer.writerow([
                    cell.setting, cell.concept, cell.scenario, cell.n, metric,
                    repr(cell.metrics[metric]), cell.instances,
                    repr(cell.errors.get(metric, 0.0)),
                ])
            for h, value in enumerate(cell.credit_series_mean, start=1):
                writer.writerow([
                    cell.setting, cell.concept, cell.scenario, cell.n,
                    f"accumulated_deviation_round_{h:02d}", repr(value),
                    cell.instances, repr(0.0),
                ])


def emit_jsonl(agg: AggregateReport, path) -> None:
    with open(path, "w") as fh:
        for key in sorted(agg.cells):
            fh.write(json.dumps(agg.cells[key].to_dict(), sort_keys=True) + "\n")


def load_jsonl(path) -> AggregateReport:
    agg = AggregateReport()
    with open(path) as fh:
        for line in fh:
            if line.strip():
                cell = CellStats.from_dict(json.loads(line))
                agg.cells[(cell.setting, cell.concept, cell.scenario, cell.n)] = cell
    return agg


def emit_markdown(agg: AggregateReport, path) -> None:
    """Summary tables: deviations, cooperation gains, stability, game audit."""
    ns = sorted({k[3] for k in agg.cells})
    settings = sorted({k[0] for k in agg.cells})
    lines = ["# Simulation summary", ""]
    for setting in settings:
        lines.append(f"## Setting: {setting}")
        combos = sorted({(k[1], k[2]) for k in agg.cells if k[0] == setting})
        lines.append("")
        lines.append("### Average total relative deviation")
        lines.append("| concept / scenario | " + " | ".join(f"n={n}" for n in ns) + " |")
        lines.append("|---" * (len(ns) + 1) + "|")
        for concept, scenario in combos:
            row = [f"{concept} {scenario}"]
            for n in ns:
                cell = agg.cells.get((setting, concept, scenario, n))
                row.append("" if cell is None or "total_relative_deviation" not in cell.metrics
                           else f"{cell.metrics['total_relative_deviation']:.4%}")
            lines.append("| " + " | ".join(row) + " |")
        lines.append("")
        lines.append("### Cooperation gain (transplants vs no cooperation)")
        lines.append("| concept / scenario | " + " | ".join(f"n={n}" for n in ns) + " |")
        lines.append("|---" * (len(ns) + 1) + "|")
        for concept, scenario in combos:
            row = [f"{concept} {scenario}"]
            for n in ns:
                cell = agg.cells.get((setting, concept, scenario, n))
                row.append("" if cell is None or "cooperation_gain" not in cell.metrics
                           else f"{cell.metrics['cooperation_gain']:.1%}")
            lines.append("| " + " | ".join(row) + " |")
        lines.append("")
        lines.append("### Core stability (mean min excess, accumulated games)")
        lines.append("| concept / scenario | initial | solution | core nonempty |")
        lines.append("|---|---|---|---|")
        for concept, scenario in combos:
            vals = [agg.cells[(setting, concept, scenario, n)] for n in ns
                    if (setting, concept, scenario, n) in agg.cells]
            vals = [c for c in vals if "min_excess_initial" in c.metrics]
            if not vals:
                continue
            mi = np.mean([c.metrics["min_excess_initial"] for c in vals])
            ms = np.mean([c.metrics["min_excess_solution"] for c in vals])
            cr = np.mean([c.metrics["core_nonempty_rate"] for c in vals])
            lines.append(f"| {concept} {scenario} | {mi:.2f} | {ms:.2f} | {cr:.0%} |")
        lines.append("")
        lines.append("### Game audit (share of rounds)")
        lines.append("| n | not quasibalanced | convex | non-convex with tau = benefit |")
        lines.append("|---|---|---|---|")
        for n in ns:
            cells = [agg.cells[k] for k in agg.cells
                     if k[0] == setting and k[3] == n
                     and "not_quasibalanced_rate" in agg.cells[k].metrics]
            if not cells:
                continue
            nq = np.mean([c.metrics["not_quasibalanced_rate"] for c in cells])
            cv = np.mean([c.metrics["convex_rate"] for c in cells])
            tb = np.mean([c.metrics.get("nonconvex_tau_eq_benefit_rate", math.nan)
                          for c in cells])
            lines.append(f"| {n} | {nq:.2%} | {cv:.2%} | "
                         + ("" if math.isnan(tb) else f"{tb:.1%}") + " |")
        lines.append("")
    with open(path, "w") as fh:
        fh.write("\n".join(lines) + "\n")


def emit(agg: AggregateReport, fmt: str, path) -> None:
    if fmt == "csv":
        emit_csv(agg, path)
    elif fmt == "jsonl":
        emit_jsonl(agg, path)
    elif fmt in ("md", "markdown-summary"):
        emit_markdown(agg, path)
    else:
        raise ValueError(f"unknown format {fmt!r}")


def render_line_chart(series: dict[str, tuple[list[float], list[float]]],
                      title: str, path, width: int = 640, height: int = 400) -> None:
    """Tiny static SVG renderer: one polyline per labelled series."""
    pad = 50
    xs_all = [x for xs, _ in series.values() for x in xs]
    ys_all = [y for _, ys in series.values() for y in ys]
    if not xs_all:
        xs_all, ys_all = [0.0, 1.0], [0.0, 1.0]
    x0, x1 = min(xs_all), max(xs_all)
    y0, y1 = min(ys_all + [0.0]), max(ys_all + [1e-12])
    if x1 == x0:
        x1 = x0 + 1.0
    if y1 == y0:
        y1 = y0 + 1.0

    def sx(x):
        return pad + (x - x0) / (x1 - x0) * (width - 2 * pad)

    def sy(y):
        return height - pad - (y - y0) / (y1 - y0) * (height - 2 * pad)

    palette = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
               "#8c564b", "#17becf", "#7f7f7f"]
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<text x="{width / 2}" y="20" text-anchor="middle" '
        f'font-family="sans-serif" font-size="14">{title}</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" '
        f'y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
        f'<text x="{pad}" y="{height - pad + 16}" font-size="10" '
        f'font-family="sans-serif">{x0:g}</text>',
        f'<text x="{width - pad}" y="{height - pad + 16}" text-anchor="end" '
        f'font-size="10" font-family="sans-serif">{x1:g}</text>',
        f'<text x="{pad - 4}" y="{height - pad}" text-anchor="end" '
        f'font-size="10" font-family="sans-serif">{y0:g}</text>',
        f'<text x="{pad - 4}" y="{pad}" text-anchor="end" font-size="10" '
        f'font-family="sans-serif">{y1:g}</text>',
    ]
    for i, (label, (xs, ys)) in enumerate(sorted(series.items())):
        color = palette[i % len(palette)]
        points = " ".join(f"{sx(x):.1f},{sy(y):.1f}" for x, y in zip(xs, ys))
        parts.append(f'<polyline fill="none" stroke="{color}" stroke-width="1.5" '
                     f'points="{points}"/>')
        parts.append(f'<text x="{width - pad + 4}" y="{pad + 14 * i}" font-size="10" '
                     f'font-family="sans-serif" fill="{color}">{label}</text>')
    parts.append("</svg>")
    with open(path, "w") as fh:
        fh.write("\n".join(parts))
