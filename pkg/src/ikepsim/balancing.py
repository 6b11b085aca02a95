"""Matching selection against a target allocation.

Three selectors over the set of maximum matchings: the deterministic
canonical one (baseline), one minimizing the largest country deviation
|x_p - s_p(M)|, and one lexicographically minimizing the non-increasingly
sorted deviation vector.

Matched counts are integers while targets are real, so every deviation a
country can show is one of the |V_p| + 1 values |x_p - k|.  A deviation
bound d translates to the integer interval [ceil(x_p - d), floor(x_p + d)]
clipped to [0, |V_p|], which is what the interval-feasibility engine
consumes.  A small epsilon guards the ceil/floor against float noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .concepts import Allocation
from .graph import CompatibilityGraph, MatchedCounts, Matching, matched_counts
from .matching import (
    IntervalConstraints,
    interval_feasible_maximum_matching,
    maximum_matching,
)

FP_EPS = 1e-9
DEV_TOL = 1e-12


@dataclass(frozen=True)
class DeviationVector:
    """Per-country absolute deviations, with the sorted non-increasing view."""

    sorted: np.ndarray
    by_country: np.ndarray

    def lex_less_equal(self, other: "DeviationVector", tol: float = DEV_TOL) -> bool:
        for a, b in zip(self.sorted, other.sorted):
            if a < b - tol:
                return True
            if a > b + tol:
                return False
        return True


def _target_array(x) -> np.ndarray:
    if isinstance(x, Allocation):
        return np.asarray(x.x, dtype=np.float64)
    return np.asarray(x, dtype=np.float64)


def deviation_vector(x, s: MatchedCounts | np.ndarray) -> DeviationVector:
    xa = _target_array(x)
    sa = s.counts if isinstance(s, MatchedCounts) else np.asarray(s)
    if len(xa) != len(sa):
        raise ValueError("target and matched counts differ in length")
    devs = np.abs(xa - sa)
    return DeviationVector(sorted=np.sort(devs)[::-1], by_country=devs)


def _bound_interval(xp: float, size: int, d: float) -> tuple[int, int]:
    lo = max(0, math.ceil(xp - d - FP_EPS))
    hi = min(size, math.floor(xp + d + FP_EPS))
    return lo, hi


def _intervals_for_bounds(x: np.ndarray, sizes: np.ndarray,
                          bounds: np.ndarray) -> IntervalConstraints | None:
    lo = np.empty(len(x), dtype=np.int64)
    hi = np.empty(len(x), dtype=np.int64)
    for p in range(len(x)):
        lo[p], hi[p] = _bound_interval(float(x[p]), int(sizes[p]), float(bounds[p]))
        if lo[p] > hi[p]:
            return None
    return IntervalConstraints(lo, hi)


def _largest_dev_below(xp: float, size: int, d: float) -> float | None:
    """Largest achievable deviation |xp - k| strictly below d, if any."""
    best = None
    for k in range(size + 1):
        dev = abs(xp - k)
        if dev < d - DEV_TOL and (best is None or dev > best):
            best = dev
    return best


def arbitrary_maximum_matching(g: CompatibilityGraph) -> Matching:
    """The canonical deterministic maximum matching (baseline scenario)."""
    return maximum_matching(g)


def min_d1_matching(g: CompatibilityGraph, x) -> tuple[Matching, float]:
    """Maximum matching minimizing the largest country deviation from x.

    The optimum lies in the finite set {|x_p - k|}; that set is bisected,
    each candidate tested with one interval-feasibility query.
    """
    xa = _target_array(x)
    sizes = g.country_sizes
    cands = set()
    for p in range(g.n_countries):
        for k in range(int(sizes[p]) + 1):
            cands.add(abs(float(xa[p]) - k))
    cands = np.unique(np.fromiter(cands, dtype=np.float64))

    witness = maximum_matching(g)
    d_now = float(np.max(np.abs(xa - matched_counts(g, witness).counts)))
    hi = int(np.searchsorted(cands, d_now + DEV_TOL)) - 1
    lo = 0
    while lo < hi:
        mid = (lo + hi) // 2
        iv = _intervals_for_bounds(xa, sizes, np.full(g.n_countries, cands[mid]))
        found = None if iv is None else interval_feasible_maximum_matching(g, iv)
        if found is None:
            lo = mid + 1
        else:
            witness = found
            hi = mid
    return witness, float(cands[hi])


def lexmin_matching(g: CompatibilityGraph, x) -> tuple[Matching, DeviationVector]:
    """Maximum matching whose sorted deviation vector is lexicographically
    minimal over all maximum matchings (greedy level descent).

    Starting from a d1-minimal matching, repeatedly take the unfinished
    country with the largest current deviation and try to push it one
    achievable step down while capping every other unfinished country at the
    current level and holding finished countries at their settled levels.  A
    successful step permanently lowers that country's bound; a failed one
    settles the country at its level.
    """
    xa = _target_array(x)
    n = g.n_countries
    sizes = g.country_sizes
    m, d1 = min_d1_matching(g, xa)
    s = matched_counts(g, m).counts.astype(np.float64)
    bounds = np.full(n, d1)
    finished = np.zeros(n, dtype=bool)

    while not finished.all():
        devs = np.abs(xa - s)
        masked = np.where(finished, -np.inf, devs)
        p = int(np.argmax(masked))
        level = float(devs[p])
        step = _largest_dev_below(float(xa[p]), int(sizes[p]), level)
        if step is None:
            finished[p] = True
            bounds[p] = level
            continue
        bounds = np.minimum(bounds, np.where(finished, bounds, level))
        trial = bounds.copy()
        trial[p] = step
        iv = _intervals_for_bounds(xa, sizes, trial)
        found = None if iv is None else interval_feasible_maximum_matching(g, iv)
        if found is None:
            finished[p] = True
            bounds[p] = level
        else:
            m = found
            s = matched_counts(g, m).counts.astype(np.float64)
            bounds[p] = step
    return m, deviation_vector(xa, s)


def lexmin_matching_bisect(g: CompatibilityGraph, x) -> tuple[Matching, DeviationVector]:
    """Lexicographically minimal matching via explicit level bisection.

    Independent of the greedy: each level's value is found by bisecting the
    achievable deviations under the commitments made so far, then the set of
    countries settled at that level is made inclusion-minimal by trying to
    push each one below it in turn.
    """
    xa = _target_array(x)
    n = g.n_countries
    sizes = g.country_sizes
    m, d1 = min_d1_matching(g, xa)
    bounds = np.full(n, d1)
    finished = np.zeros(n, dtype=bool)

    def feasible(trial) -> Matching | None:
        iv = _intervals_for_bounds(xa, sizes, trial)
        return None if iv is None else interval_feasible_maximum_matching(g, iv)

    while not finished.all():
        # smallest level the unfinished countries can all reach
        cands = set()
        for p in range(n):
            if finished[p]:
                continue
            for k in range(int(sizes[p]) + 1):
                dev = abs(float(xa[p]) - k)
                if dev <= bounds[p] + DEV_TOL:
                    cands.add(dev)
        cands = np.unique(np.fromiter(cands, dtype=np.float64))
        lo, hi = 0, len(cands) - 1
        witness = m
        while lo < hi:
            mid = (lo + hi) // 2
            trial = np.where(finished, bounds, np.minimum(bounds, cands[mid]))
            found = feasible(trial)
            if found is None:
                lo = mid + 1
            else:
                witness, hi = found, mid
        level = float(cands[hi])
        m = witness
        bounds = np.where(finished, bounds, np.minimum(bounds, level))
        settled_before = int(finished.sum())
        # settle an inclusion-minimal set of countries at this level
        for p in range(n):
            if finished[p] or bounds[p] < level - DEV_TOL:
                continue
            step = _largest_dev_below(float(xa[p]), int(sizes[p]), level)
            trial = bounds.copy()
            if step is None:
                finished[p] = True
                continue
            trial[p] = step
            found = feasible(trial)
            if found is None:
                finished[p] = True
            else:
                m = found
                bounds[p] = step
        if int(finished.sum()) == settled_before:
            raise RuntimeError("level settled no country")  # unreachable guard

    s = matched_counts(g, m).counts
    return m, deviation_vector(xa, s)
