"""Solution concepts: Shapley, Banzhaf, tau, benefit, contribution, nucleolus.

All concepts are computed on the unscaled game (values are matching sizes);
the credit layer multiplies by two exactly once when building round targets.
Concepts that can fail to exist (tau on non-quasibalanced games, benefit and
contribution on zero denominators, normalized Banzhaf on a zero normalizer)
return ``None`` instead of raising; the caller decides how to react.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .games import (
    CharacteristicFunction,
    GameError,
    coalition_sums,
    is_quasibalanced,
    surplus,
    utopia_vector,
)
from .lp import (
    GE,
    EQ,
    DegeneracyError,
    LinearProgram,
    LpOptimal,
    solve_canonical,
    solve_lp,
)

EFFICIENCY_TOL = 1e-9
LEVEL_TOL = 1e-7
PROBE_DELTA = 1e-7


@dataclass(frozen=True)
class Allocation:
    """Payoff vector with its declared total (efficiency is checked)."""

    x: np.ndarray
    total: float

    def __post_init__(self):
        object.__setattr__(self, "x", np.asarray(self.x, dtype=np.float64))
        if abs(self.x.sum() - self.total) > EFFICIENCY_TOL * max(1.0, abs(self.total)):
            raise GameError(
                f"allocation sums to {self.x.sum()}, declared {self.total}")

    def __len__(self):
        return len(self.x)

    def scaled(self, factor: float) -> "Allocation":
        return Allocation(self.x * factor, self.total * factor)


class BanzhafValues(NamedTuple):
    raw: np.ndarray
    normalized: Allocation | None


def _popcounts(n: int) -> np.ndarray:
    masks = np.arange(1 << n, dtype=np.uint64)
    return np.bitwise_count(masks).astype(np.int64)


def shapley(v: CharacteristicFunction) -> Allocation:
    """Factorial-weighted average marginal contribution, exact subset pass."""
    n = v.n
    vals = v.values
    masks = np.arange(1 << n, dtype=np.int64)
    sizes = _popcounts(n)
    fact = np.ones(n + 1)
    for k in range(1, n + 1):
        fact[k] = fact[k - 1] * k
    weight_by_size = np.array([fact[s] * fact[n - s - 1] / fact[n] for s in range(n)])
    phi = np.empty(n)
    for p in range(n):
        without = masks[(masks >> p) & 1 == 0]
        gains = vals[without | (1 << p)] - vals[without]
        phi[p] = float(weight_by_size[sizes[without]] @ gains)
    return Allocation(phi, float(vals[v.grand]))


def banzhaf(v: CharacteristicFunction) -> BanzhafValues:
    """Mean marginal contribution over subsets, plus efficiency-normalized form."""
    n = v.n
    vals = v.values
    masks = np.arange(1 << n, dtype=np.int64)
    raw = np.empty(n)
    for p in range(n):
        without = masks[(masks >> p) & 1 == 0]
        raw[p] = float((vals[without | (1 << p)] - vals[without]).sum()) / (1 << (n - 1))
    denom = raw.sum()
    grand = float(vals[v.grand])
    if abs(denom) <= EFFICIENCY_TOL:
        if abs(grand) <= EFFICIENCY_TOL:
            # the zero game: nothing to normalize, nothing to allocate
            return BanzhafValues(raw, Allocation(np.zeros(n), 0.0))
        return BanzhafValues(raw, None)
    return BanzhafValues(raw, Allocation(raw / denom * grand, grand))


def tau(v: CharacteristicFunction) -> Allocation | None:
    """Efficient convex combination of minimal rights and utopia payoffs.

    Returns None when the game is not quasibalanced (the caller substitutes
    the benefit value there).
    """
    ok, profile = is_quasibalanced(v)
    if not ok:
        return None
    a, b = profile.a, profile.b
    grand = float(v.values[v.grand])
    denom = b.sum() - a.sum()
    if abs(denom) <= EFFICIENCY_TOL:
        return Allocation(a, grand)
    gamma = (b.sum() - grand) / denom
    return Allocation(gamma * a + (1.0 - gamma) * b, grand)


def _surplus_split(v: CharacteristicFunction, weights: np.ndarray) -> Allocation | None:
    singles = v.singleton_values()
    surp = surplus(v)
    if abs(surp) <= EFFICIENCY_TOL:
        # nothing to split: the weights cannot matter (inessential game)
        return Allocation(singles, float(v.values[v.grand]))
    denom = weights.sum()
    if abs(denom) <= EFFICIENCY_TOL:
        return None
    return Allocation(singles + weights / denom * surp, float(v.values[v.grand]))


def benefit(v: CharacteristicFunction) -> Allocation | None:
    """Surplus split proportionally to v(N) - v(N-p) - v({p})."""
    return _surplus_split(v, utopia_vector(v) - v.singleton_values())


def contribution(v: CharacteristicFunction) -> Allocation | None:
    """Surplus split proportionally to v(N) - v(N-p)."""
    return _surplus_split(v, utopia_vector(v))


def _proper_masks(n: int) -> np.ndarray:
    masks = np.arange(1, (1 << n) - 1, dtype=np.int64)
    return masks


def _indicator_rows(masks: np.ndarray, n: int) -> np.ndarray:
    return ((masks[:, None] >> np.arange(n)[None, :]) & 1).astype(np.float64)


def excess_vector(v: CharacteristicFunction, x: Allocation) -> np.ndarray:
    """The 2^n - 2 excesses x(S) - v(S), sorted non-decreasingly."""
    if v.n < 2:
        raise GameError("excess vector needs at least two players")
    xsums = coalition_sums(x.x)
    masks = _proper_masks(v.n)
    return np.sort(xsums[masks] - v.values[masks])


def min_excess(v: CharacteristicFunction, x: Allocation) -> float:
    """Smallest excess over nonempty proper coalitions (core margin)."""
    if v.n < 2:
        raise GameError("min excess needs at least two players")
    xsums = coalition_sums(x.x)
    masks = _proper_masks(v.n)
    return float(np.min(xsums[masks] - v.values[masks]))


def _least_core_lp(v: CharacteristicFunction, individually_rational: bool):
    n = v.n
    masks = _proper_masks(n)
    rows = np.hstack([_indicator_rows(masks, n), -np.ones((len(masks), 1))])
    senses = [GE] * len(masks)
    rhs = v.values[masks].tolist()
    eff = np.concatenate([np.ones(n), [0.0]])
    rows = np.vstack([rows, eff])
    senses.append(EQ)
    rhs.append(float(v.values[v.grand]))
    if individually_rational:
        singles = v.singleton_values()
        for p in range(n):
            e = np.zeros(n + 1)
            e[p] = 1.0
            rows = np.vstack([rows, e])
            senses.append(GE)
            rhs.append(float(singles[p]))
    c = np.zeros(n + 1)
    c[n] = 1.0
    return LinearProgram(c=c, A=rows, senses=senses, b=np.asarray(rhs)), masks


def core_nonempty(v: CharacteristicFunction) -> bool:
    """Least-core LP feasibility: can every proper excess be >= 0?"""
    if v.n < 2:
        return True
    lp, _ = _least_core_lp(v, individually_rational=False)
    res = solve_lp(lp)
    if not isinstance(res, LpOptimal):
        raise DegeneracyError(f"least-core LP returned {type(res).__name__}")
    return res.value >= -EFFICIENCY_TOL


def nucleolus(v: CharacteristicFunction, tie_probe: str = "sum") -> Allocation:
    """Lexicographic maximizer of the sorted excess vector over imputations.

    Successive-LP scheme: maximize the minimum unfixed excess, then fix the
    coalitions whose excess is constant across the optimal face at the level
    just found, until the fixed equalities pin the allocation.

    Two equivalent detectors for "constant across the optimal face" exist:
    ``sum`` (default) repeatedly maximizes the summed excess of the tight
    candidates over the optimal face and drops every candidate that comes
    back slack, so one level needs only a handful of solves; ``force``
    re-solves per candidate with its excess pushed above the level (by 1e-7)
    and fixes it when that breaks the optimum.  Both are kept so tests can
    play them against each other.
    """
    if tie_probe not in ("sum", "force"):
        raise GameError(f"unknown tie_probe {tie_probe!r}")
    n = v.n
    grand_value = float(v.values[v.grand])
    if n == 1:
        return Allocation(np.array([grand_value]), grand_value)
    singles = v.singleton_values()
    if singles.sum() > grand_value + EFFICIENCY_TOL:
        raise GameError("empty imputation set")

    masks = _proper_masks(n)
    rows = _indicator_rows(masks, n)
    vals = v.values[masks]
    free = np.ones(len(masks), dtype=bool)
    fixed_idx: list[int] = []
    fixed_level: list[float] = []

    # constant canonical rows: efficiency (two inequalities) and rationality
    eff_plus = np.concatenate([np.ones(n), [0.0]])
    base_G = np.vstack([eff_plus, -eff_plus, np.hstack([-np.eye(n), np.zeros((n, 1))])])
    base_h = np.concatenate([[grand_value], [-grand_value], -singles])

    # levels can settle coalitions without raising the equality rank, so the
    # only safe bound is the coalition count (rank-n termination is typical)
    for _level in range(len(masks) + 1):
        fi = np.asarray(fixed_idx, dtype=np.int64)
        free_rows = rows[free]
        free_vals = vals[free]
        # level LP over (x, eps):  excess_i >= eps for free, pins for fixed
        G_level = np.vstack([
            np.hstack([-free_rows, np.ones((len(free_vals), 1))]),
            np.hstack([rows[fi], np.zeros((len(fi), 1))]),
            np.hstack([-rows[fi], np.zeros((len(fi), 1))]),
            base_G,
        ])
        pinned = vals[fi] + np.asarray(fixed_level)
        h_level = np.concatenate([-free_vals, pinned, -pinned, base_h])
        f_level = np.zeros(n + 1)
        f_level[n] = 1.0
        status, z, eps, _ = solve_canonical(f_level, G_level, h_level)
        if status != "optimal":
            raise DegeneracyError(f"nucleolus level LP {status}")
        x = z[:n]

        # candidates: free coalitions tight at this vertex of the face
        excess = free_rows @ x - free_vals
        cand = np.flatnonzero(excess <= eps + LEVEL_TOL)

        # face-restricted LPs over x alone share their constraint rows
        G_face = np.vstack([
            -free_rows,
            rows[fi] if len(fi) else np.zeros((0, n)),
            -rows[fi] if len(fi) else np.zeros((0, n)),
            base_G[:, :n],
        ])
        h_face = np.concatenate([-(free_vals + eps), pinned, -pinned, base_h])

        if tie_probe == "sum":
            while len(cand):
                f_aux = free_rows[cand].sum(axis=0)
                status, xa, aux_val, _ = solve_canonical(f_aux, G_face, h_face)
                if status != "optimal":
                    raise DegeneracyError(f"nucleolus face LP {status}")
                slack = free_rows[cand] @ xa - free_vals[cand] > eps + LEVEL_TOL
                if not slack.any():
                    break
                cand = cand[~slack]
        else:
            kept = []
            for i in cand:
                G_probe = np.vstack([G_face, -free_rows[i][None, :]])
                h_probe = np.concatenate(
                    [h_face, [-(free_vals[i] + eps + PROBE_DELTA)]])
                status, _, _, _ = solve_canonical(np.zeros(n), G_probe, h_probe)
                if status != "optimal":
                    kept.append(i)
            cand = np.asarray(kept, dtype=np.int64)

        if len(cand) == 0:
            raise DegeneracyError("nucleolus level fixed no coalition")
        free_positions = np.flatnonzero(free)
        for i in cand:
            fixed_idx.append(int(free_positions[i]))
            fixed_level.append(float(eps))
        free[free_positions[cand]] = False

        eq_rows = np.vstack([rows[fixed_idx], np.ones((1, n))])
        eq_rhs = np.concatenate([vals[np.asarray(fixed_idx)] + np.asarray(fixed_level),
                                 [grand_value]])
        if (np.linalg.matrix_rank(eq_rows, tol=1e-9) >= n) or not free.any():
            sol, *_ = np.linalg.lstsq(eq_rows, eq_rhs, rcond=None)
            return Allocation(sol, grand_value)
    raise DegeneracyError("nucleolus level iteration cap exceeded")
