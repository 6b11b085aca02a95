"""Cross-round credit bookkeeping: initial allocation, target, update.

Per round: a solution concept gives an initial allocation y on the round's
game (scaled by two, since allocations count kidneys while game values count
swaps), credits carried in from earlier rounds shift it to the target
x = y + c, a matching is chosen against x, and the next credits are
c' = x - s(M).  Credits always sum to zero.

Two credit regimes exist.  The additive one applies the concept to the
round's game and adds credits afterwards.  The credit-adjusted one folds the
credits into the value function first and uses the concept's output directly
as the target; for every covariant concept this provably coincides with the
additive regime, so it is only interesting for the normalized Banzhaf value.
Records store y as x - c in that regime, keeping one recurrence for both.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .concepts import (
    Allocation,
    banzhaf,
    benefit,
    contribution,
    nucleolus,
    shapley,
    tau,
)
from .games import CharacteristicFunction, credit_adjusted_game
from .graph import MatchedCounts

SUM_TOL = 1e-9

CONCEPTS = ("shapley", "nucleolus", "banzhaf", "tau", "benefit", "contribution")
ADDITIVE_CREDITS = "additive-credits"
CREDIT_ADJUSTED_GAME = "credit-adjusted-game"
REGIMES = (ADDITIVE_CREDITS, CREDIT_ADJUSTED_GAME)


class CreditError(ValueError):
    pass


class UndefinedConceptError(RuntimeError):
    """The requested concept does not exist for this game (zero denominator)."""

    def __init__(self, concept: str, detail: str = ""):
        self.concept = concept
        super().__init__(f"{concept} value undefined{': ' + detail if detail else ''}")


@dataclass(frozen=True)
class CreditLedger:
    """Per-country credit vector for one upcoming round; sums to zero."""

    credits: np.ndarray
    round: int = 1

    def __post_init__(self):
        object.__setattr__(self, "credits", np.asarray(self.credits, dtype=np.float64))
        if self.round < 1:
            raise CreditError("round must be >= 1")
        if abs(self.credits.sum()) > SUM_TOL:
            raise CreditError(f"credits sum to {self.credits.sum()}, expected 0")
        if self.round == 1 and np.any(self.credits != 0.0):
            raise CreditError("round-1 credits must be identically zero")

    @staticmethod
    def initial(n: int) -> "CreditLedger":
        return CreditLedger(np.zeros(n), 1)


def target_allocation(y: Allocation, c: CreditLedger) -> Allocation:
    """x = y + c; the credit shift never changes the total."""
    if len(c.credits) != len(y):
        raise CreditError("credit vector length does not match the allocation")
    return Allocation(y.x + c.credits, y.total)


def update_credits(x: Allocation, s: MatchedCounts, round_no: int) -> CreditLedger:
    """Next round's credits c' = x - s(M); totals must agree (both 2 mu)."""
    counts = s.counts.astype(np.float64)
    if len(counts) != len(x):
        raise CreditError("matched counts length does not match the allocation")
    if abs(x.total - counts.sum()) > SUM_TOL:
        raise CreditError(
            f"target totals {x.total} but matching covered {counts.sum()} "
            "(a non-maximum matching leaked through)")
    return CreditLedger(x.x - counts, round_no)


def concept_allocation(v: CharacteristicFunction,
                       concept: str) -> tuple[Allocation, bool]:
    """Unscaled concept value; tau falls back to benefit when it fails to
    exist (returned flag).  Nonexistent benefit/contribution/Banzhaf raise."""
    if concept == "shapley":
        return shapley(v), False
    if concept == "nucleolus":
        return nucleolus(v), False
    if concept == "banzhaf":
        result = banzhaf(v).normalized
        if result is None:
            raise UndefinedConceptError("banzhaf", "zero normalizer")
        return result, False
    if concept == "tau":
        result = tau(v)
        if result is not None:
            return result, False
        fallback = benefit(v)
        if fallback is None:
            raise UndefinedConceptError("tau", "not quasibalanced and benefit undefined")
        return fallback, True
    if concept == "benefit":
        result = benefit(v)
        if result is None:
            raise UndefinedConceptError("benefit", "zero denominator")
        return result, False
    if concept == "contribution":
        result = contribution(v)
        if result is None:
            raise UndefinedConceptError("contribution", "zero denominator")
        return result, False
    raise CreditError(f"unknown concept {concept!r}")


def initial_allocation(v: CharacteristicFunction, concept: str, regime: str,
                       c: CreditLedger) -> tuple[Allocation, bool]:
    """Round allocation in kidney units (scaled by two).

    Additive regime: the concept on the round's game, credits added later by
    the caller.  Credit-adjusted regime: the concept on the doubled game with
    credits folded in; the result is the target itself.
    """
    if regime not in REGIMES:
        raise CreditError(f"unknown regime {regime!r}")
    if regime == ADDITIVE_CREDITS:
        alloc, fell_back = concept_allocation(v, concept)
        return alloc.scaled(2.0), fell_back
    adjusted = credit_adjusted_game(v.scaled(2.0), c.credits)
    return concept_allocation(adjusted, concept)


@dataclass(frozen=True)
class RoundRecord:
    """Audit record of one simulated round.

    ``y`` is the round's initial allocation (in the credit-adjusted regime:
    target minus credits, so x = y + c holds in every regime), ``x`` the
    target, ``s`` the realized matched counts.
    """

    h: int
    concept: str
    scenario: str
    y: np.ndarray
    c: np.ndarray
    x: np.ndarray
    s: np.ndarray
    matching_edges: tuple[tuple[int, int], ...]
    mu: int
    tau_fallback: bool = False
    convex: bool | None = None
    quasibalanced: bool | None = None
    tau_equals_benefit: bool | None = None
    timings: dict = field(default_factory=dict)

    def __post_init__(self):
        for name in ("y", "c", "x", "s"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=np.float64))
        if np.max(np.abs(self.y + self.c - self.x)) > SUM_TOL:
            raise CreditError("round record must satisfy x = y + c")

    def to_dict(self, with_timings: bool = True) -> dict:
        out = {
            "h": self.h,
            "concept": self.concept,
            "scenario": self.scenario,
            "y": self.y.tolist(),
            "c": self.c.tolist(),
            "x": self.x.tolist(),
            "s": self.s.tolist(),
            "matching": [list(e) for e in self.matching_edges],
            "mu": self.mu,
            "tau_fallback": self.tau_fallback,
            "convex": self.convex,
            "quasibalanced": self.quasibalanced,
            "tau_equals_benefit": self.tau_equals_benefit,
        }
        if with_timings:
            # wall-clock profiling; excluded when byte-stable output matters
            out["timings"] = {k: float(t) for k, t in self.timings.items()}
        return out

    @staticmethod
    def from_dict(d: dict) -> "RoundRecord":
        return RoundRecord(
            h=int(d["h"]), concept=d["concept"], scenario=d["scenario"],
            y=np.asarray(d["y"]), c=np.asarray(d["c"]), x=np.asarray(d["x"]),
            s=np.asarray(d["s"]),
            matching_edges=tuple(tuple(e) for e in d["matching"]),
            mu=int(d["mu"]), tau_fallback=bool(d["tau_fallback"]),
            convex=d.get("convex"), quasibalanced=d.get("quasibalanced"),
            tau_equals_benefit=d.get("tau_equals_benefit"),
            timings=dict(d.get("timings", {})),
        )
