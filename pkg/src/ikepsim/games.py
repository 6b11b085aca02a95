"""Coalition value tables for partitioned matching games, and game transforms.

Coalitions are bitmasks over countries; ``values[S]`` is the maximum matching
size of the subgraph induced by the countries in S (real-valued so that
credit-adjusted tables reuse the type).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .graph import CompatibilityGraph

DEFAULT_COUNTRY_CAP = 15
HARD_COUNTRY_CAP = 20
SUM_TOL = 1e-9


class GameError(ValueError):
    pass


@dataclass(frozen=True)
class CharacteristicFunction:
    """Value table of a cooperative game, indexed by coalition bitmask."""

    n: int
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", np.asarray(self.values, dtype=np.float64))
        if self.values.shape != (1 << self.n,):
            raise GameError(f"expected {1 << self.n} values for n={self.n}")
        if abs(self.values[0]) > SUM_TOL:
            raise GameError("value of the empty coalition must be 0")

    @property
    def grand(self) -> int:
        return (1 << self.n) - 1

    def value(self, coalition: int) -> float:
        return float(self.values[coalition])

    def singleton_values(self) -> np.ndarray:
        return self.values[1 << np.arange(self.n)]

    def scaled(self, factor: float) -> "CharacteristicFunction":
        return CharacteristicFunction(self.n, self.values * factor)

    def to_dict(self) -> dict:
        return {"n": self.n, "values": [float(v) for v in self.values]}

    @staticmethod
    def from_dict(data: dict) -> "CharacteristicFunction":
        return CharacteristicFunction(int(data["n"]), np.asarray(data["values"]))


@dataclass(frozen=True)
class QuasibalanceProfile:
    """Utopia vector b, minimal-rights vector a."""

    a: np.ndarray
    b: np.ndarray


def coalition_sums(vec: np.ndarray) -> np.ndarray:
    """sums[S] = sum of vec[p] over the members of S, for every coalition S."""
    n = len(vec)
    masks = np.arange(1 << n, dtype=np.int64)
    out = np.zeros(1 << n, dtype=np.float64)
    for p in range(n):
        out += vec[p] * ((masks >> p) & 1)
    return out


def generate_game(g: CompatibilityGraph,
                  country_cap: int = DEFAULT_COUNTRY_CAP) -> CharacteristicFunction:
    """Build the value table v(S) = maximum matching size on G[V(S)]."""
    n = g.n_countries
    cap = min(country_cap, HARD_COUNTRY_CAP)
    if n > cap:
        raise GameError(
            f"{n} countries means 2^{n} coalition evaluations; cap is {cap}")
    values = _kernels.game_table(g.indptr, g.indices, g.country, n)
    return CharacteristicFunction(n, values)


def is_convex(v: CharacteristicFunction, tol: float = SUM_TOL) -> bool:
    """Supermodularity via pairwise increments:
    v(S+i) - v(S) <= v(S+i+j) - v(S+j) for all S and i, j outside S."""
    n = v.n
    vals = v.values
    masks = np.arange(1 << n, dtype=np.int64)
    for i in range(n):
        bi = 1 << i
        for j in range(i + 1, n):
            bj = 1 << j
            s = masks[(masks & (bi | bj)) == 0]
            lhs = vals[s | bi] - vals[s]
            rhs = vals[s | bi | bj] - vals[s | bj]
            if np.any(lhs > rhs + tol):
                return False
    return True


def utopia_vector(v: CharacteristicFunction) -> np.ndarray:
    """b_p = v(N) - v(N minus p)."""
    n = v.n
    grand = v.grand
    drop = grand ^ (1 << np.arange(n))
    return v.values[grand] - v.values[drop]


def minimal_rights_vector(v: CharacteristicFunction,
                          b: np.ndarray | None = None) -> np.ndarray:
    """a_p = max over coalitions S containing p of what remains for p after
    everyone else in S takes their utopia payoff."""
    n = v.n
    if b is None:
        b = utopia_vector(v)
    bsums = coalition_sums(b)
    masks = np.arange(1 << n, dtype=np.int64)
    a = np.empty(n)
    for p in range(n):
        with_p = masks[(masks >> p) & 1 == 1]
        remains = v.values[with_p] - bsums[with_p] + b[p]
        a[p] = remains.max()
    return a


def remains(v: CharacteristicFunction, coalition: int, p: int) -> float:
    """R(S, p) = v(S) - sum of utopia payoffs of the other members of S."""
    if not (coalition >> p) & 1:
        raise GameError("player must belong to the coalition")
    b = utopia_vector(v)
    others = coalition & ~(1 << p)
    total = sum(b[q] for q in range(v.n) if (others >> q) & 1)
    return float(v.values[coalition] - total)


def is_quasibalanced(v: CharacteristicFunction,
                     tol: float = SUM_TOL) -> tuple[bool, QuasibalanceProfile]:
    b = utopia_vector(v)
    a = minimal_rights_vector(v, b)
    ok = (np.all(a <= b + tol)
          and a.sum() <= v.values[v.grand] + tol
          and v.values[v.grand] <= b.sum() + tol)
    return bool(ok), QuasibalanceProfile(a=a, b=b)


def surplus(v: CharacteristicFunction) -> float:
    return float(v.values[v.grand] - v.singleton_values().sum())


def is_essential(v: CharacteristicFunction, tol: float = SUM_TOL) -> bool:
    return surplus(v) > tol


def credit_adjusted_game(v: CharacteristicFunction,
                         credits: np.ndarray) -> CharacteristicFunction:
    """Shift every coalition's value by the sum of its members' credits."""
    credits = np.asarray(credits, dtype=np.float64)
    if len(credits) != v.n:
        raise GameError("credit vector length must equal the player count")
    if abs(credits.sum()) > SUM_TOL:
        raise GameError("credits must sum to zero")
    return CharacteristicFunction(v.n, v.values + coalition_sums(credits))


def accumulate_games(games: list[CharacteristicFunction]) -> CharacteristicFunction:
    if not games:
        raise GameError("nothing to accumulate")
    n = games[0].n
    if any(g.n != n for g in games):
        raise GameError("all games must share the player count")
    total = np.zeros(1 << n)
    for g in games:
        total += g.values
    return CharacteristicFunction(n, total)


def is_superadditive(v: CharacteristicFunction, tol: float = SUM_TOL) -> bool:
    """Definitional check over all disjoint coalition pairs (test helper)."""
    n = v.n
    for s in range(1 << n):
        rest = (v.grand ^ s)
        t = rest
        while t:
            if v.values[s | t] + tol < v.values[s] + v.values[t]:
                return False
            t = (t - 1) & rest
        if v.values[s | 0] + tol < v.values[s]:
            return False
    return True


def is_convex_definitional(v: CharacteristicFunction, tol: float = SUM_TOL) -> bool:
    """O(4^n) definition over all coalition pairs (oracle for is_convex)."""
    vals = v.values
    for s in range(1 << v.n):
        for t in range(1 << v.n):
            if vals[s | t] + vals[s & t] + tol < vals[s] + vals[t]:
                return False
    return True
