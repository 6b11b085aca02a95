"""Small dense linear programming facility.

Tailored to games: a handful of variables against up to 2^n - 2 dense rows.
The user problem is canonicalized to  max f'x  s.t.  Gx <= h  (x free) and
solved through its dual  min h'y  s.t.  G'y = f, y >= 0  with a two-phase
revised simplex under Bland's anti-cycling rule, so the basis never grows
beyond the variable count.  The simplex multipliers of the optimal dual basis
are exactly the primal optimum.

An exact-rational mode (``exact=True``) re-runs the same pivoting over
`fractions.Fraction` and is used to certify floating results on small
fixtures.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

PIVOT_TOL = 1e-9
FEAS_TOL = 1e-8
REFACTOR_EVERY = 128

LE, EQ, GE = "<=", "=", ">="


class LpError(ValueError):
    pass


class DegeneracyError(RuntimeError):
    """Numerically degenerate pivoting; the result would not be trustworthy."""


@dataclass
class LinearProgram:
    """max/min c'x subject to rows A x (sense) b; variables free by default."""

    c: np.ndarray
    A: np.ndarray
    senses: Sequence[str]
    b: np.ndarray
    maximize: bool = True
    lower: Sequence[float | None] | None = None
    upper: Sequence[float | None] | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=np.float64)
        self.A = np.atleast_2d(np.asarray(self.A, dtype=np.float64))
        self.b = np.asarray(self.b, dtype=np.float64)
        m, n = self.A.shape
        if self.c.shape != (n,) or self.b.shape != (m,) or len(self.senses) != m:
            raise LpError("inconsistent dimensions")
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.A))
                and np.all(np.isfinite(self.b))):
            raise LpError("coefficients must be finite")
        for s in self.senses:
            if s not in (LE, EQ, GE):
                raise LpError(f"unknown sense {s!r}")


@dataclass(frozen=True)
class LpOptimal:
    x: np.ndarray
    value: float
    active_rows: tuple[int, ...]
    row_duals: np.ndarray = field(default=None, repr=False)


@dataclass(frozen=True)
class LpInfeasible:
    pass


@dataclass(frozen=True)
class LpUnbounded:
    pass


def _canonical(lp: LinearProgram):
    """Rows as (coeffs, rhs, orig_row, sign) for  max f'x  s.t.  Gx <= h."""
    f = lp.c if lp.maximize else -lp.c
    rows = []
    for i, sense in enumerate(lp.senses):
        if sense in (LE, EQ):
            rows.append((lp.A[i], lp.b[i], i, 1.0))
        if sense in (GE, EQ):
            rows.append((-lp.A[i], -lp.b[i], i, -1.0))
    n = len(lp.c)
    for bounds, sgn in ((lp.lower, -1.0), (lp.upper, 1.0)):
        if bounds is None:
            continue
        for j, bound in enumerate(bounds):
            if bound is None:
                continue
            row = np.zeros(n)
            row[j] = sgn
            rows.append((row, sgn * bound, -1, 0.0))
    G = np.vstack([r[0] for r in rows])
    h = np.array([r[1] for r in rows])
    origin = [(r[2], r[3]) for r in rows]
    return f, G, h, origin


def _simplex_standard(M, q, cost, exact):
    """min cost'z s.t. Mz = q, z >= 0  (two-phase revised simplex, Bland).

    Returns (status, z, pi, value) where pi are the equality multipliers of
    the optimal basis; status in {"optimal", "infeasible", "unbounded"}.
    """
    if exact:
        conv = np.vectorize(lambda x: Fraction(x).limit_denominator(10**12)
                            if not isinstance(x, Fraction) else x, otypes=[object])
        M = conv(np.asarray(M, dtype=object))
        q = conv(np.asarray(q, dtype=object))
        cost = conv(np.asarray(cost, dtype=object))
        zero = Fraction(0)
        pivot_tol = feas_tol = zero
    else:
        M = np.asarray(M, dtype=np.float64).copy()
        q = np.asarray(q, dtype=np.float64).copy()
        cost = np.asarray(cost, dtype=np.float64)
        zero = 0.0
        pivot_tol, feas_tol = PIVOT_TOL, FEAS_TOL

    m, n_real = M.shape
    flip = np.ones(m)
    for i in range(m):
        if q[i] < zero:
            M[i] = -M[i]
            q[i] = -q[i]
            flip[i] = -1.0

    if exact:
        aug = np.empty((m, n_real + m), dtype=object)
        aug[:, :n_real] = M
        aug[:, n_real:] = conv(np.eye(m))
        full_cost1 = np.array([zero] * n_real + [Fraction(1)] * m, dtype=object)
        full_cost2 = np.empty(n_real + m, dtype=object)
        full_cost2[:n_real] = cost
        full_cost2[n_real:] = zero
        binv = conv(np.eye(m))
    else:
        aug = np.hstack([M, np.eye(m)])
        full_cost1 = np.concatenate([np.zeros(n_real), np.ones(m)])
        full_cost2 = np.concatenate([cost, np.zeros(m)])
        binv = np.eye(m)

    basis = list(range(n_real, n_real + m))
    in_basis = np.zeros(n_real + m, dtype=bool)
    in_basis[n_real:] = True
    xb = q.copy()
    max_iters = 2000 + 40 * (m + n_real)

    def run(phase_cost, banned_from):
        nonlocal binv, xb
        iters = 0
        while True:
            iters += 1
            if iters > max_iters:
                raise DegeneracyError("simplex iteration limit hit (cycling?)")
            if not exact and iters % REFACTOR_EVERY == 0:
                bmat = aug[:, basis]
                try:
                    binv = np.linalg.inv(bmat)
                except np.linalg.LinAlgError as exc:
                    raise DegeneracyError("singular basis during refactor") from exc
                xb = binv @ q
            y = phase_cost[basis] @ binv
            reduced = phase_cost[:banned_from] - y @ aug[:, :banned_from]
            entering = -1
            if exact:
                for j in range(banned_from):
                    if reduced[j] < -pivot_tol and not in_basis[j]:
                        entering = j
                        break
            else:
                for j in np.flatnonzero(reduced < -pivot_tol):
                    if not in_basis[j]:
                        entering = int(j)
                        break
            if entering < 0:
                return True  # optimal for this phase
            d = binv @ aug[:, entering]
            theta = None
            leaving = -1
            for i in range(m):
                if d[i] > pivot_tol:
                    ratio = xb[i] / d[i]
                    if (theta is None or ratio < theta
                            or (ratio == theta and basis[i] < basis[leaving])):
                        theta = ratio
                        leaving = i
            if leaving < 0:
                return False  # unbounded direction
            piv = d[leaving]
            if not exact and abs(piv) <= pivot_tol:
                raise DegeneracyError("pivot below tolerance")
            binv[leaving] = binv[leaving] / piv
            xb[leaving] = xb[leaving] / piv
            for i in range(m):
                if i != leaving and d[i] != zero:
                    binv[i] = binv[i] - d[i] * binv[leaving]
                    xb[i] = xb[i] - d[i] * xb[leaving]
            in_basis[basis[leaving]] = False
            in_basis[entering] = True
            basis[leaving] = entering

    # Phase 1: drive artificials to zero.
    run(full_cost1, n_real + m)
    art_level = sum(xb[i] for i in range(m) if basis[i] >= n_real)
    if art_level > feas_tol:
        return "infeasible", None, None, None
    # Pivot basic artificials out where a real column is available; rows
    # where none is are redundant and the artificial stays pinned at zero.
    for i in range(m):
        if basis[i] >= n_real:
            row = binv[i] @ aug[:, :n_real]
            for j in range(n_real):
                if abs(row[j]) > (pivot_tol if not exact else zero) and not in_basis[j]:
                    d = binv @ aug[:, j]
                    piv = d[i]
                    if exact and piv == zero:
                        continue
                    binv[i] = binv[i] / piv
                    xb[i] = xb[i] / piv
                    for r in range(m):
                        if r != i and d[r] != zero:
                            binv[r] = binv[r] - d[r] * binv[i]
                            xb[r] = xb[r] - d[r] * xb[i]
                    in_basis[basis[i]] = False
                    in_basis[j] = True
                    basis[i] = j
                    break

    if not run(full_cost2, n_real):
        return "unbounded", None, None, None
    z = np.zeros(n_real, dtype=object if exact else np.float64)
    for i in range(m):
        if basis[i] < n_real:
            z[basis[i]] = xb[i]
    pi = full_cost2[basis] @ binv
    value = sum(cost[j] * z[j] for j in range(n_real))
    if exact:
        z = np.array([float(t) for t in z])
        pi = np.array([float(t) for t in pi])
        value = float(value)
    # multipliers of sign-flipped rows certify the flipped equality
    pi = np.asarray(pi, dtype=np.float64) * flip
    return "optimal", z, pi, float(value)


def solve_canonical(f: np.ndarray, G: np.ndarray, h: np.ndarray,
                    exact: bool = False):
    """max f'x s.t. Gx <= h with x free; fast path for prebuilt rows.

    Returns (status, x, value, y) where status is "optimal" / "infeasible" /
    "unbounded" and y holds the canonical row multipliers at the optimum.
    """
    status, y, pi, value = _simplex_standard(G.T, f, h, exact)
    if status == "unbounded":
        return "infeasible", None, None, None
    if status == "infeasible":
        fstatus, _, _, fvalue = _simplex_standard(G.T, np.zeros_like(f), h, exact)
        if fstatus == "optimal" and fvalue >= -FEAS_TOL:
            return "unbounded", None, None, None
        return "infeasible", None, None, None
    return "optimal", pi, value, y


def solve_lp(lp: LinearProgram, exact: bool = False):
    """Solve the LP; returns LpOptimal, LpInfeasible, or LpUnbounded.

    LpOptimal carries a vertex solution, the objective value in the problem's
    own orientation, the indices of user rows active at the optimum, and
    signed row duals of the canonical maximization; a row whose dual is
    nonzero binds in every optimal solution.
    """
    f, G, h, origin = _canonical(lp)
    status, x, value, y = solve_canonical(f, G, h, exact)
    if status == "infeasible":
        return LpInfeasible()
    if status == "unbounded":
        return LpUnbounded()

    resid = G @ x - h
    m_user = lp.A.shape[0]
    duals = np.zeros(m_user)
    for k, (orig, sign) in enumerate(origin):
        if orig >= 0:
            duals[orig] += sign * y[k]
    active = []
    for i in range(m_user):
        lhs = float(lp.A[i] @ x)
        if lp.senses[i] == EQ or abs(lhs - lp.b[i]) <= FEAS_TOL * max(1.0, abs(lp.b[i])):
            active.append(i)
    if np.any(resid > FEAS_TOL * np.maximum(1.0, np.abs(h))):
        raise DegeneracyError("recovered point violates feasibility tolerance")
    signed = value if lp.maximize else -value
    return LpOptimal(x=x, value=signed, active_rows=tuple(active), row_duals=duals)
