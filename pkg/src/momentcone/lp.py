"""Dense two-phase revised simplex with bounded variables.

Problems handled here are small in the row dimension (tens of rows) but may
have many columns, so the basis is refactorized with LU on every pivot and
pricing is a single dense matrix-vector product.
"""
from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.linalg import lu_factor, lu_solve

from .errors import NumericalBreakdown, RankDeficient

log = logging.getLogger(__name__)

FEAS_TOL = 1e-9


class Status(str, enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass
class LinearProgram:
    """minimize c.x  s.t.  A_eq x = b_eq,  A_ineq x >= b_ineq,  lo <= x <= hi.

    ``bounds`` is a list of (lo, hi) pairs with ``None`` for an infinite
    bound. When omitted every variable is nonnegative.
    """

    c: np.ndarray
    A_eq: Optional[np.ndarray] = None
    b_eq: Optional[np.ndarray] = None
    A_ineq: Optional[np.ndarray] = None
    b_ineq: Optional[np.ndarray] = None
    bounds: Optional[Sequence[tuple]] = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).reshape(-1)
        n = self.c.shape[0]
        self.A_eq, self.b_eq = _rows(self.A_eq, self.b_eq, n, "equality")
        self.A_ineq, self.b_ineq = _rows(self.A_ineq, self.b_ineq, n, "inequality")
        if self.bounds is None:
            self.lo = np.zeros(n)
            self.hi = np.full(n, np.inf)
        else:
            if len(self.bounds) != n:
                raise ValueError("bounds length does not match number of variables")
            self.lo = np.array([-np.inf if b[0] is None else b[0] for b in self.bounds], float)
            self.hi = np.array([np.inf if b[1] is None else b[1] for b in self.bounds], float)
        for name in ("c", "A_eq", "b_eq", "A_ineq", "b_ineq"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"{name} has non-finite entries")

    @property
    def num_vars(self) -> int:
        return self.c.shape[0]


def _rows(A, b, n, what):
    if A is None:
        return np.zeros((0, n)), np.zeros(0)
    A = np.asarray(A, dtype=float)
    A = A.reshape(-1, n) if A.size else np.zeros((0, n))
    b = np.asarray(b, dtype=float).reshape(-1)
    if A.shape[0] != b.shape[0]:
        raise ValueError(f"{what} matrix and rhs disagree in length")
    return A, b


@dataclass
class LpSolution:
    status: Status
    x: np.ndarray
    objective_value: float
    max_constraint_violation: float
    duals_eq: np.ndarray = field(default_factory=lambda: np.zeros(0))
    duals_ineq: np.ndarray = field(default_factory=lambda: np.zeros(0))
    duality_gap: float = float("nan")
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


class _StandardForm:
    """min c'x' + const, A'x' = b' (b' >= 0), 0 <= x' <= u'."""

    def __init__(self, lp: LinearProgram):
        n = lp.num_vars
        A_rows = np.vstack([lp.A_eq, lp.A_ineq])
        b_rows = np.concatenate([lp.b_eq, lp.b_ineq])
        m = A_rows.shape[0]
        cols, costs, ubs = [], [], []
        # (original var, column, sign) triples: x_j = x0_j + sign * x'_col
        self.var_map = []
        x0 = np.zeros(n)
        for j in range(n):
            lo, hi = lp.lo[j], lp.hi[j]
            if np.isfinite(lo):
                x0[j] = lo
                self.var_map.append((j, len(cols), 1.0))
                cols.append(A_rows[:, j]); costs.append(lp.c[j]); ubs.append(hi - lo)
            elif np.isfinite(hi):
                x0[j] = hi
                self.var_map.append((j, len(cols), -1.0))
                cols.append(-A_rows[:, j]); costs.append(-lp.c[j]); ubs.append(np.inf)
            else:
                self.var_map.append((j, len(cols), 1.0))
                cols.append(A_rows[:, j]); costs.append(lp.c[j]); ubs.append(np.inf)
                self.var_map.append((j, len(cols), -1.0))
                cols.append(-A_rows[:, j]); costs.append(-lp.c[j]); ubs.append(np.inf)
        n_eq = lp.A_eq.shape[0]
        for r in range(lp.A_ineq.shape[0]):
            col = np.zeros(m)
            col[n_eq + r] = -1.0
            cols.append(col); costs.append(0.0); ubs.append(np.inf)
        A = np.column_stack(cols) if cols else np.zeros((m, 0))
        b = b_rows - A_rows @ x0
        self.row_sign = np.where(b < 0, -1.0, 1.0)
        self.A = A * self.row_sign[:, None]
        self.b = b * self.row_sign
        self.c = np.array(costs, dtype=float)
        self.u = np.array(ubs, dtype=float)
        self.const = float(lp.c @ x0)
        self.x0 = x0
        self.n_orig = n

    def recover_x(self, xs: np.ndarray) -> np.ndarray:
        x = self.x0.copy()
        for j, col, sign in self.var_map:
            x[j] += sign * xs[col]
        return x


class _Simplex:
    def __init__(self, A, b, c, u, max_iter, degenerate_switch=50):
        self.A, self.b, self.c, self.u = A, b, c, u
        self.m, self.n = A.shape
        self.max_iter = max_iter
        self.degenerate_switch = degenerate_switch
        self.iterations = 0
        self.pivots = []

    def _factor(self, basis):
        B = self.A[:, basis]
        lu, piv = lu_factor(B, check_finite=False)
        diag = np.abs(np.diag(lu))
        if diag.size and (diag.min() <= 1e-14 * max(1.0, diag.max())):
            raise NumericalBreakdown(
                "ill-conditioned basis", min_pivot=float(diag.min()),
                max_pivot=float(diag.max()), iteration=self.iterations)
        return lu, piv

    def run(self, cost, basis, at_upper, active):
        """Iterate to optimality for ``cost``. Returns 'optimal' or 'unbounded'."""
        A, u = self.A, self.u
        cscale = 1.0 + float(np.abs(cost).max(initial=0.0))
        dtol = 1e-10 * cscale
        bland = False
        degenerate_run = 0
        is_basic = np.zeros(self.n, bool)
        is_basic[basis] = True
        while True:
            if self.iterations >= self.max_iter:
                raise NumericalBreakdown("simplex iteration limit reached",
                                         iterations=self.iterations)
            lu = self._factor(basis)
            rhs = self.b - A[:, at_upper] @ u[at_upper] if at_upper.any() else self.b
            xB = lu_solve(lu, rhs, check_finite=False)
            pi = lu_solve(lu, cost[basis], trans=1, check_finite=False)
            d = cost - A.T @ pi
            nonbasic = active & ~is_basic
            up = nonbasic & ~at_upper & (d < -dtol)
            down = nonbasic & at_upper & (d > dtol)
            eligible = up | down
            if not eligible.any():
                self.xB, self.pi, self.d = xB, pi, d
                return "optimal"
            idx = np.flatnonzero(eligible)
            if bland:
                q = int(idx[0])
            else:
                q = int(idx[np.argmax(np.abs(d[idx]))])
            alpha = lu_solve(lu, A[:, q], check_finite=False)
            direction = 1.0 if up[q] else -1.0
            rate = -direction * alpha
            ptol = 1e-11 * max(1.0, float(np.abs(alpha).max()))
            theta = u[q]
            leave, leave_upper = -1, False
            ub_basic = u[basis]
            dec = rate < -ptol
            inc = (rate > ptol) & np.isfinite(ub_basic)
            ratios = np.full(self.m, np.inf)
            ratios[dec] = np.maximum(xB[dec], 0.0) / -rate[dec]
            ratios[inc] = np.maximum(ub_basic[inc] - xB[inc], 0.0) / rate[inc]
            if np.isfinite(ratios).any():
                rmin = ratios.min()
                if rmin < theta:
                    ties = np.flatnonzero(ratios <= rmin + 1e-12 * max(1.0, rmin))
                    r = int(ties[np.argmin(np.asarray(basis)[ties])])
                    leave, leave_upper, theta = r, bool(inc[r]), ratios[r]
            if not np.isfinite(theta):
                self.ray = (q, direction, alpha)
                return "unbounded"
            self.iterations += 1
            if leave < 0:
                at_upper[q] = not at_upper[q]
                self.pivots.append((q, -1))
            else:
                out = basis[leave]
                self.pivots.append((q, out))
                is_basic[out] = False
                at_upper[out] = leave_upper
                basis[leave] = q
                is_basic[q] = True
                at_upper[q] = False
            if theta <= 1e-12:
                degenerate_run += 1
                if degenerate_run > self.degenerate_switch:
                    bland = True
            else:
                degenerate_run = 0


def solve(lp: LinearProgram, feas_tol: float = FEAS_TOL,
          max_iter: Optional[int] = None) -> LpSolution:
    """Solve ``lp``. Deterministic: identical inputs give identical pivots."""
    sf = _StandardForm(lp)
    m, n = sf.A.shape
    n_eq = lp.A_eq.shape[0]
    if max_iter is None:
        max_iter = 50 * (m + n) + 1000
    if m == 0:
        return _solve_no_rows(lp, sf, feas_tol)

    # phase 1 on [A | I]
    A1 = np.hstack([sf.A, np.eye(m)])
    u1 = np.concatenate([sf.u, np.full(m, np.inf)])
    c1 = np.concatenate([np.zeros(n), np.ones(m)])
    sx = _Simplex(A1, sf.b, c1, u1, max_iter)
    basis = list(range(n, n + m))
    at_upper = np.zeros(n + m, bool)
    active = np.ones(n + m, bool)
    sx.run(c1, basis, at_upper, active)
    infeas = float(c1[basis] @ sx.xB)
    bscale = 1.0 + float(np.abs(sf.b).max())
    if infeas > feas_tol * bscale:
        x = sf.recover_x(_assemble(sx, basis, at_upper)[:n])
        return LpSolution(Status.INFEASIBLE, x, float("nan"),
                          _violation(lp, x), iterations=sx.iterations)

    # drive artificials out of the basis where possible
    lu = sx._factor(basis)
    for r in range(m):
        if basis[r] < n:
            continue
        e = np.zeros(m)
        e[r] = 1.0
        row = lu_solve(lu, e, trans=1, check_finite=False) @ sf.A
        row[[b for b in basis if b < n]] = 0.0
        cand = np.flatnonzero(np.abs(row) > 1e-7 * max(1.0, np.abs(row).max(initial=0)))
        if cand.size:
            basis[r] = int(cand[0])
            lu = sx._factor(basis)
    # artificials are now fixed at zero
    sx.u = u1.copy()
    sx.u[n:] = 0.0
    active[n:] = False
    at_upper[n:] = False
    c2 = np.concatenate([sf.c, np.zeros(m)])
    status = sx.run(c2, basis, at_upper, active)
    xs = _assemble(sx, basis, at_upper)
    x = sf.recover_x(xs[:n])
    if status == "unbounded":
        return LpSolution(Status.UNBOUNDED, x, float("-inf"), _violation(lp, x),
                          iterations=sx.iterations)
    obj = float(lp.c @ x)
    pi = sx.pi * sf.row_sign
    d = sx.d[:n]
    finite_u = np.isfinite(sf.u) & active[:n]
    dual_obj = float(sf.b @ sx.pi) + float(
        np.sum(sf.u[finite_u] * np.minimum(d[finite_u], 0.0))) + sf.const
    return LpSolution(Status.OPTIMAL, x, obj, _violation(lp, x),
                      duals_eq=pi[:n_eq], duals_ineq=pi[n_eq:],
                      duality_gap=abs(obj - dual_obj), iterations=sx.iterations)


def _assemble(sx, basis, at_upper):
    xs = np.zeros(sx.n)
    xs[at_upper] = sx.u[at_upper]
    xs[basis] = sx.xB
    return xs


def _solve_no_rows(lp, sf, feas_tol):
    # separable: each standard-form column sits at whichever bound its cost prefers
    xs = np.zeros(sf.A.shape[1])
    for k, (cost, ub) in enumerate(zip(sf.c, sf.u)):
        if cost < 0:
            if not np.isfinite(ub):
                x = sf.recover_x(xs)
                return LpSolution(Status.UNBOUNDED, x, float("-inf"), _violation(lp, x))
            xs[k] = ub
    x = sf.recover_x(xs)
    return LpSolution(Status.OPTIMAL, x, float(lp.c @ x), _violation(lp, x),
                      duality_gap=0.0)


def _violation(lp: LinearProgram, x: np.ndarray) -> float:
    v = [0.0]
    if lp.A_eq.shape[0]:
        v.append(float(np.abs(lp.A_eq @ x - lp.b_eq).max()))
    if lp.A_ineq.shape[0]:
        v.append(float(np.maximum(lp.b_ineq - lp.A_ineq @ x, 0).max()))
    v.append(float(np.maximum(lp.lo - x, 0).max(initial=0.0)))
    v.append(float(np.maximum(x - lp.hi, 0).max(initial=0.0)))
    return max(v)


def matrix_rank(A, rtol: float = 1e-10) -> int:
    """Rank by Gaussian elimination with complete pivoting."""
    M = np.array(A, dtype=float, copy=True)
    if M.size == 0:
        return 0
    scale = np.abs(M).max()
    if scale == 0:
        return 0
    M /= scale
    rows, cols = M.shape
    rank = 0
    for k in range(min(rows, cols)):
        sub = np.abs(M[k:, k:])
        r, c = np.unravel_index(np.argmax(sub), sub.shape)
        if sub[r, c] <= rtol:
            break
        r += k
        c += k
        M[[k, r]] = M[[r, k]]
        M[:, [k, c]] = M[:, [c, k]]
        M[k + 1:, k:] -= np.outer(M[k + 1:, k] / M[k, k], M[k, k:])
        rank += 1
    return rank


def min_sup_norm_solve(A, b, feas_tol: float = FEAS_TOL) -> np.ndarray:
    """Return x minimizing max|x_j| subject to A x = b.

    Solved as: maximize s subject to 2 A w - s b = A 1, 0 <= w <= 1, s >= 0,
    then x = (2w - 1) / s. This keeps the LP at one row per equation.
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float).reshape(-1)
    m, n = A.shape
    if b.shape[0] != m:
        raise ValueError("A and b disagree in length")
    rank = matrix_rank(A)
    if rank < m:
        raise RankDeficient(f"row rank {rank} < {m} rows", rank=rank, rows=m)
    if not np.any(b):
        return np.zeros(n)
    # equilibrate rows and normalize b; the minimizer scales back linearly
    A_raw, b_raw = A, b
    row = np.abs(A).max(axis=1)
    A = A / row[:, None]
    b = b / row
    scale = np.abs(b).max()
    b = b / scale
    c = np.zeros(n + 1)
    c[-1] = -1.0
    A_eq = np.hstack([2.0 * A, -b[:, None]])
    b_eq = A @ np.ones(n)
    bounds = [(0.0, 1.0)] * n + [(0.0, None)]
    sol = solve(LinearProgram(c, A_eq, b_eq, bounds=bounds), feas_tol=feas_tol)
    if not sol.optimal or sol.x[-1] <= 0:
        raise NumericalBreakdown("min-sup-norm LP failed", status=sol.status.value)
    s = sol.x[-1]
    x = (2.0 * sol.x[:n] - 1.0) / s
    return _polish(A_raw, b_raw, scale * _polish(A, b, x))


def _polish(A, b, x):
    """Remove residual rounding in A x = b by adjusting the unsaturated entries."""
    w = np.abs(x).max()
    free = np.abs(x) < w * (1 - 1e-9)
    r = b - A @ x
    if not free.any() or not np.any(r):
        return x
    dx, *_ = np.linalg.lstsq(A[:, free], r, rcond=None)
    y = x.copy()
    y[free] += dx
    if np.abs(y).max() <= w * (1 + 1e-12) and (
            np.abs(b - A @ y).max() <= np.abs(r).max()):
        return y
    return x
