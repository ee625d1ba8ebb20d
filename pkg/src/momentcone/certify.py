"""Cutting-plane certification of strict T-positivity of a Riesz functional.

All LPs are solved in their dual form: one row per index (two for the l1
ball), one column per sample point. The polynomial is read off the simplex
multipliers, so large sample sets only add columns.
"""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .core import (IndexSet, MomentVector, PolynomialI, is_regular_index_set, monomials,
                   poly_norm, riesz_apply)
from .errors import IrregularIndexSet, MalformedInput, NumericalBreakdown
from .lp import LinearProgram, Status, solve
from .regions import SupportRegion, sample_grid

log = logging.getLogger(__name__)

STRICTLY_POSITIVE = "StrictlyPositive"
DEGENERATE = "Degenerate"
NEGATIVE_WITNESS = "NegativeWitness"


def default_resolution(dim: int) -> int:
    return 512 if dim == 1 else 128 if dim == 2 else 24


@dataclass
class CertifyParams:
    eta: float = 1e-7
    tol_pos: float = 1e-6
    resolution: Optional[int] = None
    max_cuts: int = 200
    refine_rounds: int = 30
    # exact l1 margins need one LP per sign orthant of the coefficient vector
    orthant_max_dim: int = 6
    # passes of local sample refinement around the touching point of a degenerate witness
    degenerate_refinements: int = 4


@dataclass
class PositivityCertificate:
    verdict: str
    margin: float
    minimizer: PolynomialI
    riesz_value: float
    min_on_T: float
    constraint_points: np.ndarray
    resolution_used: int
    cuts_used: int
    converged: bool = True
    margin_exact: bool = True
    lp_history: dict = field(default_factory=dict)

    @property
    def witness(self) -> Optional[PolynomialI]:
        return None if self.verdict == STRICTLY_POSITIVE else self.minimizer


def min_poly_on_region(p: PolynomialI, T: SupportRegion, resolution: int,
                       rounds: int = 30, starts: int = 8) -> tuple[np.ndarray, float]:
    """Grid scan then coordinate-wise trisection around the lowest grid points.

    The returned value is an upper bound on min_T p. Ties on the grid go to
    the lowest index.
    """
    grid = sample_grid(T, resolution)
    vals = monomials(p.index_set, grid.points) @ p.values
    lo, hi = T.bounding_box()
    step = (hi - lo) / (resolution - 1)
    order = np.argsort(vals, kind="stable")[:starts]
    best_t, best_v = grid.points[order[0]].copy(), float(vals[order[0]])
    coeffs = p.values

    def f(pts):
        out = monomials(p.index_set, pts) @ coeffs
        return np.where(T.contains(pts), out, np.inf)

    for k in order:
        t, v = _trisect(f, grid.points[k], float(vals[k]), lo, hi, step, rounds)
        if v < best_v:
            best_t, best_v = t, v
    return best_t, best_v


def _trisect(f, t0, v0, lo, hi, step, rounds):
    t = t0.copy()
    v = v0
    a = np.maximum(t0 - step, lo)
    b = np.minimum(t0 + step, hi)
    n = t.shape[0]
    for _ in range(rounds):
        for axis in range(n):
            m1 = a[axis] + (b[axis] - a[axis]) / 3
            m2 = b[axis] - (b[axis] - a[axis]) / 3
            trial = np.repeat(t[None, :], 2, axis=0)
            trial[0, axis], trial[1, axis] = m1, m2
            f1, f2 = f(trial)
            if f1 <= f2:
                b[axis] = m2
                cand, fc = trial[0], f1
            else:
                a[axis] = m1
                cand, fc = trial[1], f2
            if fc < v:
                t, v = cand.copy(), float(fc)
    mid = 0.5 * (a + b)
    fm = f(mid[None, :])[0]
    if fm < v:
        t, v = mid, float(fm)
    return t, v


# LPs over a finite sample set S (V has one row per point) ------------------

def _lp_normalized(V, g, ell):
    """min g.p  s.t.  V p >= 0, ell.p = 1.  Returns (value, p)."""
    n_pts, N = V.shape
    c = np.zeros(n_pts + 1)
    c[-1] = -1.0
    A = np.hstack([V.T, ell[:, None]])
    bounds = [(0.0, None)] * n_pts + [(None, None)]
    sol = solve(LinearProgram(c, A, g, bounds=bounds))
    if sol.status is not Status.OPTIMAL:
        raise NumericalBreakdown(f"normalized LP returned {sol.status.value}")
    return -sol.objective_value, -sol.duals_eq


def _lp_l1_ball(V, g):
    """min g.p  s.t.  V p >= 0, |p|_1 <= 1.  Returns (value, p)."""
    n_pts, N = V.shape
    c = np.zeros(n_pts + 1)
    c[-1] = 1.0
    ones = np.ones((N, 1))
    A = np.vstack([np.hstack([V.T, ones]), np.hstack([-V.T, ones])])
    b = np.concatenate([g, -g])
    sol = solve(LinearProgram(c, A_ineq=A, b_ineq=b))
    if sol.status is not Status.OPTIMAL:
        raise NumericalBreakdown(f"l1-ball LP returned {sol.status.value}")
    alpha, beta = sol.duals_ineq[:N], sol.duals_ineq[N:]
    return -sol.objective_value, beta - alpha


def _lp_orthants(V, g):
    """min over sign patterns s of: min g.p s.t. V p >= 0, s_i p_i >= 0, s.p = 1."""
    n_pts, N = V.shape
    best = (np.inf, None)
    c = np.zeros(n_pts + N + 1)
    c[-1] = -1.0
    bounds = [(0.0, None)] * (n_pts + N) + [(None, None)]
    for signs in itertools.product((1.0, -1.0), repeat=N):
        s = np.array(signs)
        A = np.hstack([V.T, np.diag(s), s[:, None]])
        sol = solve(LinearProgram(c, A, g, bounds=bounds))
        if sol.status is not Status.OPTIMAL:
            continue
        value = -sol.objective_value
        if value < best[0]:
            best = (value, -sol.duals_eq)
    if best[1] is None:
        raise NumericalBreakdown("no orthant LP was solvable")
    return best


def _local_patch(T: SupportRegion, center: np.ndarray, half: np.ndarray) -> np.ndarray:
    """Small tensor mesh of points of T around ``center``."""
    n = center.shape[0]
    per_axis = 17 if n == 1 else 9 if n == 2 else 5
    axes = [np.linspace(center[k] - half[k], center[k] + half[k], per_axis) for k in range(n)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    return pts[T.contains(pts)]


def certify(g: MomentVector, T: SupportRegion,
            params: Optional[CertifyParams] = None) -> PositivityCertificate:
    """Decide strict positivity of phi_g on T-nonnegative polynomials over I."""
    params = params or CertifyParams()
    I = g.index_set
    if not is_regular_index_set(I):
        raise IrregularIndexSet("index set is not closed under sigma")
    if abs(g.g0 - 1.0) > 1e-12:
        raise MalformedInput(f"g_0 must be 1, got {g.g0}")
    if I.dim != T.dim:
        raise MalformedInput("moment and support dimensions differ")
    res = params.resolution or default_resolution(T.dim)
    grid = sample_grid(T, res)
    S = grid.points.copy()
    V = monomials(I, S)
    # Riemann sum of the integral over T: positive on the cone of the grid
    ell = grid.cell_volume * V.sum(axis=0)
    gv = g.values
    N = len(I)
    history = {"normalized": [], "l1_ball": [], "orthant": []}
    phase = "normalized"
    cuts = 0
    converged = True
    lo, hi = T.bounding_box()
    spacing = (np.asarray(hi, float) - np.asarray(lo, float)) / max(res - 1, 1)
    refinements = 0
    while True:
        if phase == "normalized":
            lp_value, p = _lp_normalized(V, gv, ell)
        elif phase == "l1_ball":
            lp_value, p = _lp_l1_ball(V, gv)
        else:
            lp_value, p = _lp_orthants(V, gv)
        history[phase].append(float(lp_value))
        q = PolynomialI(I, p / np.abs(p).sum())
        value = riesz_apply(g, q)
        t_star, m = min_poly_on_region(q, T, res, rounds=params.refine_rounds)
        if m < -params.eta:
            if cuts >= params.max_cuts:
                log.warning("cut budget of %d exhausted", params.max_cuts)
                converged = False
            elif np.any(np.all(S == t_star, axis=1)):
                log.warning("separation point already in the sample set; stopping")
                converged = False
            else:
                S = np.vstack([S, t_star])
                V = np.vstack([V, monomials(I, t_star[None, :])])
                cuts += 1
                continue
        if converged:
            if phase == "normalized" and value < -params.tol_pos:
                phase = "l1_ball"
                continue
            if phase == "l1_ball" and value >= -params.tol_pos:
                phase = "normalized"
                continue
            if phase == "normalized" and value > params.tol_pos and N <= params.orthant_max_dim:
                phase = "orthant"
                continue
            if abs(value) <= params.tol_pos and refinements < params.degenerate_refinements:
                patch = _local_patch(T, t_star, spacing / 8.0 ** refinements)
                if patch.shape[0]:
                    S = np.vstack([S, patch])
                    V = np.vstack([V, monomials(I, patch)])
                refinements += 1
                continue
        break
    if value > params.tol_pos:
        verdict = STRICTLY_POSITIVE
    elif value < -params.tol_pos:
        verdict = NEGATIVE_WITNESS
    else:
        verdict = DEGENERATE
    exact = phase != "normalized" or verdict == DEGENERATE
    return PositivityCertificate(
        verdict=verdict, margin=value, minimizer=q, riesz_value=value, min_on_T=m,
        constraint_points=S, resolution_used=res, cuts_used=cuts, converged=converged,
        margin_exact=exact, lp_history=history)


def _l1_sphere_mesh(N: int, samples: int) -> tuple[np.ndarray, int]:
    m = 1
    while 2 ** N * _n_compositions(m, N) < samples:
        m += 1
    comps = []
    for bars in itertools.combinations(range(m + N - 1), N - 1):
        edges = (-1,) + bars + (m + N - 1,)
        comps.append([edges[k + 1] - edges[k] - 1 for k in range(N)])
    comps = np.array(comps, dtype=float) / m
    pts = np.vstack([comps * np.array(s) for s in itertools.product((1.0, -1.0), repeat=N)])
    return np.unique(pts, axis=0), m


def _n_compositions(m, N):
    from math import comb
    return comb(m + N - 1, N - 1)


def brute_force_margin(g: MomentVector, T: SupportRegion, sphere_samples: int = 10_000,
                       resolution: int = 2001, eta: float = 1e-7,
                       refine_rounds: int = 200, starts: int = 20) -> float:
    """Independent oracle: min of phi_g over T-nonnegative p on an l1-sphere mesh.

    Each mesh point p is lifted to p + max(0, -min p) (constant term), which is
    nonnegative on the dense grid, then renormalized. The best lifted points
    are improved by a shrinking coordinate pattern search over the same map.
    """
    I = g.index_set
    N = len(I)
    if N > 5:
        raise ValueError("brute-force oracle is limited to |I| <= 5")
    M = monomials(I, sample_grid(T, resolution).points)
    gv = g.values
    k0 = I.position(I.zero)

    def lifted_values(P):
        out = np.empty(P.shape[0])
        for k in range(0, P.shape[0], 2048):
            Q = P[k:k + 2048].copy()
            Q[:, k0] += np.maximum(0.0, -(Q @ M.T).min(axis=1))
            # near-constant negative p lift to ~0; their ratio is pure rounding
            norms = np.abs(Q).sum(axis=1) / np.abs(P[k:k + 2048]).sum(axis=1)
            ok = norms > 1e-6
            out[k:k + 2048] = np.where(ok, (Q @ gv) / np.where(ok, norms, 1.0)
                                       / np.abs(P[k:k + 2048]).sum(axis=1), np.inf)
        return out

    mesh, m = _l1_sphere_mesh(N, sphere_samples)
    vals = lifted_values(mesh)
    best_val = np.inf
    pairs = [sa * np.eye(N)[a] + sb * np.eye(N)[b]
             for a, b in itertools.combinations(range(N), 2)
             for sa, sb in itertools.product((1.0, -1.0), repeat=2)]
    directions = np.vstack([np.eye(N), -np.eye(N)] + ([np.array(pairs)] if pairs else []))
    for k in np.argsort(vals, kind="stable")[:starts]:
        x, fx = mesh[k].copy(), float(vals[k])
        step = 0.5 / m
        for _ in range(refine_rounds):
            cand = x + step * directions
            cv = lifted_values(cand)
            j = int(np.argmin(cv))
            if cv[j] < fx:
                x, fx = cand[j] / np.abs(cand[j]).sum(), float(cv[j])
            else:
                step *= 0.5
                if step < 1e-10:
                    break
        best_val = min(best_val, fx)
    return best_val
