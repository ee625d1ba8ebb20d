"""Bounded perturbation of a positive density that shifts its moments by a given vector."""
from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .core import IndexSet, MomentVector
from .errors import BetaTooLarge, DegenerateDensity, KExhausted, RankDeficient
from .lp import matrix_rank, min_sup_norm_solve
from .quadrature import (CellFunction, Density, ExpTail, ScaledBallIndicator, default_tol,
                         density_moments, exp_tail_integrals)
from .regions import SupportRegion, box_integrals

log = logging.getLogger(__name__)

K_DOUBLINGS = 20


@dataclass(frozen=True, eq=False)
class PerturbationPlan:
    """Cells of T where f >= delta, and the moment map of their indicators."""

    index_set: IndexSet
    support: SupportRegion
    cells_lo: np.ndarray
    cells_hi: np.ndarray
    delta: float
    k0: float
    cell_moment_matrix: np.ndarray
    radius_estimate: float
    tol: float

    @property
    def num_cells(self) -> int:
        return self.cells_lo.shape[0]


@dataclass
class PerturbationResult:
    density: Density
    delta: float
    k: float
    u_sup: float
    v_sup: float
    target_shift: np.ndarray = field(repr=False)


def _boxes_overlap(alo, ahi, blo, bhi):
    return bool(np.all(alo < bhi) and np.all(blo < ahi))


def _subdivide(lo, hi, s):
    n = lo.shape[0]
    h = (hi - lo) / s
    idx = np.array(list(itertools.product(range(s), repeat=n)), dtype=float)
    clo = lo + idx * h
    return clo, clo + h


def candidate_cells(f: Density, T: SupportRegion, cells: int):
    """Disjoint boxes inside T on which f has a positive lower bound.

    Densities made of ball pieces get sub-cells of the cube inscribed in each
    ball (so cell sizes follow the ball radius); anything else gets a uniform
    grid over the bounding box of T.
    """
    n = T.dim
    balls = [c for c in f.components if isinstance(c, ScaledBallIndicator) and c.scale > 0]
    blo, bhi = T.bounding_box()
    los, his = [], []
    if balls:
        s = max(1, math.ceil((cells / len(balls)) ** (1.0 / n) - 1e-9))
        for ball in balls:
            c = np.array(ball.center)
            half = ball.radius / math.sqrt(n) * (1 - 1e-9)
            lo, hi = np.maximum(c - half, blo), np.minimum(c + half, bhi)
            if np.any(hi <= lo):
                continue
            clo, chi = _subdivide(lo, hi, s)
            los.append(clo)
            his.append(chi)
    else:
        s = max(1, math.ceil(cells ** (1.0 / n) - 1e-9))
        clo, chi = _subdivide(np.asarray(blo, float), np.asarray(bhi, float), s)
        los.append(clo)
        his.append(chi)
    lo, hi = np.vstack(los), np.vstack(his)
    keep_lo, keep_hi = [], []
    for a, b in zip(lo, hi):
        if not T.contains_box(a, b):
            continue
        if any(_boxes_overlap(a, b, c, d) for c, d in zip(keep_lo, keep_hi)):
            continue
        keep_lo.append(a)
        keep_hi.append(b)
    if not keep_lo:
        return np.zeros((0, n)), np.zeros((0, n))
    return np.array(keep_lo), np.array(keep_hi)


def plan_perturbation(f: Density, T: SupportRegion, index_set: IndexSet, cells: int,
                      tol: float | None = None) -> PerturbationPlan:
    """Pick delta = max(f)/2^m as large as possible with at least ``cells`` cells above it."""
    if cells < 1:
        raise ValueError("cells must be >= 1")
    lo, hi = candidate_cells(f, T, cells)
    lower = np.array([f.lower_bound(a, b) for a, b in zip(lo, hi)])
    if lower.size == 0 or lower.max() <= 0:
        raise DegenerateDensity("density has no cell with a positive lower bound")
    top = float(lower.max())
    delta = None
    for m in range(200):
        d = top / 2.0 ** m
        if d <= 0:
            break
        if np.count_nonzero(lower >= d) >= min(cells, lower.size):
            delta = d
            break
    if delta is None:
        raise DegenerateDensity("no positive threshold leaves enough cells")
    sel = lower >= delta
    lo, hi = lo[sel], hi[sel]
    A = box_integrals(lo, hi, index_set.as_array()).T
    N = len(index_set)
    if A.shape[1] < N or matrix_rank(A) < N:
        raise RankDeficient(f"cell moment matrix {A.shape} is rank deficient; use more cells",
                            rank=matrix_rank(A), rows=N)
    # ||v||_inf <= sum_k |beta_k| ||v(e_k)||_inf <= ||beta||_2 * ||(||v(e_k)||_inf)_k||_2
    col = np.array([np.abs(min_sup_norm_solve(A, e)).max() for e in np.eye(N)])
    r_hat = (delta / 4.0) / float(np.linalg.norm(col))
    k0 = max(delta, 2.0 * f.sup_estimate())
    return PerturbationPlan(index_set, T, lo, hi, delta, k0, A, r_hat,
                            tol if tol is not None else default_tol(T.dim))


def perturb_with_report(f: Density, plan: PerturbationPlan, beta) -> PerturbationResult:
    """g = f_k - u + v with f_k = f + (1/k) exp(-|t|), k >= 2 sup f so min(f, k) = f."""
    beta = np.asarray(beta.values if isinstance(beta, MomentVector) else beta, dtype=float)
    N = len(plan.index_set)
    if beta.shape != (N,):
        raise ValueError(f"beta must have {N} entries")
    A = plan.cell_moment_matrix
    quarter = plan.delta / 4.0
    v = min_sup_norm_solve(A, beta)
    v_sup = float(np.abs(v).max())
    if v_sup >= quarter:
        raise BetaTooLarge(f"|v|_inf = {v_sup:.3e} >= delta/4 = {quarter:.3e}",
                           v_sup=v_sup, delta=plan.delta, beta_norm=float(np.linalg.norm(beta)))
    tail = exp_tail_integrals(plan.support, plan.index_set.as_array(), plan.tol * 1e-3)
    # u is positively homogeneous in the tail scale 1/k
    u1 = min_sup_norm_solve(A, tail)
    u1_sup = float(np.abs(u1).max())
    k = plan.k0
    for _ in range(K_DOUBLINGS + 1):
        if u1_sup / k < quarter:
            break
        k *= 2.0
    else:
        raise KExhausted(f"no k <= {plan.k0 * 2 ** K_DOUBLINGS:.3e} gives |u|_inf < delta/4",
                         k_max=plan.k0 * 2 ** K_DOUBLINGS)
    u = u1 / k
    comps = tuple(f.components) + (ExpTail(1.0 / k), CellFunction(plan.cells_lo, plan.cells_hi, v - u))
    return PerturbationResult(Density(comps, f.support), plan.delta, k,
                              float(np.abs(u).max()), v_sup, beta)


def perturb(f: Density, plan: PerturbationPlan, beta) -> Density:
    return perturb_with_report(f, plan, beta).density
