"""Moments of atomic measures and of symbolic densities over a support T."""
from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .core import IndexSet, MomentVector, monomials
from .errors import MalformedInput, ToleranceNotReached
from .regions import (Box, SupportRegion, adaptive_gl, ball_integrals, box_integrals,
                      power_integrals)

log = logging.getLogger(__name__)


def default_tol(dim: int) -> float:
    return 1e-8 if dim == 1 else 1e-5


@dataclass(frozen=True, eq=False)
class AtomicMeasure:
    """Finite measure sum_k w_k delta_{y_k}; locations checked against T if given."""

    locations: np.ndarray
    weights: np.ndarray
    support: Optional[SupportRegion] = None

    def __post_init__(self):
        w = np.array(self.weights, dtype=float).reshape(-1)
        y = np.array(self.locations, dtype=float)
        y = y.reshape(w.shape[0], -1)
        if w.shape[0] == 0:
            raise MalformedInput("atomic measure needs at least one atom")
        if np.any(w < 0) or not np.all(np.isfinite(w)) or not np.all(np.isfinite(y)):
            raise MalformedInput("weights must be finite and >= 0")
        if self.support is not None:
            outside = ~self.support.contains(y)
            if outside.any():
                raise MalformedInput(f"atoms outside the support: {y[outside].tolist()}")
        y.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "locations", y)
        object.__setattr__(self, "weights", w)

    @property
    def dim(self) -> int:
        return self.locations.shape[1]

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def __len__(self):
        return self.weights.shape[0]


def atomic_moments(nu: AtomicMeasure, index_set: IndexSet) -> MomentVector:
    return MomentVector(index_set, nu.weights @ monomials(index_set, nu.locations))


def abs_moment(nu: AtomicMeasure, j) -> float:
    """sum_k w_k |y_k ** j|."""
    j = np.asarray(j, dtype=int).reshape(-1)
    return float(nu.weights @ np.abs(np.prod(nu.locations ** j, axis=1)))


# density components ---------------------------------------------------------

@dataclass(frozen=True)
class ScaledBallIndicator:
    """scale * indicator of the open ball (center, radius)."""

    center: tuple
    radius: float
    scale: float

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in np.atleast_1d(self.center)))
        if self.radius <= 0 or self.scale < 0:
            raise MalformedInput("ball piece needs radius > 0 and scale >= 0")

    def value(self, pts):
        c = np.array(self.center)
        return np.where(np.sum((pts - c) ** 2, axis=1) < self.radius ** 2, self.scale, 0.0)

    def lower_bound(self, lo, hi):
        corners = np.array(list(itertools.product(*zip(lo, hi))))
        far = np.sqrt(np.sum((corners - self.center) ** 2, axis=1)).max()
        return self.scale if far <= self.radius * (1 + 1e-12) else 0.0

    def sup(self):
        return self.scale


@dataclass(frozen=True)
class ExpTail:
    """scale * exp(-|t|)."""

    scale: float

    def __post_init__(self):
        if self.scale < 0:
            raise MalformedInput("tail scale must be >= 0")

    def value(self, pts):
        return self.scale * np.exp(-np.sqrt(np.sum(pts ** 2, axis=1)))

    def lower_bound(self, lo, hi):
        corners = np.array(list(itertools.product(*zip(lo, hi))))
        return self.scale * float(np.exp(-np.sqrt(np.sum(corners ** 2, axis=1)).max()))

    def sup(self):
        return self.scale


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Piecewise constant on the equal cells of the box [lo, hi]; row-major values."""

    lo: tuple
    hi: tuple
    shape: tuple
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", tuple(float(v) for v in np.atleast_1d(self.lo)))
        object.__setattr__(self, "hi", tuple(float(v) for v in np.atleast_1d(self.hi)))
        object.__setattr__(self, "shape", tuple(int(s) for s in np.atleast_1d(self.shape)))
        vals = np.array(self.values, dtype=float).reshape(-1)
        if vals.size != int(np.prod(self.shape)):
            raise MalformedInput("grid values do not match grid shape")
        if np.any(vals < 0) or not np.all(np.isfinite(vals)):
            raise MalformedInput("grid values must be finite and >= 0")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def cells(self):
        lo, hi, shape = np.array(self.lo), np.array(self.hi), np.array(self.shape)
        h = (hi - lo) / shape
        idx = np.array(list(itertools.product(*[range(s) for s in self.shape])))
        clo = lo + idx * h
        return clo, clo + h

    def value(self, pts):
        lo, hi, shape = np.array(self.lo), np.array(self.hi), np.array(self.shape)
        inside = np.all((pts >= lo) & (pts <= hi), axis=1)
        idx = np.floor((pts - lo) / (hi - lo) * shape).astype(int)
        idx = np.clip(idx, 0, shape - 1)
        flat = np.ravel_multi_index(tuple(idx.T), self.shape)
        return np.where(inside, self.values[flat], 0.0)

    def lower_bound(self, lo, hi):
        clo, chi = self.cells()
        if not (np.all(np.asarray(lo) >= self.lo) and np.all(np.asarray(hi) <= self.hi)):
            return 0.0
        hit = np.all((clo < hi) & (chi > lo), axis=1)
        return float(self.values[hit].min()) if hit.any() else 0.0

    def sup(self):
        return float(self.values.max())


@dataclass(frozen=True, eq=False)
class CellFunction:
    """Piecewise constant on a list of disjoint boxes (lo[k], hi[k]); may be signed.

    Used for the bounded corrections of a perturbation, which live on cells
    where the rest of the density is bounded below.
    """

    lo: np.ndarray
    hi: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        lo = np.atleast_2d(np.array(self.lo, dtype=float))
        hi = np.atleast_2d(np.array(self.hi, dtype=float))
        vals = np.array(self.values, dtype=float).reshape(-1)
        if lo.shape != hi.shape or lo.shape[0] != vals.shape[0]:
            raise MalformedInput("cell arrays disagree in length")
        for a in (lo, hi, vals):
            a.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "values", vals)

    def value(self, pts):
        out = np.zeros(pts.shape[0])
        for lo, hi, v in zip(self.lo, self.hi, self.values):
            out += np.where(np.all((pts >= lo) & (pts < hi), axis=1), v, 0.0)
        return out

    def lower_bound(self, lo, hi):
        lo, hi = np.asarray(lo), np.asarray(hi)
        total = 0.0
        for clo, chi, v in zip(self.lo, self.hi, self.values):
            if np.all(clo < hi) and np.all(chi > lo):
                inside = np.all(lo >= clo) and np.all(hi <= chi)
                total += v if inside else min(v, 0.0)
        return total

    def sup(self):
        return float(np.maximum(self.values, 0).sum()) if self.values.size else 0.0


Component = Union[ScaledBallIndicator, ExpTail, GridFunction, CellFunction]


@dataclass(frozen=True)
class Density:
    """Sum of components, restricted to the support."""

    components: tuple
    support: SupportRegion

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))

    @property
    def dim(self) -> int:
        return self.support.dim

    def __call__(self, points) -> np.ndarray:
        return eval_density(self, points)

    def lower_bound(self, lo, hi) -> float:
        """Lower bound of the density on the box [lo, hi] (assumed inside T)."""
        return float(sum(c.lower_bound(lo, hi) for c in self.components))

    def sup_estimate(self) -> float:
        """Upper bound of the density (sum of component suprema)."""
        return float(sum(c.sup() for c in self.components))


def eval_density(f: Density, points) -> np.ndarray:
    pts = f.support._points(points)
    total = np.zeros(pts.shape[0])
    for comp in f.components:
        total += comp.value(pts)
    return np.where(f.support.contains(pts), total, 0.0)


def density_moments(f: Density, index_set: IndexSet, tol: Optional[float] = None,
                    seed: int = 0) -> MomentVector:
    """Moments of f over T, each to absolute accuracy about ``tol``."""
    if tol is None:
        tol = default_tol(f.dim)
    exps = index_set.as_array()
    total = np.zeros(len(index_set))
    for comp in f.components:
        total += component_moments(comp, f.support, exps, tol, seed)
    return MomentVector(index_set, total)


def component_moments(comp, T: SupportRegion, exps: np.ndarray, tol: float,
                      seed: int = 0) -> np.ndarray:
    if isinstance(comp, ScaledBallIndicator):
        if comp.scale == 0:
            return np.zeros(exps.shape[0])
        return comp.scale * ball_integrals(T, comp.center, comp.radius, exps, seed=seed)
    if isinstance(comp, ExpTail):
        if comp.scale == 0:
            return np.zeros(exps.shape[0])
        return comp.scale * exp_tail_integrals(T, exps, tol / comp.scale)
    if isinstance(comp, GridFunction):
        lo, hi = comp.cells()
        return _cells_integrals(T, lo, hi, comp.values, exps, tol)
    if isinstance(comp, CellFunction):
        return _cells_integrals(T, comp.lo, comp.hi, comp.values, exps, tol)
    raise TypeError(f"unknown density component {type(comp).__name__}")


def _clip_to_box(T, lo, hi):
    """Clip boxes to T when T is a box (or 1D union); None if that is not exact."""
    if isinstance(T, Box):
        return np.maximum(lo, T.lo), np.minimum(hi, T.hi)
    if T.dim == 1 and T.intervals() is not None:
        pieces_lo, pieces_hi, owner = [], [], []
        for k, (a, b) in enumerate(zip(lo[:, 0], hi[:, 0])):
            for ia, ib in T.intervals():
                pieces_lo.append(max(a, ia)); pieces_hi.append(min(b, ib)); owner.append(k)
        return (np.array(pieces_lo)[:, None], np.array(pieces_hi)[:, None], np.array(owner))
    return None


def _cells_integrals(T, lo, hi, values, exps, tol):
    if values.size == 0:
        return np.zeros(exps.shape[0])
    clipped = _clip_to_box(T, lo, hi)
    if clipped is not None:
        if len(clipped) == 3:
            clo, chi, owner = clipped
            return values[owner] @ box_integrals(clo, chi, exps)
        clo, chi = clipped
        return values @ box_integrals(clo, chi, exps)
    if all(T.contains_box(a, b) for a, b in zip(lo, hi)):
        return values @ box_integrals(lo, hi, exps)

    def f(pts):
        out = np.zeros(pts.shape[0])
        for a, b, v in zip(lo, hi, values):
            out += np.where(np.all((pts >= a) & (pts < b), axis=1), v, 0.0)
        return out

    return midpoint_refine(f, T, exps, tol)


def exp_tail_integrals(T: SupportRegion, exps: np.ndarray, tol: float) -> np.ndarray:
    """Integrals of t**e exp(-|t|) over T."""
    if T.dim == 1 and T.intervals() is not None:
        kmax = int(exps[:, 0].max())

        def f(x):
            return (x[:, None] ** exps[:, 0]) * np.exp(-np.abs(x))[:, None]

        total = np.zeros(exps.shape[0])
        for a, b in T.intervals():
            cuts = [a] + ([0.0] if a < 0 < b else []) + [b]
            for u, v in zip(cuts[:-1], cuts[1:]):
                if v > u:
                    total += adaptive_gl(f, u, v, 1e-14)[0]
        return total
    if T.dim == 2 and isinstance(T, Box):
        return _tail_box_2d(np.array(T.lo), np.array(T.hi), exps)
    return midpoint_refine(lambda p: np.exp(-np.sqrt(np.sum(p ** 2, axis=1))), T, exps, tol)


def _tail_box_2d(lo, hi, exps):
    """Tensor Gauss-Legendre on the box, split along the axes through the origin."""
    xs = [lo[0]] + ([0.0] if lo[0] < 0 < hi[0] else []) + [hi[0]]
    ys = [lo[1]] + ([0.0] if lo[1] < 0 < hi[1] else []) + [hi[1]]
    total = np.zeros(exps.shape[0])
    for xa, xb in zip(xs[:-1], xs[1:]):
        for ya, yb in zip(ys[:-1], ys[1:]):
            if xb > xa and yb > ya:
                total += _tail_rect(xa, xb, ya, yb, exps, depth=0)
    return total


def _tail_rect(xa, xb, ya, yb, exps, depth):
    def rule(xa, xb, ya, yb, n):
        from .regions import gauss_legendre
        x, w = gauss_legendre(n)
        px = 0.5 * (xa + xb) + 0.5 * (xb - xa) * x
        py = 0.5 * (ya + yb) + 0.5 * (yb - ya) * x
        X, Y = np.meshgrid(px, py, indexing="ij")
        W = np.outer(w, w) * 0.25 * (xb - xa) * (yb - ya)
        X, Y, W = X.ravel(), Y.ravel(), W.ravel()
        kern = W * np.exp(-np.sqrt(X ** 2 + Y ** 2))
        return ((X[:, None] ** exps[:, 0]) * (Y[:, None] ** exps[:, 1])).T @ kern

    coarse, fine = rule(xa, xb, ya, yb, 12), rule(xa, xb, ya, yb, 24)
    if np.abs(fine - coarse).max() <= 1e-14 * max(np.abs(fine).max(), 1e-300) or depth >= 8:
        return fine
    # the kink at the origin is the only non-smooth point; refine toward it
    xm, ym = 0.5 * (xa + xb), 0.5 * (ya + yb)
    return sum(_tail_rect(a, b, c, d, exps, depth + 1)
               for a, b in ((xa, xm), (xm, xb)) for c, d in ((ya, ym), (ym, yb)))


def midpoint_refine(func, T: SupportRegion, exps: np.ndarray, tol: float,
                    start: int = 64, max_points: int = 2 ** 22) -> np.ndarray:
    """Midpoint rule over T's bounding box, doubled until successive passes agree."""
    lo, hi = T.bounding_box()
    n = T.dim
    res = start
    prev = None
    while True:
        h = (hi - lo) / res
        axes = [lo[k] + h[k] * (np.arange(res) + 0.5) for k in range(n)]
        pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        w = np.where(T.contains(pts), func(pts), 0.0) * float(np.prod(h))
        mons = np.ones((pts.shape[0], exps.shape[0]))
        for axis in range(n):
            mons *= pts[:, axis, None] ** exps[:, axis]
        est = w @ mons
        if prev is not None:
            err = float(np.abs(est - prev).max())
            if err < tol:
                return est
            if (2 * res) ** n > max_points:
                raise ToleranceNotReached(
                    f"midpoint rule stalled at resolution {res}", estimate=est, achieved=err)
        prev = est
        res *= 2
