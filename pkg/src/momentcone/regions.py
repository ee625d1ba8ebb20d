"""Compact supports T: membership, grids, local volumes and the regularity probe."""
from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import qmc

from .core import IndexSet, PolynomialI, eval_poly
from .errors import EmptyGrid, MalformedInput, RegularityViolation

QMC_POINTS = 2 ** 16


def power_integrals(a, b, kmax: int) -> np.ndarray:
    """F[..., k] = integral of t**k over [a, b] for k <= kmax, cancellation-free.

    Same-sign intervals use (b - a) / (k + 1) * sum_j a**j b**(k - j) so that
    very short intervals keep full relative precision.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    a, b = np.broadcast_arrays(a, b)
    out = np.zeros(a.shape + (kmax + 1,))
    ks = np.arange(kmax + 1)
    mixed = (a < 0) & (b > 0)
    if mixed.any():
        am, bm = a[mixed][..., None], b[mixed][..., None]
        out[mixed] = (bm ** (ks + 1) - am ** (ks + 1)) / (ks + 1)
    same = ~mixed
    if same.any():
        am, bm = a[same], b[same]
        s = np.ones_like(am)
        apow = np.ones_like(am)
        cols = [s]
        for _ in range(kmax):
            apow = apow * am
            s = bm * s + apow
            cols.append(s)
        sums = np.stack(cols, axis=-1)
        out[same] = (bm - am)[..., None] * sums / (ks + 1)
    return out


def box_integrals(lo, hi, exps: np.ndarray) -> np.ndarray:
    """Integrals of t**e over boxes [lo, hi] (shape (M, n)) for each row e of exps.

    Returns shape (M, K). Empty boxes (hi <= lo on some axis) integrate to 0.
    """
    lo = np.atleast_2d(np.asarray(lo, float))
    hi = np.atleast_2d(np.asarray(hi, float))
    hi = np.maximum(hi, lo)
    exps = np.atleast_2d(exps)
    out = np.ones((lo.shape[0], exps.shape[0]))
    for axis in range(lo.shape[1]):
        F = power_integrals(lo[:, axis], hi[:, axis], int(exps[:, axis].max()))
        out *= F[:, exps[:, axis]]
    return out


class SupportRegion:
    """Base class for compact supports. Subclasses are immutable dataclasses."""

    dim: int
    measure_floor_override: Optional[float] = None

    def contains(self, points) -> np.ndarray:
        raise NotImplementedError

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        raise NotImplementedError

    def contains_box(self, lo, hi) -> bool:
        """Conservative test that the closed box [lo, hi] lies in T."""
        raise NotImplementedError

    def intervals(self) -> Optional[list]:
        """1D only: T as a sorted list of disjoint closed intervals, if known."""
        return None

    @property
    def measure_floor(self) -> float:
        if self.measure_floor_override is not None:
            return self.measure_floor_override
        lo, hi = self.bounding_box()
        return max(1e-12 * float(np.prod(hi - lo)), 1e-300)

    def _points(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 0:
            pts = pts.reshape(1, 1)
        elif pts.ndim == 1:
            pts = pts.reshape(-1, self.dim) if self.dim > 1 else pts.reshape(-1, 1)
        if pts.shape[1] != self.dim:
            raise MalformedInput(f"points of dimension {pts.shape[1]} for region of dim {self.dim}")
        return pts


@dataclass(frozen=True)
class Box(SupportRegion):
    lo: tuple
    hi: tuple
    measure_floor_override: Optional[float] = None

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        if len(lo) != len(hi) or not lo:
            raise MalformedInput("box lo/hi must have equal positive length")
        if any(h < l for l, h in zip(lo, hi)) or not all(map(math.isfinite, lo + hi)):
            raise MalformedInput("box must satisfy lo <= hi with finite entries")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return len(self.lo)

    def contains(self, points):
        pts = self._points(points)
        return np.all((pts >= self.lo) & (pts <= self.hi), axis=1)

    def bounding_box(self):
        return np.array(self.lo), np.array(self.hi)

    def contains_box(self, lo, hi):
        return bool(np.all(np.asarray(lo) >= self.lo) and np.all(np.asarray(hi) <= self.hi))

    def intervals(self):
        return [(self.lo[0], self.hi[0])] if self.dim == 1 else None


@dataclass(frozen=True)
class Ball(SupportRegion):
    center: tuple
    radius: float
    measure_floor_override: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(v) for v in np.atleast_1d(self.center)))
        if not (self.radius >= 0 and math.isfinite(self.radius)):
            raise MalformedInput("ball radius must be finite and >= 0")

    @property
    def dim(self):
        return len(self.center)

    def contains(self, points):
        pts = self._points(points)
        return np.sum((pts - self.center) ** 2, axis=1) <= self.radius ** 2

    def bounding_box(self):
        c = np.array(self.center)
        return c - self.radius, c + self.radius

    def contains_box(self, lo, hi):
        corners = np.array(list(itertools.product(*zip(lo, hi))))
        return bool(self.contains(corners).all())

    def intervals(self):
        if self.dim != 1:
            return None
        return [(self.center[0] - self.radius, self.center[0] + self.radius)]


@dataclass(frozen=True)
class UnionOfBoxes(SupportRegion):
    boxes: tuple
    measure_floor_override: Optional[float] = None

    def __post_init__(self):
        boxes = tuple(self.boxes)
        if not boxes:
            raise MalformedInput("union needs at least one box")
        if len({b.dim for b in boxes}) != 1:
            raise MalformedInput("union boxes differ in dimension")
        object.__setattr__(self, "boxes", boxes)

    @property
    def dim(self):
        return self.boxes[0].dim

    def contains(self, points):
        pts = self._points(points)
        return np.any([b.contains(pts) for b in self.boxes], axis=0)

    def bounding_box(self):
        lo = np.min([b.lo for b in self.boxes], axis=0)
        hi = np.max([b.hi for b in self.boxes], axis=0)
        return lo, hi

    def contains_box(self, lo, hi):
        return any(b.contains_box(lo, hi) for b in self.boxes)

    def intervals(self):
        if self.dim != 1:
            return None
        merged = []
        for a, b in sorted((b.lo[0], b.hi[0]) for b in self.boxes):
            if merged and a <= merged[-1][1]:
                merged[-1] = (merged[-1][0], max(merged[-1][1], b))
            else:
                merged.append((a, b))
        return merged


@dataclass(frozen=True)
class SemialgebraicInBox(SupportRegion):
    """{t in box : q_m(t) >= -eta for every constraint q_m}."""

    box: Box
    constraints: tuple
    eta: float = 0.0
    measure_floor_override: Optional[float] = None

    def __post_init__(self):
        cons = tuple(self.constraints)
        for q in cons:
            if q.index_set.dim != self.box.dim:
                raise MalformedInput("constraint dimension differs from box")
        object.__setattr__(self, "constraints", cons)

    @property
    def dim(self):
        return self.box.dim

    def contains(self, points):
        pts = self._points(points)
        ok = self.box.contains(pts)
        for q in self.constraints:
            ok &= np.atleast_1d(eval_poly(q, pts)) >= -self.eta
        return ok

    def bounding_box(self):
        return self.box.bounding_box()

    def contains_box(self, lo, hi):
        if not self.box.contains_box(lo, hi):
            return False
        lattice = np.array(list(itertools.product(*[np.linspace(a, b, 3) for a, b in zip(lo, hi)])))
        return bool(self.contains(lattice).all())


def contains(T: SupportRegion, t) -> bool | np.ndarray:
    t = np.asarray(t, dtype=float)
    single = t.ndim == 0 or (t.ndim == 1 and t.shape[0] == T.dim)
    res = T.contains(t.reshape(1, -1) if single else t)
    return bool(res[0]) if single else res


@dataclass(frozen=True)
class SampleGrid:
    points: np.ndarray
    cell_volume: float
    resolution: int

    def __len__(self):
        return self.points.shape[0]


def sample_grid(T: SupportRegion, resolution: int) -> SampleGrid:
    """Tensor grid over the bounding box (endpoints included), filtered by T."""
    if resolution < 2:
        raise ValueError("resolution must be >= 2")
    lo, hi = T.bounding_box()
    axes = [np.linspace(a, b, resolution) for a, b in zip(lo, hi)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, T.dim)
    pts = mesh[T.contains(mesh)]
    if pts.shape[0] == 0:
        raise EmptyGrid(f"no grid point of resolution {resolution} lies in T")
    cell = float(np.prod(hi - lo)) / resolution ** T.dim
    return SampleGrid(pts, cell, resolution)


@functools.lru_cache(maxsize=16)
def unit_ball_points(dim: int, seed: int = 0, n: int = QMC_POINTS) -> np.ndarray:
    """Scrambled Sobol points of [-1, 1]^dim that fall in the unit ball."""
    sob = qmc.Sobol(d=dim, scramble=True, seed=seed).random(n)
    pts = 2.0 * sob - 1.0
    pts = pts[np.sum(pts ** 2, axis=1) < 1.0]
    pts.setflags(write=False)
    return pts


def ball_volume(dim: int, r: float) -> float:
    return math.pi ** (dim / 2) / math.gamma(dim / 2 + 1) * r ** dim


def ball_integrals(T: SupportRegion, center, r: float, exps: np.ndarray,
                   tol: float = 1e-13, seed: int = 0) -> np.ndarray:
    """Integrals of t**e over {x in T : |x - center| < r} for each row e of exps.

    Exact in 1D, exact (adaptive Gauss-Legendre on smooth pieces) for discs
    clipped by a box in 2D, quasi-Monte Carlo otherwise. The volume is the
    row e = 0, so normalizing by it preserves mass exactly.
    """
    exps = np.atleast_2d(np.asarray(exps, dtype=int))
    c = np.asarray(center, dtype=float).reshape(-1)
    n = T.dim
    if n == 1 and T.intervals() is not None:
        out = np.zeros(exps.shape[0])
        kmax = int(exps.max())
        for a, b in T.intervals():
            lo, hi = max(a, c[0] - r), min(b, c[0] + r)
            if hi > lo:
                out += power_integrals(lo, hi, kmax)[exps[:, 0]]
        return out
    if n == 2:
        box = _clipping_box(T, c, r)
        if box is not None:
            return disc_box_integrals(c, r, box[0], box[1], exps, tol)
    pts = c + r * unit_ball_points(n, seed)
    inside = T.contains(pts)
    vol = ball_volume(n, r)
    mons = np.ones((pts.shape[0], exps.shape[0]))
    for axis in range(n):
        mons *= pts[:, axis, None] ** exps[:, axis]
    return vol / pts.shape[0] * mons[inside].sum(axis=0)


def _clipping_box(T, c, r):
    """A box B with disc ∩ T == disc ∩ B, when one is known."""
    if isinstance(T, Box):
        return np.array(T.lo), np.array(T.hi)
    dlo, dhi = c - r, c + r
    if isinstance(T, UnionOfBoxes):
        for b in T.boxes:
            if b.contains_box(dlo, dhi):
                return dlo, dhi
    if isinstance(T, Ball) and np.linalg.norm(c - np.array(T.center)) + r <= T.radius:
        return dlo, dhi
    return None


_GL_CACHE = {}


def gauss_legendre(n: int):
    if n not in _GL_CACHE:
        _GL_CACHE[n] = np.polynomial.legendre.leggauss(n)
    return _GL_CACHE[n]


def adaptive_gl(f, a: float, b: float, tol: float, depth: int = 12, n: int = 16):
    """Adaptive Gauss-Legendre for vector-valued f: compares n and 2n nodes."""
    def rule(lo, hi, k):
        x, w = gauss_legendre(k)
        mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
        return half * (w @ f(mid + half * x))

    coarse, fine = rule(a, b, n), rule(a, b, 2 * n)
    err = np.abs(fine - coarse).max(initial=0.0)
    scale = max(np.abs(fine).max(initial=0.0), 1e-300)
    if err <= tol * scale or err <= 1e-15 * scale or depth == 0 or b - a <= 1e-15 * max(1.0, abs(a), abs(b)):
        return fine, err
    m = 0.5 * (a + b)
    left, e1 = adaptive_gl(f, a, m, tol, depth - 1, n)
    right, e2 = adaptive_gl(f, m, b, tol, depth - 1, n)
    return left + right, e1 + e2


def disc_box_integrals(c, r, lo, hi, exps, tol=1e-13) -> np.ndarray:
    """Integrals of x**a y**b over the open disc (c, r) clipped to box [lo, hi].

    Outer variable x = c0 + r sin(theta); the integrand is analytic between
    the angles where the chord endpoints cross the box's horizontal edges.
    """
    exps = np.atleast_2d(exps)
    xa, xb = max(lo[0], c[0] - r), min(hi[0], c[0] + r)
    if xb <= xa or r <= 0:
        return np.zeros(exps.shape[0])
    ta = math.asin(min(1.0, max(-1.0, (xa - c[0]) / r)))
    tb = math.asin(min(1.0, max(-1.0, (xb - c[0]) / r)))
    breaks = [ta, tb]
    for q in ((c[1] - lo[1]) / r, (hi[1] - c[1]) / r,
              (c[1] - hi[1]) / r, (lo[1] - c[1]) / r):
        if 0.0 <= q <= 1.0:
            th = math.acos(q)
            breaks += [th, -th]
    breaks = sorted({t for t in breaks if ta <= t <= tb})
    kb = int(exps[:, 1].max())
    # y = c1 + s with s integrated directly: keeps full precision for tiny r
    binom = np.array([[math.comb(b, k) * c[1] ** (b - k) if k <= b else 0.0
                       for k in range(kb + 1)] for b in range(kb + 1)])
    slo_box, shi_box = lo[1] - c[1], hi[1] - c[1]

    def integrand(theta):
        x = c[0] + r * np.sin(theta)
        h = r * np.cos(theta)
        slo = np.maximum(slo_box, -h)
        shi = np.maximum(np.minimum(shi_box, h), slo)
        Fy = power_integrals(slo, shi, kb) @ binom.T
        vals = (x[:, None] ** exps[:, 0]) * Fy[:, exps[:, 1]]
        return vals * h[:, None]

    total = np.zeros(exps.shape[0])
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b > a:
            val, _ = adaptive_gl(integrand, a, b, tol)
            total += val
    return total


def local_volume(T: SupportRegion, y, eps: float, seed: int = 0) -> float:
    """Volume of {x in T : |x - y| < eps}. Raises RegularityViolation below the floor."""
    if eps <= 0:
        raise ValueError("eps must be positive")
    y = np.asarray(y, dtype=float).reshape(-1)
    vol = float(ball_integrals(T, y, eps, np.zeros((1, T.dim), int), seed=seed)[0])
    if vol <= T.measure_floor:
        raise RegularityViolation(
            f"local volume {vol:.3e} at {y.tolist()} (eps={eps}) is below the measure floor",
            point=y.tolist(), eps=eps, volume=vol)
    return vol


@dataclass
class ProbeReport:
    min_volume: dict
    violations: list
    num_points: int
    note: str = ("heuristic evidence only: regularity is a pointwise condition "
                 "that no finite sample can verify")

    @property
    def ok(self) -> bool:
        return not self.violations


def regularity_probe(T: SupportRegion, num_samples: int, eps_list: Sequence[float],
                     seed: int = 0) -> ProbeReport:
    """Evaluate local volumes at sample points, half of them on the boundary."""
    if num_samples < 1:
        raise ValueError("num_samples must be >= 1")
    rng = np.random.default_rng(seed)
    lo, hi = T.bounding_box()
    n_face = num_samples // 2
    n_int = num_samples - n_face
    pts = []
    inner = lo + (hi - lo) * rng.random((max(8 * n_int, 64), T.dim))
    inner = inner[T.contains(inner)][:n_int]
    pts.append(inner)
    if n_face:
        face = lo + (hi - lo) * rng.random((n_face, T.dim))
        axis = rng.integers(0, T.dim, n_face)
        side = rng.integers(0, 2, n_face)
        face[np.arange(n_face), axis] = np.where(side == 1, hi[axis], lo[axis])
        pts.append(_project_into(T, face))
    corners = np.array(list(itertools.product(*zip(lo, hi))))
    pts.append(_project_into(T, corners))
    pts = np.vstack([p for p in pts if p.size])
    min_vol = {}
    violations = []
    for eps in eps_list:
        vols = []
        for y in pts:
            try:
                vols.append(local_volume(T, y, eps, seed=seed))
            except RegularityViolation as exc:
                violations.append({"point": y.tolist(), "eps": eps,
                                   "volume": exc.details["volume"]})
                vols.append(exc.details["volume"])
        min_vol[float(eps)] = float(min(vols))
    return ProbeReport(min_vol, violations, int(pts.shape[0]))


def _project_into(T, pts):
    """Replace points outside T by the nearest point of a coarse grid of T."""
    inside = T.contains(pts)
    if inside.all():
        return pts
    try:
        grid = sample_grid(T, 65 if T.dim <= 2 else 9).points
    except EmptyGrid:
        return pts[inside]
    out = pts.copy()
    for k in np.flatnonzero(~inside):
        out[k] = grid[np.argmin(np.sum((grid - pts[k]) ** 2, axis=1))]
    return out


def check_positive_measure(T: SupportRegion, resolution: int = 64) -> None:
    lo, hi = T.bounding_box()
    if np.any(hi - lo <= 0):
        raise MalformedInput("support has a zero-width bounding box")
    try:
        sample_grid(T, resolution)
    except EmptyGrid:
        raise MalformedInput("support appears to have zero Lebesgue measure")
