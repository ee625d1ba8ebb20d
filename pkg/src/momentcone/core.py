"""Multi-indices, index sets, polynomials over P_I and the Riesz pairing."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import IndexSetMismatch, MalformedInput

MultiIndex = tuple  # tuple[int, ...]


def _grlex_key(i):
    return (sum(i), tuple(-k for k in i))


def _as_multi_index(i) -> MultiIndex:
    i = tuple(int(k) for k in np.atleast_1d(i))
    if any(k < 0 for k in i):
        raise MalformedInput(f"negative entry in multi-index {i}")
    return i


@dataclass(frozen=True)
class IndexSet:
    """Finite set of multi-indices in graded lexicographic order.

    Always contains the zero index. Regularity (closure under ``sigma``) is
    not enforced here; see :func:`is_regular_index_set`.
    """

    indices: tuple
    _pos: dict = field(init=False, repr=False, compare=False, hash=False)

    def __init__(self, indices: Iterable):
        idx = {_as_multi_index(i) for i in indices}
        if not idx:
            raise MalformedInput("index set must be nonempty")
        dims = {len(i) for i in idx}
        if len(dims) != 1:
            raise MalformedInput(f"mixed multi-index lengths {sorted(dims)}")
        n = dims.pop()
        if n < 1:
            raise MalformedInput("dimension must be >= 1")
        if (0,) * n not in idx:
            raise MalformedInput("index set must contain the zero index")
        ordered = tuple(sorted(idx, key=_grlex_key))
        object.__setattr__(self, "indices", ordered)
        object.__setattr__(self, "_pos", {i: k for k, i in enumerate(ordered)})

    @property
    def dim(self) -> int:
        return len(self.indices[0])

    def __len__(self):
        return len(self.indices)

    def __iter__(self):
        return iter(self.indices)

    def __contains__(self, i):
        return tuple(i) in self._pos

    def position(self, i) -> int:
        return self._pos[tuple(i)]

    @property
    def zero(self) -> MultiIndex:
        return (0,) * self.dim

    def as_array(self) -> np.ndarray:
        return np.array(self.indices, dtype=int).reshape(len(self), self.dim)

    def max_degrees(self) -> np.ndarray:
        return self.as_array().max(axis=0)

    @classmethod
    def total_degree(cls, degree: int, dim: int = 1) -> "IndexSet":
        return cls(i for i in itertools.product(range(degree + 1), repeat=dim)
                   if sum(i) <= degree)

    @classmethod
    def box_degree(cls, degree: int, dim: int = 1) -> "IndexSet":
        """Products of per-axis degrees <= degree, e.g. {0,1,2}^2."""
        return cls(itertools.product(range(degree + 1), repeat=dim))


def sigma(i) -> set:
    """All indices obtained by zeroing subsets of the nonzero entries of i."""
    i = _as_multi_index(i)
    choices = [(0, k) if k else (0,) for k in i]
    return set(itertools.product(*choices))


def is_regular_index_set(index_set: IndexSet) -> bool:
    return all(sigma(i) <= set(index_set.indices) for i in index_set)


def close_index_set(index_set: IndexSet) -> IndexSet:
    closed = set()
    for i in index_set:
        closed |= sigma(i)
    return IndexSet(closed)


def monomials(index_set: IndexSet, points) -> np.ndarray:
    """Matrix M[p, k] = points[p] ** index_set[k] (shape (P, N))."""
    pts = np.asarray(points, dtype=float)
    if pts.ndim == 1:
        pts = pts.reshape(-1, index_set.dim) if index_set.dim > 1 else pts[:, None]
    exps = index_set.as_array()
    out = np.ones((pts.shape[0], len(index_set)))
    for axis in range(index_set.dim):
        deg = int(exps[:, axis].max())
        if deg == 0:
            continue
        powers = pts[:, axis, None] ** np.arange(deg + 1)
        out *= powers[:, exps[:, axis]]
    return out


class _Coefficients:
    index_set: IndexSet
    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=float).reshape(-1)
        if vals.shape != (len(self.index_set),):
            raise MalformedInput(
                f"expected {len(self.index_set)} values, got {vals.shape[0]}")
        if not np.all(np.isfinite(vals)):
            raise MalformedInput("values must be finite")
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)

    def __getitem__(self, i) -> float:
        return float(self.values[self.index_set.position(i)])

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True, eq=False)
class MomentVector(_Coefficients):
    index_set: IndexSet
    values: np.ndarray

    def __post_init__(self):
        _Coefficients.__post_init__(self)

    @property
    def g0(self) -> float:
        return self[self.index_set.zero]


@dataclass(frozen=True, eq=False)
class PolynomialI(_Coefficients):
    index_set: IndexSet
    values: np.ndarray

    def __post_init__(self):
        _Coefficients.__post_init__(self)

    @property
    def coefficients(self) -> np.ndarray:
        return self.values

    def __add__(self, other: "PolynomialI") -> "PolynomialI":
        _check_same(self.index_set, other.index_set)
        return PolynomialI(self.index_set, self.values + other.values)

    def __mul__(self, alpha: float) -> "PolynomialI":
        return PolynomialI(self.index_set, alpha * self.values)

    __rmul__ = __mul__

    def normalized(self) -> "PolynomialI":
        return PolynomialI(self.index_set, self.values / poly_norm(self))


def _check_same(a: IndexSet, b: IndexSet):
    if a != b:
        raise IndexSetMismatch("index sets differ")


def eval_poly(p: PolynomialI, t) -> float | np.ndarray:
    """Evaluate p at one point (returns float) or at an array of points."""
    t = np.asarray(t, dtype=float)
    single = t.ndim == 0 or (t.ndim == 1 and t.shape[0] == p.index_set.dim)
    pts = t.reshape(1, -1) if single else t
    vals = monomials(p.index_set, pts) @ p.values
    return float(vals[0]) if single else vals


def riesz_apply(g: MomentVector, p: PolynomialI) -> float:
    _check_same(g.index_set, p.index_set)
    return float(np.dot(g.values, p.values))


def poly_norm(p: PolynomialI) -> float:
    """l1 norm of the coefficient vector."""
    return float(np.abs(p.values).sum())


def polynomial_from_terms(index_set: IndexSet, terms: dict | Sequence) -> PolynomialI:
    coeffs = np.zeros(len(index_set))
    for i, c in dict(terms).items():
        coeffs[index_set.position(_as_multi_index(i))] += c
    return PolynomialI(index_set, coeffs)
