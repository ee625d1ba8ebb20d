"""Smoothing an atomic measure into a bounded density with controlled moments."""
from __future__ import annotations

import itertools
from math import comb

import numpy as np

from .quadrature import AtomicMeasure, Density, ExpTail, ScaledBallIndicator
from .regions import SupportRegion, ball_integrals, local_volume


def _check_eps(eps: float):
    if not 0 < eps < 1:
        raise ValueError(f"eps must lie in (0, 1), got {eps}")


def mollify(nu: AtomicMeasure, T: SupportRegion, eps: float,
            ensure_positive: bool = False, seed: int = 0) -> Density:
    """Replace each atom by a uniform blob on B(y, eps) ∩ T of the same mass.

    With ``ensure_positive`` the tail eps * exp(-|t|) is added, so the result
    is bounded below by eps * exp(-max |t|) on T.
    """
    _check_eps(eps)
    outside = ~T.contains(nu.locations)
    if outside.any():
        raise ValueError(f"atoms outside T: {nu.locations[outside].tolist()}")
    comps = []
    for y, w in zip(nu.locations, nu.weights):
        if w == 0:
            continue
        vol = local_volume(T, y, eps, seed=seed)
        comps.append(ScaledBallIndicator(tuple(y), eps, float(w) / vol))
    if ensure_positive:
        comps.append(ExpTail(eps))
    return Density(tuple(comps), T)


def psi(eps: float, i, y, T: SupportRegion, seed: int = 0) -> float:
    """Normalized local moment of t**i over B(y, eps) ∩ T."""
    _check_eps(eps)
    i = np.asarray(i, dtype=int).reshape(1, -1)
    y = np.asarray(y, dtype=float).reshape(-1)
    vol = local_volume(T, y, eps, seed=seed)
    return float(ball_integrals(T, y, eps, i, seed=seed)[0]) / vol


def binomial_weight(i, j) -> int:
    return int(np.prod([comb(a, b) for a, b in zip(i, j)]))


def error_bound(nu: AtomicMeasure, eps: float, i) -> float:
    """eps * sum_{0<=j<=i} prod_k C(i_k, j_k) * sum_atoms w |y^j|; zero for i = 0."""
    _check_eps(eps)
    i = tuple(int(k) for k in np.atleast_1d(i))
    if not any(i):
        return 0.0
    total = 0.0
    for j in itertools.product(*(range(k + 1) for k in i)):
        total += binomial_weight(i, j) * float(
            nu.weights @ np.abs(np.prod(nu.locations ** np.array(j), axis=1)))
    return eps * total
