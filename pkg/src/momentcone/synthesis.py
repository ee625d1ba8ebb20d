"""Atomic representations, density construction and classification of moment vectors."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from .certify import (DEGENERATE, NEGATIVE_WITNESS, STRICTLY_POSITIVE, CertifyParams,
                      PositivityCertificate, certify, min_poly_on_region)
from .core import MomentVector, monomials
from .errors import (AtomicInfeasible, BetaTooLarge, MomentConeError, NotStrictlyPositive,
                     ToleranceNotReached)
from .lp import LinearProgram, Status, solve
from .mollify import error_bound, mollify
from .perturb import perturb_with_report, plan_perturbation
from .quadrature import AtomicMeasure, Density, density_moments, exp_tail_integrals
from .regions import SampleGrid, SupportRegion, sample_grid

log = logging.getLogger(__name__)

INTERIOR = "InteriorRepresentable"
BOUNDARY = "Boundary"
NOT_REPRESENTABLE = "NotRepresentable"
UNRESOLVED = "Unresolved"


@dataclass(frozen=True)
class Infeasible:
    """No nonnegative weights on the grid reproduce g to the requested tolerance."""

    residual: float


@dataclass
class SynthesisParams:
    certify: CertifyParams = field(default_factory=CertifyParams)
    atomic_resolution: Optional[int] = None
    moment_tol: Optional[float] = None
    cells_per_axis: int = 2
    eps_start: float = 0.1
    eps_shrink: float = 0.5
    eps_min: float = 1e-12
    boundary_moment_tol: float = 1e-6
    seed: int = 0

    def resolved_atomic_resolution(self, dim: int) -> int:
        return self.atomic_resolution or (64 if dim == 1 else 16)

    def resolved_moment_tol(self, dim: int) -> float:
        return self.moment_tol if self.moment_tol is not None else (1e-6 if dim == 1 else 1e-4)


@dataclass
class Classification:
    verdict: str
    certificate: PositivityCertificate
    atomic_witness: Optional[AtomicMeasure] = None
    density_witness: Optional[Density] = None
    diagnostics: dict = field(default_factory=dict)


def _points_of(grid) -> np.ndarray:
    return grid.points if isinstance(grid, SampleGrid) else np.atleast_2d(np.asarray(grid, float))


def find_atomic_representation(g: MomentVector, T: SupportRegion, grid,
                               moment_tol: float = 1e-9) -> Union[AtomicMeasure, Infeasible]:
    """Nonnegative weights on grid points matching g, or Infeasible.

    Solves min sum|residual| so a near-miss is measured rather than just
    rejected; accepts when the polished residual is within ``moment_tol``.
    """
    pts = _points_of(grid)
    V = monomials(g.index_set, pts).T
    N, P = V.shape
    c = np.concatenate([np.zeros(P), np.ones(2 * N)])
    A = np.hstack([V, np.eye(N), -np.eye(N)])
    sol = solve(LinearProgram(c, A, g.values))
    if sol.status is not Status.OPTIMAL:
        return Infeasible(float("inf"))
    w = sol.x[:P]
    support = w > 1e-14
    w = _polish_weights(V[:, support], g.values, w[support])
    residual = float(np.abs(V[:, support] @ w - g.values).max())
    if residual > moment_tol:
        return Infeasible(residual)
    keep = w > 0
    return AtomicMeasure(pts[support][keep], w[keep], T)


def _polish_weights(V, g, w):
    fit, *_ = np.linalg.lstsq(V, g, rcond=None)
    if np.all(fit >= 0) and np.abs(V @ fit - g).max() <= np.abs(V @ w - g).max():
        return fit
    return w


def _spread_subset(grid: SampleGrid, T: SupportRegion, index_set) -> np.ndarray:
    """Grid points forming a tensor lattice with degree+1 nodes per axis."""
    pts = grid.points
    lo, hi = T.bounding_box()
    axes = [np.linspace(lo[k], hi[k], int(d) + 1) for k, d in enumerate(index_set.max_degrees())]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, T.dim)
    chosen = []
    for m in mesh:
        k = int(np.argmin(np.sum((pts - m) ** 2, axis=1)))
        if k not in chosen:
            chosen.append(k)
    return np.array(chosen, dtype=int)


def spread_atomic_representation(g: MomentVector, T: SupportRegion, grid: SampleGrid,
                                 moment_tol: float = 1e-9) -> AtomicMeasure:
    """Representation maximizing the smallest weight on a unisolvent subset of the grid.

    For g in the interior of the moment cone this keeps atoms spread over T,
    which keeps the perturbation step well conditioned.
    """
    pts = grid.points
    V = monomials(g.index_set, pts).T
    N, P = V.shape
    sub = _spread_subset(grid, T, g.index_set)
    # variables (w, floor); w_j - floor >= 0 on the subset
    c = np.zeros(P + 1)
    c[-1] = -1.0
    A_eq = np.hstack([V, np.zeros((N, 1))])
    A_in = np.zeros((sub.size, P + 1))
    A_in[np.arange(sub.size), sub] = 1.0
    A_in[:, -1] = -1.0
    sol = solve(LinearProgram(c, A_eq, g.values, A_in, np.zeros(sub.size)))
    if sol.status is not Status.OPTIMAL:
        raise AtomicInfeasible("no nonnegative grid representation", status=sol.status.value)
    w = sol.x[:P]
    support = w > 1e-14
    w = _polish_weights(V[:, support], g.values, w[support])
    residual = float(np.abs(V[:, support] @ w - g.values).max())
    if residual > moment_tol:
        raise AtomicInfeasible(f"grid representation residual {residual:.3e}", residual=residual)
    return AtomicMeasure(pts[support], w, T)


def _min_spacing(points: np.ndarray) -> float:
    if points.shape[0] < 2:
        return np.inf
    d = np.sqrt(np.sum((points[:, None, :] - points[None, :, :]) ** 2, axis=-1))
    return float(d[np.triu_indices(points.shape[0], 1)].min())


def build_density(g: MomentVector, T: SupportRegion, params: Optional[SynthesisParams] = None,
                  certificate: Optional[PositivityCertificate] = None) -> Density:
    """Density on T with moments g: atomic LP, mollify, then perturb the residual away."""
    return _build_density(g, T, params or SynthesisParams(), certificate)[0]


def _build_density(g, T, params, certificate):
    cert = certificate or certify(g, T, params.certify)
    if cert.verdict != STRICTLY_POSITIVE:
        raise NotStrictlyPositive(f"certificate verdict is {cert.verdict}", margin=cert.margin)
    I = g.index_set
    tol = params.resolved_moment_tol(T.dim)
    grid = sample_grid(T, params.resolved_atomic_resolution(T.dim))
    nu = spread_atomic_representation(g, T, grid)
    cells = len(nu) * params.cells_per_axis ** T.dim
    exps = I.as_array()
    bound_sum = sum(error_bound(nu, 0.5, i) for i in I) / 0.5
    tail = exp_tail_integrals(T, exps, tol * 1e-3)
    eps = min(params.eps_start, 0.45 * _min_spacing(nu.locations))
    while eps >= params.eps_min:
        f = mollify(nu, T, eps, ensure_positive=True, seed=params.seed)
        plan = plan_perturbation(f, T, I, cells, tol=tol * 1e-2)
        estimate = eps * bound_sum + eps * float(np.linalg.norm(tail))
        if estimate < plan.radius_estimate / 2:
            shift = g.values - density_moments(f, I, tol * 1e-2, params.seed).values
            try:
                result = perturb_with_report(f, plan, shift)
            except BetaTooLarge:
                log.info("beta too large at eps=%.3e; shrinking", eps)
            else:
                got = density_moments(result.density, I, tol * 1e-2, params.seed).values
                err = float(np.abs(got - g.values).max())
                if err <= tol:
                    log.info("density built: eps=%.3e delta=%.3e k=%.3e err=%.2e",
                             eps, result.delta, result.k, err)
                    info = {"eps": eps, "delta": result.delta, "k": result.k,
                            "radius_estimate": plan.radius_estimate, "max_moment_error": err}
                    return result.density, info
                raise ToleranceNotReached(f"moment error {err:.3e} > {tol:.1e}",
                                          estimate=err, achieved=err)
        eps *= params.eps_shrink
    raise BetaTooLarge(f"no eps >= {params.eps_min} brought the moment error within r_hat/2")


def _boundary_witness(g, T, cert, params):
    """Atoms on the certificate grid plus the zeros of the degenerate witness."""
    res = cert.resolution_used
    grid = sample_grid(T, res).points
    # the minimizer of the witness is where a boundary measure can sit
    t_star, _ = min_poly_on_region(cert.minimizer, T, res)
    extra = [t_star]
    extra.extend(cert.constraint_points[len(grid):])
    pts = np.vstack([grid, np.array(extra)])
    return find_atomic_representation(g, T, pts, params.boundary_moment_tol)


def witness_pairing(cert: PositivityCertificate, nu: AtomicMeasure) -> float:
    """Integral of the certificate polynomial against an atomic measure."""
    p = cert.minimizer
    return float(nu.weights @ (monomials(p.index_set, nu.locations) @ p.values))


def classify(g: MomentVector, T: SupportRegion,
             params: Optional[SynthesisParams] = None) -> Classification:
    """Interior (density exists), boundary (measure only), or not representable."""
    params = params or SynthesisParams()
    cert = certify(g, T, params.certify)
    diag = {"converged": cert.converged, "cuts_used": cert.cuts_used}
    if not cert.converged:
        return Classification(UNRESOLVED, cert, diagnostics=diag | {"reason": "cut budget"})
    if cert.verdict == NEGATIVE_WITNESS:
        return Classification(NOT_REPRESENTABLE, cert, diagnostics=diag)
    if cert.verdict == DEGENERATE:
        nu = _boundary_witness(g, T, cert, params)
        if isinstance(nu, Infeasible):
            diag["atomic_residual"] = nu.residual
            nu = None
        elif witness_pairing(cert, nu) < -params.certify.tol_pos:
            # a measure cannot pair negatively with a T-nonnegative polynomial
            diag["witness_conflict"] = witness_pairing(cert, nu)
            nu = None
        return Classification(BOUNDARY, cert, atomic_witness=nu, diagnostics=diag)
    try:
        f, info = _build_density(g, T, params, cert)
    except MomentConeError as exc:
        diag.update(reason=exc.kind, message=str(exc))
        return Classification(UNRESOLVED, cert, diagnostics=diag)
    return Classification(INTERIOR, cert, density_witness=f, diagnostics=diag | info)
