import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from momentcone.certify import DEGENERATE, NEGATIVE_WITNESS, STRICTLY_POSITIVE, certify
from momentcone.core import IndexSet, MomentVector
from momentcone.errors import NotStrictlyPositive
from momentcone.quadrature import (AtomicMeasure, Density, GridFunction, atomic_moments,
                                   density_moments)
from momentcone.regions import Box, sample_grid
from momentcone.synthesis import (BOUNDARY, INTERIOR, NOT_REPRESENTABLE, UNRESOLVED, Infeasible,
                                  SynthesisParams, build_density, classify,
                                  find_atomic_representation, witness_pairing)

UNIT = Box(np.array([0.0]), np.array([1.0]))
SQUARE = Box(np.array([0.0, 0.0]), np.array([1.0, 1.0]))
I2 = IndexSet.total_degree(2)
I4 = IndexSet.total_degree(4)
LEB4 = MomentVector(I4, 1.0 / np.arange(1, 6))
TWO_T = MomentVector(I4, 2.0 / np.arange(2, 7))
DIRAC = MomentVector(I2, [1.0, 0.5, 0.25])
NEG = MomentVector(I2, [1.0, 2.0, 1.0])


def test_find_atomic_lebesgue():
    nu = find_atomic_representation(LEB4, UNIT, sample_grid(UNIT, 64))
    assert isinstance(nu, AtomicMeasure)
    assert np.abs(atomic_moments(nu, I4).values - LEB4.values).max() <= 1e-9
    assert np.all(nu.weights > 0)


def test_find_atomic_dirac():
    nu = find_atomic_representation(DIRAC, UNIT, sample_grid(UNIT, 5))
    assert len(nu) == 1
    assert nu.locations[0, 0] == pytest.approx(0.5, abs=1e-12)
    assert nu.weights[0] == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("res", [5, 64, 513])
def test_find_atomic_infeasible(res):
    out = find_atomic_representation(NEG, UNIT, sample_grid(UNIT, res))
    assert isinstance(out, Infeasible) and out.residual > 0.5


@settings(max_examples=20)
@given(st.integers(0, 10_000))
def test_find_atomic_verifies(seed):
    rng = np.random.default_rng(seed)
    nu = AtomicMeasure(rng.random((3, 1)), rng.dirichlet(np.ones(3)), UNIT)
    g = atomic_moments(nu, I4)
    out = find_atomic_representation(g, UNIT, sample_grid(UNIT, 64), moment_tol=1e-9)
    if isinstance(out, AtomicMeasure):
        assert np.abs(atomic_moments(out, I4).values - g.values).max() <= 1e-9


@pytest.mark.parametrize("g", [LEB4, TWO_T])
def test_build_density_1d(g):
    f = build_density(g, UNIT)
    assert np.abs(density_moments(f, I4).values - g.values).max() <= 1e-6
    assert f(np.random.default_rng(0).random((10_000, 1))).min() > 0


def test_build_density_2d():
    I = IndexSet.box_degree(2, 2)
    e = I.as_array()
    g = MomentVector(I, np.prod(1.0 / (e + 1), axis=1))
    f = build_density(g, SQUARE)
    assert np.abs(density_moments(f, I, 1e-6).values - g.values).max() <= 1e-4
    assert f(np.random.default_rng(1).random((10_000, 2))).min() > 0


def test_build_density_rejects_boundary():
    with pytest.raises(NotStrictlyPositive):
        build_density(DIRAC, UNIT)


@settings(max_examples=6)
@given(st.integers(0, 10_000))
def test_round_trip_from_positive_certificate(seed):
    rng = np.random.default_rng(seed)
    vals = rng.random(6) + 0.2
    f0 = Density((GridFunction((0.0,), (1.0,), (6,), vals / vals.mean()),), UNIT)
    g = density_moments(f0, I4)
    cert = certify(g, UNIT)
    if cert.verdict != STRICTLY_POSITIVE or cert.margin <= 10 * 1e-6:
        return
    f = build_density(g, UNIT, certificate=cert)
    assert np.abs(density_moments(f, I4).values - g.values).max() <= 1e-6


def test_classify_examples():
    cl = classify(LEB4, UNIT)
    assert cl.verdict == INTERIOR and cl.density_witness is not None
    assert cl.certificate.verdict == STRICTLY_POSITIVE
    cl = classify(DIRAC, UNIT)
    assert cl.verdict == BOUNDARY and cl.certificate.verdict == DEGENERATE
    res = cl.certificate.resolution_used
    assert cl.atomic_witness is not None
    heavy = cl.atomic_witness.locations[np.argmax(cl.atomic_witness.weights), 0]
    assert abs(heavy - 0.5) <= 1.0 / res
    cl = classify(NEG, UNIT)
    assert cl.verdict == NOT_REPRESENTABLE
    assert cl.certificate.verdict == NEGATIVE_WITNESS
    assert cl.atomic_witness is None and cl.density_witness is None


def test_interior_neighbourhood_is_never_rejected():
    g = MomentVector(I2, [1.0, 0.5, 1.0 / 3.0])
    cl = classify(g, UNIT)
    assert cl.verdict == INTERIOR
    rho = cl.diagnostics["radius_estimate"] / 2
    for k in range(1, len(I2)):
        for sign in (1.0, -1.0):
            vals = g.values.copy()
            vals[k] += sign * rho
            out = classify(MomentVector(I2, vals), UNIT)
            assert out.verdict in (INTERIOR, UNRESOLVED)


@pytest.mark.parametrize("g", [DIRAC, NEG, MomentVector(I2, [1.0, 0.3, 0.09])])
def test_no_witness_conflict(g):
    cl = classify(g, UNIT)
    if cl.certificate.verdict == NEGATIVE_WITNESS:
        assert cl.atomic_witness is None and cl.density_witness is None
    if cl.atomic_witness is not None:
        assert witness_pairing(cl.certificate, cl.atomic_witness) >= -1e-6


def test_unresolved_when_cut_budget_runs_out():
    from momentcone.certify import CertifyParams
    g = MomentVector(I4, 0.9 * atomic_moments(AtomicMeasure([[0.3], [0.71]], [0.5, 0.5]),
                                              I4).values + 0.1 / np.arange(1, 6))
    cl = classify(g, UNIT, SynthesisParams(certify=CertifyParams(resolution=8, max_cuts=0)))
    assert cl.verdict == UNRESOLVED
