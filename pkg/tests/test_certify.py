import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from momentcone.certify import (DEGENERATE, NEGATIVE_WITNESS, STRICTLY_POSITIVE, CertifyParams,
                                brute_force_margin, certify, min_poly_on_region)
from momentcone.core import (IndexSet, MomentVector, PolynomialI, polynomial_from_terms,
                             poly_norm, riesz_apply)
from momentcone.errors import IrregularIndexSet, MalformedInput
from momentcone.quadrature import AtomicMeasure, GridFunction, Density, atomic_moments, density_moments
from momentcone.regions import Box

UNIT = Box(np.array([0.0]), np.array([1.0]))
I2 = IndexSet.total_degree(2)
I4 = IndexSet.total_degree(4)
LEB4 = MomentVector(I4, 1.0 / np.arange(1, 6))
DIRAC = MomentVector(I2, [1.0, 0.5, 0.25])
NEG = MomentVector(I2, [1.0, 2.0, 1.0])


def test_min_poly_examples():
    t, v = min_poly_on_region(PolynomialI(I2, [0.25, -1.0, 1.0]), UNIT, 512)
    assert abs(t[0] - 0.5) <= 1e-7 and abs(v) <= 1e-10
    t, v = min_poly_on_region(PolynomialI(I2, [1.0, 0.0, 0.0]), UNIT, 16)
    assert v == 1.0
    t, v = min_poly_on_region(PolynomialI(I2, [0.0, 1.0, 0.0]), UNIT, 16)
    assert t[0] == 0.0 and v == 0.0


@given(st.floats(0.0, 1.0), st.floats(0.1, 3.0))
def test_min_poly_is_upper_bound_and_close(c, a):
    # a (t - c)^2 - 1 has minimum -1 at c
    p = polynomial_from_terms(I2, {(0,): a * c * c - 1, (1,): -2 * a * c, (2,): a})
    t, v = min_poly_on_region(p, UNIT, 64)
    assert v >= -1 - 1e-12
    assert v == pytest.approx(-1.0, abs=1e-9)


def test_lebesgue_positive():
    cert = certify(LEB4, UNIT)
    assert cert.verdict == STRICTLY_POSITIVE and cert.margin > 0
    oracle = brute_force_margin(LEB4, UNIT, sphere_samples=10_000)
    assert cert.margin == pytest.approx(oracle, rel=0.1)


def test_dirac_degenerate():
    cert = certify(DIRAC, UNIT)
    assert cert.verdict == DEGENERATE
    expected = np.array([0.25, -1.0, 1.0]) / 2.25
    w = cert.witness.values * np.sign(cert.witness.values[2])
    assert np.abs(w - expected).sum() <= 1e-4


def test_negative_witness():
    cert = certify(NEG, UNIT)
    assert cert.verdict == NEGATIVE_WITNESS and cert.margin < 0
    # 1 - t gives -1; normalized (l1 norm 2) that is -0.5
    assert cert.margin <= -0.5 + 1e-9


@pytest.mark.parametrize("g", [DIRAC, NEG])
def test_witness_soundness(g):
    cert = certify(g, UNIT)
    w = cert.witness
    assert poly_norm(w) == pytest.approx(1.0, abs=1e-9)
    _, m = min_poly_on_region(w, UNIT, 4 * cert.resolution_used)
    assert m >= -2 * CertifyParams().eta
    assert riesz_apply(g, w) == pytest.approx(cert.riesz_value, abs=1e-9)


def test_lp_values_monotone_within_phase():
    # a positive vector near the boundary forces cuts
    g = MomentVector(I4, 0.9 * atomic_moments(AtomicMeasure([[0.3], [0.71]], [0.5, 0.5]),
                                              I4).values + 0.1 / np.arange(1, 6))
    cert = certify(g, UNIT, CertifyParams(resolution=16))
    assert cert.cuts_used > 0
    for values in cert.lp_history.values():
        assert all(b >= a - 1e-9 for a, b in zip(values, values[1:]))


def test_preconditions():
    with pytest.raises(IrregularIndexSet):
        certify(MomentVector(IndexSet([(0, 0), (1, 1)]), [1.0, 0.2]),
                Box(np.array([0.0, 0.0]), np.array([1.0, 1.0])))
    with pytest.raises(MalformedInput):
        certify(MomentVector(I2, [2.0, 1.0, 0.5]), UNIT)


def test_scale_covariance_of_degenerate_witness():
    cert = certify(DIRAC, UNIT)
    w = cert.witness
    for lam in (0.5, 3.0):
        scaled = MomentVector(I2, lam * DIRAC.values)
        assert riesz_apply(scaled, w) == pytest.approx(lam * riesz_apply(DIRAC, w), rel=1e-12,
                                                       abs=1e-15)


@settings(max_examples=15)
@given(st.integers(0, 10_000))
def test_density_moments_never_negative(seed):
    rng = np.random.default_rng(seed)
    vals = rng.random(12) + 0.05
    f = Density((GridFunction((0.0,), (1.0,), (12,), vals / vals.mean()),), UNIT)
    cert = certify(density_moments(f, I4), UNIT)
    assert cert.verdict != NEGATIVE_WITNESS
    if cert.margin > CertifyParams().tol_pos:
        assert cert.verdict == STRICTLY_POSITIVE


def test_brute_force_examples():
    assert abs(brute_force_margin(DIRAC, UNIT)) <= 1e-3
    leb = MomentVector(I2, [1.0, 0.5, 1 / 3])
    assert brute_force_margin(leb, UNIT) == pytest.approx(certify(leb, UNIT).margin, rel=0.1)
    assert brute_force_margin(NEG, UNIT) < 0
    with pytest.raises(ValueError):
        brute_force_margin(MomentVector(IndexSet.total_degree(5), np.ones(6)), UNIT)


def test_two_dimensional_certificate():
    T = Box(np.array([0.0, 0.0]), np.array([1.0, 1.0]))
    I = IndexSet.box_degree(1, 2)
    e = I.as_array()
    cert = certify(MomentVector(I, np.prod(1.0 / (e + 1), axis=1)), T)
    assert cert.verdict == STRICTLY_POSITIVE
    corner = MomentVector(I, [1.0, 1.0, 1.0, 1.0])
    assert certify(corner, T).verdict == DEGENERATE
