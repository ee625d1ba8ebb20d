import numpy as np
import pytest
from hypothesis import given, strategies as st

from momentcone.core import IndexSet
from momentcone.mollify import error_bound, mollify, psi
from momentcone.quadrature import (AtomicMeasure, ExpTail, ScaledBallIndicator, atomic_moments,
                                   density_moments)
from momentcone.regions import Box

UNIT = Box(np.array([0.0]), np.array([1.0]))
SQUARE = Box(np.array([0.0, 0.0]), np.array([1.0, 1.0]))


def test_mollify_examples():
    f = mollify(AtomicMeasure([[0.5]], [1.0], UNIT), UNIT, 0.1)
    (ball,) = f.components
    assert ball.center == (0.5,) and ball.radius == 0.1
    assert ball.scale == pytest.approx(5.0)
    m = density_moments(f, IndexSet.total_degree(2))
    assert np.allclose(m.values, [1.0, 0.5, 0.76 / 3], atol=1e-12)
    (edge,) = mollify(AtomicMeasure([[0.0]], [1.0], UNIT), UNIT, 0.1).components
    assert edge.scale == pytest.approx(10.0)


def test_psi_examples():
    assert psi(0.1, (0,), 0.5, UNIT) == pytest.approx(1.0, abs=1e-12)
    assert psi(0.1, (1,), 0.5, UNIT) == pytest.approx(0.5, abs=1e-15)
    assert psi(0.1, (2,), 0.5, UNIT) == pytest.approx(0.25 + 0.01 / 3, abs=1e-12)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0.01, 0.9))
def test_psi_zero_is_one_2d(a, b, eps):
    assert psi(eps, (0, 0), [a, b], SQUARE) == pytest.approx(1.0, abs=1e-12)


def test_error_bound_examples():
    delta = AtomicMeasure([[0.5]], [1.0])
    assert error_bound(delta, 0.1, (2,)) == pytest.approx(0.225)
    assert error_bound(delta, 0.1, (0,)) == 0.0
    assert error_bound(AtomicMeasure([[0.0]], [1.0]), 0.1, (3,)) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        error_bound(delta, 1.0, (1,))


def _random_measure(rng, dim, T):
    k = rng.integers(1, 6)
    w = rng.random(k)
    return AtomicMeasure(rng.random((k, dim)), w / w.sum(), T)


@given(st.integers(0, 10_000), st.sampled_from([1, 2]))
def test_error_bound_holds(seed, dim):
    rng = np.random.default_rng(seed)
    T = UNIT if dim == 1 else SQUARE
    I = IndexSet.total_degree(4, dim)
    nu = _random_measure(rng, dim, T)
    target = atomic_moments(nu, I).values
    for eps in (0.2, 0.1, 0.05):
        got = density_moments(mollify(nu, T, eps), I).values
        for k, i in enumerate(I):
            assert abs(got[k] - target[k]) <= error_bound(nu, eps, i) + 1e-8


@given(st.integers(0, 10_000))
def test_mass_preserved(seed):
    rng = np.random.default_rng(seed)
    nu = _random_measure(rng, 2, SQUARE)
    m = density_moments(mollify(nu, SQUARE, 0.1), IndexSet.total_degree(1, 2))
    assert m.g0 == pytest.approx(nu.mass, abs=1e-10)


@given(st.floats(0.01, 0.9), st.lists(st.floats(0, 1), min_size=1, max_size=4))
def test_ensure_positive_floor(eps, ys):
    nu = AtomicMeasure(np.array(ys)[:, None], np.ones(len(ys)) / len(ys), UNIT)
    f = mollify(nu, UNIT, eps, ensure_positive=True)
    assert isinstance(f.components[-1], ExpTail)
    t = np.linspace(0, 1, 2001)
    assert f(t).min() >= eps * np.exp(-1.0) * (1 - 1e-12)
    assert all(isinstance(c, ScaledBallIndicator) for c in f.components[:-1])


def test_convergence_rate():
    nu = AtomicMeasure([[0.13], [0.5], [0.92]], [0.3, 0.3, 0.4], UNIT)
    I = IndexSet.total_degree(4)
    target = atomic_moments(nu, I).values
    drift = [np.abs(density_moments(mollify(nu, UNIT, e), I).values - target).max()
             for e in (0.2, 0.1, 0.05, 0.025)]
    for a, b in zip(drift, drift[1:]):
        assert b <= 1.1 * a
