import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from momentcone.core import IndexSet, polynomial_from_terms
from momentcone.errors import EmptyGrid, RegularityViolation
from momentcone.regions import (Ball, Box, SemialgebraicInBox, UnionOfBoxes, ball_integrals,
                                contains, disc_box_integrals, local_volume, power_integrals,
                                regularity_probe, sample_grid)

DISC = Ball(np.array([0.0, 0.0]), 1.0)


def test_contains_examples(unit):
    assert contains(unit, 0.5)
    assert contains(unit, 1.0)
    assert not contains(DISC, [1.0, 1.0])


def test_semialgebraic_membership():
    q = polynomial_from_terms(IndexSet.total_degree(2, 2), {(0, 0): 1, (2, 0): -1, (0, 2): -1})
    T = SemialgebraicInBox(Box(np.array([-1.0, -1.0]), np.array([1.0, 1.0])), (q,))
    assert contains(T, [0.6, 0.8])
    assert not contains(T, [0.9, 0.9])


def test_local_volume_examples(unit, square):
    assert local_volume(unit, 0.5, 0.1) == pytest.approx(0.2, abs=1e-15)
    assert local_volume(unit, 0.05, 0.1) == pytest.approx(0.15, abs=1e-15)
    assert local_volume(square, [0.0, 0.0], 0.1) == pytest.approx(math.pi * 0.01 / 4, abs=1e-5)


def test_local_volume_disc_by_qmc():
    # QMC path: the disc itself as support; target 1e-3 relative
    v = local_volume(DISC, [1.0, 0.0], 0.1)
    # lens area of two discs, radii 1 and 0.1, centre distance 1
    r, R, d = 0.1, 1.0, 1.0
    lens = (r * r * math.acos((d * d + r * r - R * R) / (2 * d * r))
            + R * R * math.acos((d * d + R * R - r * r) / (2 * d * R))
            - 0.5 * math.sqrt((-d + r + R) * (d + r - R) * (d - r + R) * (d + r + R)))
    assert v == pytest.approx(lens, rel=1e-3)


@given(st.floats(0, 1), st.floats(0.001, 0.9), st.floats(0.001, 0.9))
def test_local_volume_bounded_and_monotone_1d(y, e1, e2):
    T = Box(np.array([0.0]), np.array([1.0]))
    lo, hi = sorted((e1, e2))
    v_lo, v_hi = local_volume(T, y, lo), local_volume(T, y, hi)
    assert v_lo <= 2 * lo + 1e-15
    assert v_lo <= v_hi + 1e-15


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0.01, 0.5))
def test_local_volume_bounded_2d(a, b, eps):
    T = Box(np.array([0.0, 0.0]), np.array([1.0, 1.0]))
    v = local_volume(T, [a, b], eps)
    assert 0 < v <= math.pi * eps ** 2 * (1 + 1e-12)
    if eps <= min(a, b, 1 - a, 1 - b):
        assert v == pytest.approx(math.pi * eps ** 2, rel=1e-10)


@given(st.floats(0, 1), st.floats(0, 1), st.floats(0.02, 0.4))
def test_translated_volume_identity_2d(a, b, eps):
    # volume of {|w| < eps, w in T - y} computed on the translated box vs directly
    y = np.array([a, b])
    T = Box(np.array([0.0, 0.0]), np.array([1.0, 1.0]))
    direct = local_volume(T, y, eps)
    moved = Box(-y, 1.0 - y)
    assert local_volume(moved, [0.0, 0.0], eps) / direct == pytest.approx(1.0, abs=1e-3)


def test_disc_integrals_match_monte_carlo():
    rng = np.random.default_rng(1)
    c, r = np.array([0.9, 0.2]), 0.3
    lo, hi = np.array([0.0, 0.0]), np.array([1.0, 1.0])
    exps = np.array([[0, 0], [1, 0], [0, 1], [2, 1]])
    exact = disc_box_integrals(c, r, lo, hi, exps)
    pts = lo + rng.random((400_000, 2))
    inside = np.sum((pts - c) ** 2, axis=1) < r * r
    mc = np.array([np.mean(inside * pts[:, 0] ** e[0] * pts[:, 1] ** e[1]) for e in exps])
    assert np.allclose(exact, mc, atol=3e-3)


def test_power_integrals_exact():
    assert np.allclose(power_integrals(-1.0, 2.0, 3), [3.0, 1.5, 3.0, 3.75])
    assert np.allclose(power_integrals(0.4, 0.6, 2)[2], (0.6 ** 3 - 0.4 ** 3) / 3, atol=1e-16)


def test_sample_grid_examples(unit, square):
    g = sample_grid(unit, 5)
    assert np.allclose(g.points[:, 0], [0, 0.25, 0.5, 0.75, 1])
    assert g.cell_volume == pytest.approx(0.2)
    assert len(sample_grid(square, 3)) == 9
    disc = sample_grid(Ball(np.array([0.0, 0.0]), 1.0), 100)
    # endpoint-inclusive lattice: retained fraction is about (pi/4)(1 - 1/N)^2
    assert len(disc) / 100 ** 2 == pytest.approx(math.pi / 4, rel=0.03)


@given(st.integers(2, 40), st.integers(2, 40))
def test_grid_cell_volumes_sum_to_box_volume(r1, r2):
    T = Box(np.array([-1.0, 0.0]), np.array([1.0, 3.0]))
    g = sample_grid(T, r1)
    assert len(g) * g.cell_volume == pytest.approx(6.0)
    assert np.all(T.contains(g.points))


def test_empty_grid():
    T = UnionOfBoxes((Box(np.array([0.1]), np.array([0.2])), Box(np.array([0.8]), np.array([0.9]))))
    # two points per axis land on the bounding-box ends, which belong to T
    assert len(sample_grid(T, 2)) == 2
    thin = SemialgebraicInBox(Box(np.array([0.0]), np.array([1.0])),
                              (polynomial_from_terms(IndexSet.total_degree(2),
                                                     {(0,): -0.24, (1,): 1.0, (2,): -1.0}),))
    # -0.24 + t - t^2 >= 0 only on [0.4, 0.6]; a 2-point grid misses it
    with pytest.raises(EmptyGrid):
        sample_grid(thin, 2)


def test_probe_examples(square):
    rep = regularity_probe(square, 64, [0.1])
    assert rep.ok
    assert rep.min_volume[0.1] == pytest.approx(math.pi * 0.01 / 4, abs=1e-5)
    assert not regularity_probe(Box(np.array([0.0, 0.0]), np.array([1.0, 0.0])), 10, [0.1]).ok
    assert regularity_probe(DISC, 64, [0.05]).ok
    assert "heuristic" in rep.note


def test_regularity_violation_on_thin_box():
    with pytest.raises(RegularityViolation):
        local_volume(Box(np.array([0.0, 0.0]), np.array([1.0, 0.0])), [0.5, 0.0], 0.1)


def test_ball_integrals_union_1d():
    T = UnionOfBoxes((Box(np.array([0.0]), np.array([0.4])), Box(np.array([0.6]), np.array([1.0]))))
    out = ball_integrals(T, [0.5], 0.2, np.array([[0], [1]]))
    assert np.allclose(out, [0.2, 0.1])
