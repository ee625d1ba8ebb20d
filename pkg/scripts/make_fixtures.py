"""Regenerate the JSON fixtures under fixtures/."""
from pathlib import Path

import numpy as np

from momentcone import io
from momentcone.core import IndexSet, MomentVector, polynomial_from_terms
from momentcone.quadrature import AtomicMeasure, Density, GridFunction, ScaledBallIndicator
from momentcone.regions import Ball, Box, SemialgebraicInBox, UnionOfBoxes

OUT = Path(__file__).resolve().parent.parent / "fixtures"

UNIT = Box(np.array([0.0]), np.array([1.0]))
SQUARE = Box(np.array([0.0, 0.0]), np.array([1.0, 1.0]))


def problem(name, index_set, moments, support, params=None):
    prob = io.Problem(MomentVector(index_set, moments), support, params or {})
    write(name, io.problem_to_json(prob))


def write(name, payload):
    (OUT / f"{name}.json").write_text(io.dumps(payload))


def main():
    OUT.mkdir(exist_ok=True)
    deg4 = IndexSet.total_degree(4)
    deg2 = IndexSet.total_degree(2)
    k = np.arange(5)
    problem("lebesgue_deg4", deg4, 1.0 / (k + 1), UNIT)
    problem("density2t_deg4", deg4, 2.0 / (k + 2), UNIT)
    problem("lebesgue_deg2", deg2, [1.0, 1 / 2, 1 / 3], UNIT)
    problem("dirac_half", deg2, [1.0, 0.5, 0.25], UNIT)
    problem("negative", deg2, [1.0, 2.0, 1.0], UNIT)
    box2 = IndexSet.box_degree(2, 2)
    e = box2.as_array()
    problem("lebesgue_2d", box2, np.prod(1.0 / (e + 1), axis=1), SQUARE)
    irregular = IndexSet([(0, 0), (2, 1)])
    write("irregular_index_set", {"dim": 2, "index_set": io.index_set_to_json(irregular),
                                  "support": io.region_to_json(SQUARE)})

    delta = io.measure_to_json(AtomicMeasure([[0.5]], [1.0], UNIT))
    delta["index_set"] = io.index_set_to_json(deg2)
    write("delta_half_measure", delta)
    moll = io.density_to_json(Density((ScaledBallIndicator((0.5,), 0.1, 5.0),), UNIT))
    moll["index_set"] = io.index_set_to_json(deg2)
    write("mollified_delta_density", moll)
    const = io.density_to_json(Density((GridFunction((0.0,), (1.0,), (1,), [1.0]),), UNIT))
    const["index_set"] = io.index_set_to_json(deg4)
    write("constant_density", const)

    write("region_interval", io.region_to_json(UNIT))
    write("region_square", io.region_to_json(SQUARE))
    write("region_disc", io.region_to_json(Ball(np.array([0.0, 0.0]), 1.0)))
    write("region_union", io.region_to_json(UnionOfBoxes((
        Box(np.array([0.0]), np.array([0.4])), Box(np.array([0.6]), np.array([1.0]))))))
    disc = polynomial_from_terms(IndexSet.total_degree(2, 2),
                                 {(0, 0): 1.0, (2, 0): -1.0, (0, 2): -1.0})
    write("region_semialgebraic", io.region_to_json(
        SemialgebraicInBox(Box(np.array([-1.0, -1.0]), np.array([1.0, 1.0])), (disc,))))


if __name__ == "__main__":
    main()
