import json

import jsonschema
import numpy as np
import pytest
from hypothesis import given, strategies as st

from momentcone import io
from momentcone.cli import run
from momentcone.core import IndexSet, MomentVector
from momentcone.errors import IrregularIndexSet, MalformedInput
from momentcone.mollify import mollify
from momentcone.quadrature import AtomicMeasure, density_moments
from momentcone.regions import Box

from conftest import FIXTURES, SCHEMAS

UNIT = Box(np.array([0.0]), np.array([1.0]))


def _schema(name):
    return json.loads((SCHEMAS / f"{name}.schema.json").read_text())


def _run_json(capsys, *argv):
    code = run([*argv, "--json"])
    out = capsys.readouterr().out
    return code, json.loads(out), out


@given(st.lists(st.floats(-1e6, 1e6, allow_nan=False), min_size=6, max_size=6))
def test_moment_vector_round_trip(vals):
    I = IndexSet.total_degree(2, 2)
    g = MomentVector(I, vals)
    back = io.moment_vector_from_json(json.loads(io.dumps(io.moment_vector_to_json(g))))
    assert back.index_set == I and np.array_equal(back.values, g.values)


@pytest.mark.parametrize("name", ["region_interval", "region_square", "region_disc",
                                  "region_union", "region_semialgebraic"])
def test_region_round_trip(name):
    d = io.load_json(FIXTURES / f"{name}.json")
    jsonschema.validate(d, _schema("region"))
    T = io.region_from_json(d)
    again = io.region_to_json(io.region_from_json(json.loads(io.dumps(io.region_to_json(T)))))
    assert io.dumps(again) == io.dumps(io.region_to_json(T))


def test_density_round_trip():
    nu = AtomicMeasure([[0.2], [0.7]], [0.4, 0.6], UNIT)
    f = mollify(nu, UNIT, 0.05, ensure_positive=True)
    d = json.loads(io.dumps(io.density_to_json(f)))
    jsonschema.validate(d, _schema("density"))
    g = io.density_from_json(d)
    I = IndexSet.total_degree(3)
    assert np.allclose(density_moments(f, I).values, density_moments(g, I).values, atol=1e-14)


def test_problem_loading_errors(tmp_path):
    with pytest.raises(IrregularIndexSet):
        io.problem_from_json(io.load_json(FIXTURES / "irregular_index_set.json") |
                             {"moments": [1.0, 0.5]})
    with pytest.raises(MalformedInput):
        io.load_json(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(MalformedInput):
        io.load_json(bad)


@pytest.mark.parametrize("fixture, code, verdict", [
    ("lebesgue_deg4", 0, "StrictlyPositive"),
    ("dirac_half", 1, "Degenerate"),
    ("negative", 2, "NegativeWitness"),
])
def test_certify_command(capsys, fixture, code, verdict):
    got, d, _ = _run_json(capsys, "certify", str(FIXTURES / f"{fixture}.json"))
    assert got == code and d["verdict"] == verdict
    jsonschema.validate(d, _schema("certificate"))


@pytest.mark.parametrize("fixture, code, verdict", [
    ("lebesgue_deg4", 0, "InteriorRepresentable"),
    ("dirac_half", 1, "Boundary"),
    ("negative", 2, "NotRepresentable"),
])
def test_classify_command(capsys, fixture, code, verdict):
    got, d, _ = _run_json(capsys, "classify", str(FIXTURES / f"{fixture}.json"))
    assert got == code and d["verdict"] == verdict
    jsonschema.validate(d, _schema("classification"))


def test_synthesize_command(capsys, tmp_path):
    out = tmp_path / "f.json"
    csv_path = tmp_path / "f.csv"
    code, d, _ = _run_json(capsys, "synthesize", str(FIXTURES / "density2t_deg4.json"),
                           "-o", str(out), "--csv", str(csv_path))
    assert code == 0 and d["max_moment_error"] <= 1e-6
    jsonschema.validate(d, _schema("synthesize"))
    jsonschema.validate(json.loads(out.read_text()), _schema("density"))
    assert csv_path.read_text().splitlines()[0] == "t0,density"


def test_mollify_and_moments_commands(capsys, tmp_path):
    out = tmp_path / "m.json"
    code, d, _ = _run_json(capsys, "mollify", str(FIXTURES / "delta_half_measure.json"),
                           "--eps", "0.1", "-o", str(out))
    assert code == 0
    jsonschema.validate(d, _schema("mollify"))
    code, d, _ = _run_json(capsys, "moments", str(FIXTURES / "mollified_delta_density.json"))
    assert code == 0
    jsonschema.validate(d, _schema("moments"))
    assert np.allclose(d["values"], [1.0, 0.5, 0.76 / 3], atol=1e-8)
    code, d, _ = _run_json(capsys, "moments", str(out), "--degree", "2")
    assert np.allclose(d["values"], [1.0, 0.5, 0.76 / 3], atol=1e-8)
    code, d, _ = _run_json(capsys, "moments", str(FIXTURES / "delta_half_measure.json"))
    assert d["values"] == [1.0, 0.5, 0.25]


def test_perturb_command(capsys):
    code, d, _ = _run_json(capsys, "perturb", str(FIXTURES / "constant_density.json"),
                           "--degree", "1", "--beta", "0,0.01")
    assert code == 0
    jsonschema.validate(d, _schema("perturb"))
    assert np.allclose(d["report"]["moments_after"]["values"], [1.0, 0.51], atol=1e-8)


def test_probe_and_close_commands(capsys):
    code, d, _ = _run_json(capsys, "probe-regularity", str(FIXTURES / "region_disc.json"),
                           "--samples", "32")
    assert code == 0
    jsonschema.validate(d, _schema("probe_regularity"))
    code, d, _ = _run_json(capsys, "close-index-set", str(FIXTURES / "irregular_index_set.json"))
    assert code == 0 and d["was_regular"] is False and d["added"]
    jsonschema.validate(d, _schema("close_index_set"))


@pytest.mark.parametrize("argv, code, kind", [
    ([], 64, "usage"),
    (["certify"], 64, "usage"),
    (["frobnicate", "x"], 64, "usage"),
    (["certify", "/nonexistent.json"], 65, "malformed_input"),
    (["certify", str(FIXTURES / "irregular_index_set.json")], 65, "irregular_index_set"),
    (["mollify", str(FIXTURES / "delta_half_measure.json"), "--eps", "2"], 65, "malformed_input"),
])
def test_error_exit_codes(capsys, argv, code, kind):
    got = run([*argv, "--json"])
    d = json.loads(capsys.readouterr().out)
    assert got == code and d["error"]["kind"] == kind
    jsonschema.validate(d, _schema("error"))


def test_errors_go_to_stderr_without_json(capsys):
    assert run(["certify", "/nonexistent.json"]) == 65
    captured = capsys.readouterr()
    assert captured.out == "" and "malformed_input" in captured.err


@pytest.mark.parametrize("argv", [
    ["classify", str(FIXTURES / "lebesgue_deg2.json")],
    ["certify", str(FIXTURES / "lebesgue_2d.json")],
    ["probe-regularity", str(FIXTURES / "region_union.json"), "--samples", "16"],
])
def test_byte_identical_output(capsys, argv):
    first = _run_json(capsys, *argv, "--seed", "7")[2]
    second = _run_json(capsys, *argv, "--seed", "7")[2]
    assert first == second
