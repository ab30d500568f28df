"""File-format tests: scenario, kernel, matrix, and vector files.

Round trips are compared byte-for-byte, error paths must raise ParseError
carrying a location string, and ExactnessWarning fires exactly when a bare
float enters a field that exact simultaneity grouping depends on.
"""

import copy
import json
import warnings
from fractions import Fraction
from importlib import resources

import numpy as np
import pytest

from narratables.clusterkit import analyze
from narratables.errors import ExactnessWarning, ParseError
from narratables.fileio import (
    dump_scenario,
    load_kernel_file,
    load_matrix_file,
    load_scenario_file,
    load_vector_file,
    parse_kernel,
    parse_matrix,
    parse_scenario,
    parse_vector,
    write_scenario_file,
)
from narratables.quantum import PairingSpec, singlet_product, swap_unitary


def data_path(name):
    return resources.files("narratables").joinpath("data", name)


def minimal_doc():
    return {
        "particles": [
            {
                "id": 0,
                "species": "a",
                "start": {"t": 0, "x": 0, "y": 0, "z": 0},
                "velocity": ["0", "0", "0"],
            }
        ],
        "initial_state": {"amplitudes": [1, 0]},
        "rules": {"free": []},
        "foliations": [["0", "0", "0"]],
    }


# -- scenario files -----------------------------------------------------------


def test_packaged_demo_loads_exactly():
    with warnings.catch_warnings():
        warnings.simplefilter("error")  # everything in the file is exact
        bundle = load_scenario_file(data_path("demo_scenario.json"))
    lines = bundle.scenario.worldlines
    assert [w.species for w in lines] == ["s1", "s2", "s3", "s4"]
    assert lines[2].start.x == Fraction(-1)
    assert lines[2].start.y == Fraction(2)
    assert lines[2].velocity == (Fraction(0), Fraction(-1, 2), Fraction(0))
    assert isinstance(lines[2].velocity[1], Fraction)
    expected = singlet_product(4, PairingSpec(((0, 1), (2, 3)), ()))
    np.testing.assert_allclose(
        bundle.scenario.initial_state.amplitudes, expected.amplitudes, atol=1e-15
    )
    assert set(bundle.rules) == {"free", "flip"}
    flip = bundle.rules["flip"]
    assert np.array_equal(flip.unitary_for("s1", "s3").matrix, swap_unitary().matrix)
    assert np.array_equal(flip.unitary_for("s3", "s1").matrix, swap_unitary().matrix)
    assert np.array_equal(flip.unitary_for("s1", "s2").matrix, np.eye(4))
    assert bundle.foliations[0].is_rest
    assert bundle.foliations[1].velocity == (Fraction(3, 5), Fraction(0), Fraction(0))
    assert bundle.foliations[2].velocity == (Fraction(0), Fraction(1, 2), Fraction(0))
    assert all(f.exact for f in bundle.foliations)


def test_scenario_write_read_round_trip_is_byte_identical(tmp_path):
    bundle = load_scenario_file(data_path("demo_scenario.json"))
    first = tmp_path / "first.json"
    second = tmp_path / "second.json"
    write_scenario_file(bundle, first)
    reloaded = load_scenario_file(first)
    write_scenario_file(reloaded, second)
    assert first.read_bytes() == second.read_bytes()
    assert dump_scenario(bundle) == dump_scenario(reloaded)


def test_dump_scenario_shape():
    bundle = load_scenario_file(data_path("demo_scenario.json"))
    doc = dump_scenario(bundle)
    assert doc["particles"][0]["start"] == {"t": "0", "x": "-1", "y": "0", "z": "0"}
    assert doc["particles"][2]["velocity"] == ["0", "-1/2", "0"]
    assert doc["foliations"][1] == ["3/5", "0", "0"]
    # the singlet product becomes an explicit amplitude vector
    amps = doc["initial_state"]["amplitudes"]
    assert len(amps) == 16
    assert amps[5] == pytest.approx(0.5)
    assert doc["rules"]["flip"] == [
        {"pair": ["s1", "s3"], "unitary": "swap"},
        {"pair": ["s2", "s4"], "unitary": "swap"},
    ]


def test_rationals_parse_exactly_and_ints_are_exact():
    doc = minimal_doc()
    doc["particles"][0]["velocity"] = ["3/5", "0", "0"]
    doc["particles"][0]["start"] = {"t": 2, "x": "-7/3", "y": 0, "z": 0}
    bundle = parse_scenario(doc)
    line = bundle.scenario.worldlines[0]
    assert line.velocity[0] == Fraction(3, 5)
    assert line.start.x == Fraction(-7, 3)
    assert line.start.t == Fraction(2)


def test_float_coordinate_warns_and_reads_as_printed_decimal():
    doc = minimal_doc()
    doc["particles"][0]["start"] = {"t": 0.5, "x": 0, "y": 0, "z": 0}
    with pytest.warns(ExactnessWarning, match="3/5"):
        bundle = parse_scenario(doc)
    assert bundle.scenario.worldlines[0].start.t == Fraction(1, 2)


def test_float_foliation_component_stays_float():
    doc = minimal_doc()
    doc["foliations"] = [[0.3, 0, 0]]
    with pytest.warns(ExactnessWarning, match="1e-9 tolerance"):
        bundle = parse_scenario(doc)
    fol = bundle.foliations[0]
    assert isinstance(fol.velocity[0], float)
    assert fol.velocity[0] == 0.3
    assert not fol.exact


def test_invalid_json_reports_line_and_column(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"particles": [,]}')
    with pytest.raises(ParseError, match=r"line 1 column"):
        load_scenario_file(bad)


def test_missing_file_is_a_parse_error(tmp_path):
    with pytest.raises(ParseError, match="cannot read"):
        load_scenario_file(tmp_path / "nope.json")


@pytest.mark.parametrize("key", ["particles", "initial_state", "rules", "foliations"])
def test_missing_top_level_key(key):
    doc = minimal_doc()
    del doc[key]
    with pytest.raises(ParseError, match=key):
        parse_scenario(doc)


def test_particle_field_errors():
    doc = minimal_doc()
    del doc["particles"][0]["velocity"]
    with pytest.raises(ParseError, match=r"particles\[0\].*velocity"):
        parse_scenario(doc)

    doc = minimal_doc()
    doc["particles"][0]["start"] = [0, 0, 0]
    with pytest.raises(ParseError, match=r"\{t,x,y,z\} or a 4-list"):
        parse_scenario(doc)

    doc = minimal_doc()
    doc["particles"][0]["velocity"] = ["0", "0"]
    with pytest.raises(ParseError, match="3-list"):
        parse_scenario(doc)

    doc = minimal_doc()
    doc["particles"][0]["start"] = {"t": "1/0", "x": 0, "y": 0, "z": 0}
    with pytest.raises(ParseError, match="cannot parse rational"):
        parse_scenario(doc)

    doc = minimal_doc()
    doc["particles"][0]["start"] = {"t": True, "x": 0, "y": 0, "z": 0}
    with pytest.raises(ParseError, match="expected a rational"):
        parse_scenario(doc)


def test_superluminal_velocity_is_a_parse_error():
    doc = minimal_doc()
    doc["particles"][0]["velocity"] = ["5/3", "0", "0"]
    with pytest.raises(ParseError, match=r"particles\[0\]"):
        parse_scenario(doc)


def test_bad_ids_and_coincident_lines_become_parse_errors():
    doc = minimal_doc()
    doc["particles"][0]["id"] = 1
    with pytest.raises(ParseError, match="ids"):
        parse_scenario(doc)

    doc = minimal_doc()
    doc["particles"].append(copy.deepcopy(doc["particles"][0]))
    doc["particles"][1]["id"] = 1
    doc["initial_state"] = {"amplitudes": [1, 0, 0, 0]}
    with pytest.raises(ParseError, match="coincide"):
        parse_scenario(doc)


def test_initial_state_requires_a_known_key():
    doc = minimal_doc()
    doc["initial_state"] = {"mystery": 1}
    with pytest.raises(ParseError, match="singlet_pairs.*amplitudes"):
        parse_scenario(doc)


def test_amplitudes_normalized_only_when_needed():
    doc = minimal_doc()
    doc["initial_state"] = {"amplitudes": [1, 1]}
    bundle = parse_scenario(doc)
    amps = bundle.scenario.initial_state.amplitudes
    np.testing.assert_allclose(np.abs(amps), [2**-0.5, 2**-0.5], atol=1e-15)

    # an exactly normalized vector is left untouched, keeping round trips stable
    doc["initial_state"] = {"amplitudes": [[0, 1], 0]}
    bundle = parse_scenario(doc)
    assert bundle.scenario.initial_state.amplitudes[0] == 1j


def test_zero_amplitudes_rejected():
    doc = minimal_doc()
    doc["initial_state"] = {"amplitudes": [0, 0]}
    with pytest.raises(ParseError, match="zero vector"):
        parse_scenario(doc)


def test_wrong_amplitude_dimension_rejected():
    doc = minimal_doc()
    doc["initial_state"] = {"amplitudes": [1, 0, 0]}
    with pytest.raises(ParseError, match="amplitudes"):
        parse_scenario(doc)


def test_singlet_pairs_with_singles():
    doc = minimal_doc()
    doc["particles"] = [
        {
            "id": i,
            "species": f"s{i}",
            "start": {"t": 0, "x": i, "y": 0, "z": 0},
            "velocity": ["0", "0", "0"],
        }
        for i in range(3)
    ]
    doc["initial_state"] = {"singlet_pairs": [[0, 1]], "singles": {"2": [2, 0]}}
    bundle = parse_scenario(doc)
    expected = singlet_product(
        3, PairingSpec(((0, 1),), ((2, np.array([1.0, 0.0])),))
    )
    np.testing.assert_allclose(
        bundle.scenario.initial_state.amplitudes, expected.amplitudes, atol=1e-15
    )


def test_bad_singlet_pairing_is_a_parse_error():
    doc = minimal_doc()
    doc["initial_state"] = {"singlet_pairs": [[0, 0]]}
    with pytest.raises(ParseError):
        parse_scenario(doc)


def test_rule_default_entry_round_trip():
    doc = minimal_doc()
    doc["rules"] = {"always-swap": [{"unitary": "swap"}]}
    bundle = parse_scenario(doc)
    rule = bundle.rules["always-swap"]
    assert np.array_equal(rule.unitary_for("a", "b").matrix, swap_unitary().matrix)
    dumped = dump_scenario(bundle)
    assert dumped["rules"]["always-swap"] == [{"unitary": "swap"}]
    again = parse_scenario(dumped)
    assert np.array_equal(
        again.rules["always-swap"].unitary_for("x", "y").matrix,
        swap_unitary().matrix,
    )


def test_rule_matrix_unitary_round_trip():
    phase = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0], [0, 0, 0, -1]]
    doc = minimal_doc()
    doc["rules"] = {"phase": [{"pair": ["a", "a"], "unitary": phase}]}
    bundle = parse_scenario(doc)
    matrix = bundle.rules["phase"].unitary_for("a", "a").matrix
    assert np.array_equal(matrix, np.diag([1, 1, 1, -1]).astype(complex))
    dumped = dump_scenario(bundle)
    reparsed = parse_scenario(dumped)
    assert np.array_equal(
        reparsed.rules["phase"].unitary_for("a", "a").matrix, matrix
    )


def test_rule_errors():
    doc = minimal_doc()
    doc["rules"] = {"r": [{"pair": ["a", "b"]}]}
    with pytest.raises(ParseError, match="unitary"):
        parse_scenario(doc)

    doc["rules"] = {"r": [{"unitary": "swap"}, {"unitary": "identity"}]}
    with pytest.raises(ParseError, match="only one default"):
        parse_scenario(doc)

    doc["rules"] = {"r": [{"pair": ["a"], "unitary": "swap"}]}
    with pytest.raises(ParseError, match="two species names"):
        parse_scenario(doc)

    doc["rules"] = {"r": [{"pair": ["a", "b"], "unitary": "frobnicate"}]}
    with pytest.raises(ParseError, match="'swap', 'identity', or a 4x4 matrix"):
        parse_scenario(doc)

    doc["rules"] = {"r": [{"pair": ["a", "b"], "unitary": [[2, 0, 0, 0]] * 4}]}
    with pytest.raises(ParseError, match="not unitary"):
        parse_scenario(doc)

    doc["rules"] = {}
    with pytest.raises(ParseError, match="non-empty object"):
        parse_scenario(doc)

    doc["rules"] = {"r": {"pair": 1}}
    with pytest.raises(ParseError, match="list of"):
        parse_scenario(doc)


def test_foliation_errors():
    doc = minimal_doc()
    doc["foliations"] = [["0", "0"]]
    with pytest.raises(ParseError, match="3-list"):
        parse_scenario(doc)

    doc["foliations"] = [["1", "0", "0"]]
    with pytest.raises(ParseError, match=r"foliations\[0\]"):
        parse_scenario(doc)

    doc["foliations"] = []
    with pytest.raises(ParseError, match="non-empty list"):
        parse_scenario(doc)


# -- kernel files -------------------------------------------------------------


def test_packaged_kernels_load():
    swap = load_kernel_file(data_path("spin_swap.kernel.json"))
    assert swap.out_slots == ("q1", "q2")
    assert swap.in_slots == ("p1", "p2")
    assert swap.deltas == ((0, 1, -1, 0), (1, 0, 0, -1))
    assert swap.smooth_prefactor_present
    assert dict(swap.metadata)["spin"].startswith("outgoing spins")
    assert not analyze(swap).compliant

    single = load_kernel_file(data_path("single_delta.kernel.json"))
    assert single.deltas == ((1, 1, -1, -1),)
    assert analyze(single).compliant


def test_kernel_rational_and_float_coefficients():
    doc = {
        "in_slots": ["p1", "p2"],
        "out_slots": ["q1", "q2"],
        "deltas": [{"q1": "1/2", "p1": "-1/2"}],
    }
    kernel = parse_kernel(doc)
    assert kernel.deltas == ((Fraction(1, 2), 0, Fraction(-1, 2), 0),)

    doc["deltas"] = [{"q1": 0.5, "p1": -0.5}]
    with pytest.warns(ExactnessWarning):
        kernel = parse_kernel(doc)
    assert kernel.deltas == ((Fraction(1, 2), 0, Fraction(-1, 2), 0),)


def test_kernel_errors():
    base = {
        "in_slots": ["p1", "p2"],
        "out_slots": ["q1", "q2"],
        "deltas": [{"q1": 1, "p1": -1}],
    }

    doc = copy.deepcopy(base)
    del doc["deltas"]
    with pytest.raises(ParseError, match="deltas"):
        parse_kernel(doc)

    doc = copy.deepcopy(base)
    doc["in_slots"] = ["q1", "p2"]
    with pytest.raises(ParseError, match="unique"):
        parse_kernel(doc)

    doc = copy.deepcopy(base)
    doc["deltas"] = [{"nope": 1}]
    with pytest.raises(ParseError, match="unknown slot 'nope'"):
        parse_kernel(doc)

    doc = copy.deepcopy(base)
    doc["deltas"] = ["not-a-map"]
    with pytest.raises(ParseError, match="map"):
        parse_kernel(doc)

    doc = copy.deepcopy(base)
    doc["deltas"] = [{"q1": 0}]
    with pytest.raises(ParseError):
        parse_kernel(doc)

    doc = copy.deepcopy(base)
    doc["metadata"] = ["not-an-object"]
    with pytest.raises(ParseError, match="metadata"):
        parse_kernel(doc)

    doc = copy.deepcopy(base)
    doc["in_slots"] = "p1"
    with pytest.raises(ParseError, match="lists of names"):
        parse_kernel(doc)

    with pytest.raises(ParseError, match="JSON object"):
        parse_kernel(["not", "a", "dict"])


# -- matrix and vector files --------------------------------------------------


def test_parse_matrix_entries():
    m = parse_matrix([[1, 0], [0, [0, -1]]], "m")
    assert m.dtype == complex
    assert m[1, 1] == -1j

    m = parse_matrix({"matrix": [[1.5]]}, "m")
    assert m[0, 0] == 1.5


def test_parse_matrix_errors():
    with pytest.raises(ParseError, match="list of rows"):
        parse_matrix([], "m")
    with pytest.raises(ParseError, match="list of rows"):
        parse_matrix({"rows": []}, "m")
    with pytest.raises(ParseError, match="unequal"):
        parse_matrix([[1, 2], [3]], "m")
    with pytest.raises(ParseError, match=r"m\[0\]\[1\]"):
        parse_matrix([[1, True]], "m")
    with pytest.raises(ParseError, match=r"\[re, im\]"):
        parse_matrix([[[1, 2, 3]]], "m")


def test_parse_vector():
    v = parse_vector([1, [0, 1]], "v")
    assert v[1] == 1j
    v = parse_vector({"vector": [2]}, "v")
    assert v[0] == 2
    with pytest.raises(ParseError, match="list of entries"):
        parse_vector([], "v")
    with pytest.raises(ParseError, match=r"v\[0\]"):
        parse_vector([None], "v")


def test_matrix_and_vector_files(tmp_path):
    mpath = tmp_path / "m.json"
    mpath.write_text(json.dumps({"matrix": [[0, 1], [1, 0]]}))
    np.testing.assert_array_equal(load_matrix_file(mpath), [[0, 1], [1, 0]])

    vpath = tmp_path / "v.json"
    vpath.write_text(json.dumps([1, 0, 0]))
    np.testing.assert_array_equal(load_vector_file(vpath), [1, 0, 0])
