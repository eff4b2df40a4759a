import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ctcq import io
from ctcq import linalg as la


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([(2,), (2, 2), (3,), (2, 3)]))
def test_matrix_json_round_trip_is_lossless(seed, dims):
    m = la.Operator(la.random_unitary(int(np.prod(dims)), seed).data, dims)
    text = io.dumps(io.matrix_to_json(m))
    back = io.matrix_from_json(json.loads(text))
    assert back.dims == m.dims
    assert np.array_equal(back.data, m.data)


def test_matrix_json_layout():
    m = la.Operator(np.array([[1, 2j], [3, 4]]))
    obj = io.matrix_to_json(m)
    assert obj == {"dims": [2], "entries": [[1.0, 0.0], [0.0, 2.0], [3.0, 0.0], [4.0, 0.0]]}


@pytest.mark.parametrize("bad", [
    {"dims": [2]},
    {"dims": [2], "entries": [[1, 0]]},
    {"entries": []},
    "text",
])
def test_matrix_json_rejects_malformed(bad):
    with pytest.raises(io.ParseError):
        io.matrix_from_json(bad)


def test_load_matrix_file(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(io.dumps(io.matrix_to_json(np.eye(2))))
    assert np.array_equal(io.load_matrix_file(p).data, np.eye(2))
    with pytest.raises(io.ParseError):
        io.load_matrix_file(tmp_path / "missing.json")
    (tmp_path / "bad.json").write_text("{")
    with pytest.raises(io.ParseError):
        io.load_matrix_file(tmp_path / "bad.json")


@pytest.mark.parametrize("text,bloch", [
    ("|0><0|", [0, 0, 1]),
    ("|1><1|", [0, 0, -1]),
    ("|+><+|", [1, 0, 0]),
    ("|-><-|", [-1, 0, 0]),
    ("|R><R|", [0, 1, 0]),
    ("|L><L|", [0, -1, 0]),
    ("mixed", [0, 0, 0]),
])
def test_single_qubit_literals(text, bloch):
    assert np.abs(la.bloch_from_state(io.parse_state_literal(text)) - bloch).max() < 1e-15


def test_multi_qubit_literals():
    m = io.parse_state_literal("|01><01|")
    assert m.dims == (2, 2) and m.data[1, 1] == 1
    b = io.parse_state_literal("bell").data
    assert abs(b[0, 3] - 0.5) < 1e-15 and abs(np.trace(b) - 1) < 1e-15
    mm = io.parse_state_literal("mixed:2")
    assert mm.dims == (2, 2) and np.abs(mm.data - np.eye(4) / 4).max() == 0


@pytest.mark.parametrize("text", ["|0><1|", "|2><2|", "0", "mixed:0", "", "|0>"])
def test_bad_literals(text):
    with pytest.raises(io.ParseError):
        io.parse_state_literal(text)


def test_dumps_is_canonical():
    assert io.dumps({"b": 1, "a": [1.5]}) == io.dumps({"a": [1.5], "b": 1})
    with pytest.raises(ValueError):
        io.dumps({"x": float("nan")})
