import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from polylift import io
from polylift.filterbank import Signal, split
from polylift.gridfun import GridMatrix
from polylift.liftfactor import LiftingChain, residual_matrix, random_steps
from polylift.polymat import LiftingStep
from helpers import poly_matrices, polys, seeds


def through_text(data):
    """Serialize and parse back, as a file round-trip would."""
    return json.loads(json.dumps(data))


@given(polys())
def test_poly_roundtrip(p):
    assert io.poly_from_json(through_text(io.poly_to_json(p))) == p


@given(st.integers(2, 3).flatmap(poly_matrices))
def test_matrix_roundtrip(a):
    assert io.matrix_from_json(through_text(io.matrix_to_json(a))) == a


@given(seeds, st.integers(2, 4), st.integers(-2, 2), st.sampled_from([1.0, 2.5, 1j]))
def test_chain_roundtrip(seed, n, shift, scale):
    steps = tuple(random_steps(n, 3, 2, np.random.default_rng(seed)))
    ch = LiftingChain(n, steps + (LiftingStep.scale(3), LiftingStep.shift(1)),
                      residual_matrix(n, shift, scale), shift, scale)
    back = io.chain_from_json(through_text(io.chain_to_json(ch, {"note": 1})))
    assert back == ch


@given(seeds)
def test_grid_signal_bands_roundtrip(seed):
    rng = np.random.default_rng(seed)
    g = GridMatrix(rng.normal(size=(2, 2, 8)) + 1j * rng.normal(size=(2, 2, 8)))
    assert np.array_equal(io.grid_from_json(through_text(io.grid_to_json(g))).values, g.values)
    x = Signal(rng.normal(size=11) + 1j * rng.normal(size=11))
    assert np.array_equal(io.signal_from_json(through_text(io.signal_to_json(x))).samples,
                          x.samples)
    b = split(x, 3)
    back, boundary = io.bands_from_json(through_text(io.bands_to_json(b, "zero")))
    assert boundary == "zero" and back.length == 11
    assert all(np.array_equal(u, v) for u, v in zip(back.bands, b.bands))


def test_binary_signal_roundtrip(tmp_path):
    x = Signal(np.array([1 + 2j, -0.5, 3j]))
    path = tmp_path / "x.bin"
    io.write_signal_binary(path, x)
    assert path.stat().st_size == 3 * 16
    raw = np.fromfile(path, dtype="<f8")
    assert list(raw) == [1, 2, -0.5, 0, 0, 3]
    assert np.array_equal(io.read_signal_binary(path).samples, x.samples)


def test_binary_signal_odd_length(tmp_path):
    path = tmp_path / "bad.bin"
    np.array([1.0, 2.0, 3.0], dtype="<f8").tofile(path)
    with pytest.raises(io.MalformedInput):
        io.read_signal_binary(path)


@pytest.mark.parametrize("loader,data", [
    (io.matrix_from_json, {"n": 2}),
    (io.matrix_from_json, {"n": 3, "entries": [[{"min_exp": 0, "coeffs": [[1, 0]]}]]}),
    (io.poly_from_json, {"min_exp": 0, "coeffs": [[1, 2, 3]]}),
    (io.grid_from_json, {"n": 2, "m": 4, "entries": [[[[1, 0]]]]}),
    (io.chain_from_json, {"n": 2, "steps": [{"kind": "sideways", "params": []}]}),
])
def test_malformed_structures(loader, data):
    with pytest.raises(io.MalformedInput):
        io.parse(loader, data, "thing")


def test_load_json_rejects_garbage(tmp_path):
    path = tmp_path / "x.json"
    path.write_text("{not json")
    with pytest.raises(io.MalformedInput):
        io.load_json(path)
