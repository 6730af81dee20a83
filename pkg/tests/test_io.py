import json

import numpy as np
import pytest

from epcluster import io
from epcluster.eigensolver import eig
from epcluster.fidelity import feature_vectors, fidelity_matrix
from epcluster.lattice import build_hamiltonian

from conftest import chain, sin_ring_spec


def test_lattice_round_trip(rng):
    spec = chain(6, 0.1, 0.03, 0.02, "ring")
    back = io.lattice_from_dict(json.loads(json.dumps(io.lattice_to_dict(spec))))
    np.testing.assert_array_equal(build_hamiltonian(back), build_hamiltonian(spec))
    assert back.boundary == "ring"


def test_profile_objects_and_override():
    d = {
        "n_sites": 12,
        "boundary": "ring",
        "forward_hops": {"kind": "uniform", "value": 0.1},
        "backward_hops": {"kind": "sin_squared", "offset": 0.1, "divisor": 3},
        "gain_loss": {"kind": "uniform", "value": 0.0, "set": {"3": 0.5}},
    }
    spec = io.lattice_from_dict(d)
    np.testing.assert_allclose(spec.backward_hops, sin_ring_spec().backward_hops, rtol=0, atol=0)
    assert spec.gain_loss[2] == 0.5 and spec.gain_loss.sum() == 0.5


@pytest.mark.parametrize(
    "mutate, key",
    [
        (lambda d: d.pop("forward_hops"), "lattice.forward_hops"),
        (lambda d: d.update(n_sites=1), "lattice.n_sites"),
        (lambda d: d.update(n_sites="4"), "lattice.n_sites"),
        (lambda d: d.update(boundary="torus"), "lattice.boundary"),
        (lambda d: d.update(gain_loss=[0, 0, 0]), "lattice.gain_loss"),
        (lambda d: d.update(backward_hops={"kind": "gaussian"}), "lattice.backward_hops.kind"),
        (lambda d: d.update(backward_hops={"kind": "uniform"}), "lattice.backward_hops.value"),
        (lambda d: d.update(forward_hops=["a", 1, 2, 3]), "lattice.forward_hops"),
        (lambda d: d.update(forward_hops=[np.nan, 1, 2, 3]), "lattice"),
    ],
)
def test_invalid_lattice_names_key(mutate, key):
    d = {"n_sites": 4, "forward_hops": [1, 1, 1, 1], "backward_hops": [1, 1, 1, 1], "gain_loss": [0, 0, 0, 0]}
    mutate(d)
    with pytest.raises(io.ConfigError) as info:
        io.lattice_from_dict(d)
    assert info.value.key == key


def test_spectrum_round_trip_within_printed_precision():
    s = eig(build_hamiltonian(chain(8, 0.1, 0.04, 0.01)))
    back = io.spectrum_from_dict(json.loads(json.dumps(io.spectrum_to_dict(s))))
    np.testing.assert_allclose(back.eigenvalues, s.eigenvalues, rtol=1e-14)
    np.testing.assert_allclose(back.eigenvectors, s.eigenvectors, rtol=1e-14, atol=1e-300)


def test_read_json_errors(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(io.ConfigError, match="malformed"):
        io.read_json(bad)
    with pytest.raises(io.ConfigError, match="not found"):
        io.read_json(tmp_path / "absent.json")


def test_number_format():
    assert io.fmt(0.1 + 0.2) == "0.3"
    assert io.fmt(3) == "3"
    assert io.fmt("x") == "x"
    assert io.fnum(1 / 3) == float("0.333333333333333")


def test_csv_round_trip(tmp_path):
    path = tmp_path / "t.csv"
    rows = np.array([[1.0, 2.5e-17], [3.0, 1 / 7]])
    io.write_csv(path, ["a", "b"], rows)
    header, data = io.read_csv(path)
    assert header == ["a", "b"]
    np.testing.assert_allclose(data, rows, rtol=1e-14)


def test_prepare_outputs_refuses_clobber(tmp_path):
    (tmp_path / "x.csv").write_text("")
    with pytest.raises(io.ConfigError) as info:
        io.prepare_outputs(tmp_path, ["x.csv", "y.csv"])
    assert info.value.key == "out" and "x.csv" in str(info.value)
    assert len(io.prepare_outputs(tmp_path, ["x.csv"], force=True)) == 1


def test_features_csv_layout(tmp_path):
    f = fidelity_matrix(eig(build_hamiltonian(chain(5, 0.1, 0.1))))
    space = feature_vectors(f, [0, 1])
    path = tmp_path / "features.csv"
    io.write_features(path, space, assignments=np.array([0, 1, 1, 0, 2]))
    header, data = io.read_csv(path)
    assert header == ["state", "ref_1", "ref_2", "cluster"]
    np.testing.assert_array_equal(data[:, 0], np.arange(1, 6))
    np.testing.assert_array_equal(data[:, -1], [0, 1, 1, 0, 2])
