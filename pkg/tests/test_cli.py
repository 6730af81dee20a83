import json

import numpy as np
import pytest

from epcluster import io
from epcluster.cli import main


def run(tmp_path, *args, out="out"):
    return main([*args, "--out", str(tmp_path / out)])


def write_config(tmp_path, obj, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(obj) if not isinstance(obj, str) else obj)
    return str(path)


def forward_only(n):
    return {"lattice": {"n_sites": n, "forward_hops": [1.0] * n, "backward_hops": [0.0] * n,
                        "gain_loss": [0.0] * n}}


def test_spectrum_writes_outputs(tmp_path):
    assert run(tmp_path, "spectrum", "--config", "fig1a") == 0
    doc = json.loads((tmp_path / "out" / "spectrum.json").read_text())
    assert doc["dim"] == 12 and len(doc["eigenvalues"]) == 12
    header, table = io.read_csv(tmp_path / "out" / "densities.csv")
    np.testing.assert_allclose(table[:, 1:].sum(axis=1), 1.0, atol=1e-12)


def test_malformed_config_exits_2(tmp_path, caplog):
    path = write_config(tmp_path, '{"lattice": ')
    assert run(tmp_path, "spectrum", "--config", path) == 2
    assert "config" in caplog.text


def test_missing_key_named(tmp_path, caplog):
    cfg = forward_only(4)
    del cfg["lattice"]["gain_loss"]
    assert run(tmp_path, "spectrum", "--config", write_config(tmp_path, cfg)) == 2
    assert "lattice.gain_loss" in caplog.text


def test_hermitian_fidelities_vanish(tmp_path):
    assert run(tmp_path, "fidelity", "--config", "fig1d") == 0
    _, off = io.read_csv(tmp_path / "out" / "offdiagonal.csv")
    assert off.shape == (66, 3)
    assert np.all(off[:, 2] <= 1e-10)
    _, feats = io.read_csv(tmp_path / "out" / "features.csv")
    np.testing.assert_allclose(feats[:, 1:], np.eye(12), atol=1e-10)


def test_staggered_fidelity_and_epsilon(tmp_path):
    assert run(tmp_path, "fidelity", "--config", "fig3") == 0
    _, off = io.read_csv(tmp_path / "out" / "offdiagonal.csv")
    assert off.shape[0] == 190
    assert run(tmp_path, "fidelity", "--config", "fig3", "--epsilon", "0.2", out="eps") == 0
    _, refs = io.read_csv(tmp_path / "eps" / "references.csv")
    assert refs.size == 1


def test_cluster_reproducible(tmp_path):
    args = ("cluster", "--config", "fig2a", "--k", "6", "--seed", "7")
    assert run(tmp_path, *args, out="a") == 0
    assert run(tmp_path, *args, out="b") == 0
    a = (tmp_path / "a" / "cluster_model.json").read_bytes()
    assert a == (tmp_path / "b" / "cluster_model.json").read_bytes()
    doc = json.loads(a)
    assert doc["k"] == 6 and doc["references"] == [1, 2]
    assert len(set(doc["assignments"])) == 6


def test_k_exceeding_states_exits_2(tmp_path, caplog):
    assert run(tmp_path, "cluster", "--config", "fig2a", "--k", "81") == 2
    assert "exceeds state count" in caplog.text


def test_refuses_overwrite(tmp_path):
    assert run(tmp_path, "spectrum", "--config", "fig1a") == 0
    assert run(tmp_path, "spectrum", "--config", "fig1a") == 2
    assert main(["spectrum", "--config", "fig1a", "--out", str(tmp_path / "out"), "--force"]) == 0


def test_sweep_staggered_grid(tmp_path):
    assert run(tmp_path, "sweep", "--config", "fig3", "--workers", "2") == 0
    header, data = io.read_csv(tmp_path / "out" / "fidelity_set.csv")
    assert data.shape == (51, 191)
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["outputs"] == ["fidelity_set.csv", "min_fidelity.csv", "references.csv"]


def test_sweep_bad_grid_exits_2(tmp_path):
    assert run(tmp_path, "sweep", "--config", "fig3", "--grid", "1:0:0.1") == 2


def test_ep_on_nilpotent_chain(tmp_path):
    path = write_config(tmp_path, forward_only(7))
    assert run(tmp_path, "ep", "--config", path) == 0
    doc = json.loads((tmp_path / "out" / "ep_report.json").read_text())
    assert doc["nilpotency_index"] == 7


def test_evolve_hermitian_conserves_norm(tmp_path):
    assert run(tmp_path, "evolve", "--config", "fig1d", "--times", "0:50:0.5", "--fidelities") == 0
    header, trace = io.read_csv(tmp_path / "out" / "time_trace.csv")
    norms = trace[:, header.index("norm")]
    np.testing.assert_allclose(norms, 1.0, atol=1e-8)


def test_evolve_on_defective_basis_exits_3(tmp_path, caplog):
    path = write_config(tmp_path, forward_only(6))
    assert run(tmp_path, "evolve", "--config", path) == 3
    assert "numerical failure" in caplog.text


def test_evolve_with_classification(tmp_path):
    assert run(tmp_path, "evolve", "--config", "fig2a", "--times", "0:1:1") == 0
    doc = json.loads((tmp_path / "out" / "packet.json").read_text())
    assert 0 <= doc["cluster"] < 6 and len(doc["features"]) == 2
