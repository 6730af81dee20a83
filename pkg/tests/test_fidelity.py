import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from epcluster.eigensolver import eig
from epcluster.fidelity import (
    feature_vectors,
    fidelity,
    fidelity_matrix,
    offdiagonal_set,
    packet_features,
    select_references,
)
from epcluster.lattice import LatticeSpec, build_hamiltonian

from conftest import chain, staggered_spec, random_spec

# minimum off-diagonal fidelity of the gamma = 0 lattice (N=20, t=0.1, t'=0.01),
# from a 50-digit mpmath eigendecomposition
STAGGERED_MIN_AT_ZERO = 0.208293985848324


def test_fidelity_examples():
    assert fidelity([1, 0], [0, 1]) == 0
    assert fidelity([1, 0], np.array([1, 1]) / np.sqrt(2)) == pytest.approx(0.5, abs=1e-15)
    v = np.array([0.3 - 1j, 2.0, 0.1j])
    for theta in np.linspace(0, 2 * np.pi, 7):
        assert fidelity(v, 3 * np.exp(1j * theta) * v) == pytest.approx(1.0, abs=1e-14)


def test_fidelity_errors():
    with pytest.raises(ValueError):
        fidelity([0, 0], [1, 0])
    with pytest.raises(ValueError):
        fidelity([1, 0], [1, 0, 0])


cplx = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@settings(max_examples=100, deadline=None)
@given(st.lists(cplx, min_size=3, max_size=3), st.lists(cplx, min_size=3, max_size=3),
       st.complex_numbers(min_magnitude=0.1, max_magnitude=10), st.complex_numbers(min_magnitude=0.1, max_magnitude=10))
def test_fidelity_symmetry_and_scale_invariance(v, w, alpha, beta):
    v, w = np.array(v), np.array(w)
    if np.linalg.norm(v) < 1e-3 or np.linalg.norm(w) < 1e-3:
        return
    f = fidelity(v, w)
    assert f == fidelity(w, v)
    assert fidelity(alpha * v, beta * w) == pytest.approx(f, abs=1e-12)
    assert 0 <= f <= 1 + 1e-12


def test_hermitian_chain_orthogonal():
    f = fidelity_matrix(eig(build_hamiltonian(chain(12, 0.1, 0.1))))
    assert np.all(offdiagonal_set(f) <= 1e-10)


def test_matrix_invariants(rng):
    f = fidelity_matrix(eig(build_hamiltonian(random_spec(rng, 30))))
    np.testing.assert_array_equal(f, f.T)
    np.testing.assert_array_equal(np.diagonal(f), 1.0)
    assert np.all(f >= 0) and np.all(f <= 1 + 1e-12)


def test_matrix_matches_pairwise_definition(rng):
    s = eig(build_hamiltonian(random_spec(rng, 15)))
    f = fidelity_matrix(s)
    for a in range(s.dim):
        for b in range(a + 1, s.dim):
            assert f[a, b] == pytest.approx(fidelity(s.state(a), s.state(b)), abs=1e-14)


def test_staggered_gamma_zero_minimum_matches_high_precision():
    off = offdiagonal_set(fidelity_matrix(eig(build_hamiltonian(staggered_spec(0.0)))))
    assert off.size == 190
    assert off.min() == pytest.approx(STAGGERED_MIN_AT_ZERO, abs=1e-8)


def test_near_ep_dimer():
    t, g = 1.0, 0.999
    h = build_hamiltonian(LatticeSpec(2, [t, 0], [t, 0], [g, -g]))
    root = np.sqrt(t * t - g * g)
    v1 = np.array([1, (-1j * g + root) / t])
    v2 = np.array([1, (-1j * g - root) / t])
    closed = abs(np.vdot(v1, v2)) ** 2 / (np.vdot(v1, v1).real * np.vdot(v2, v2).real)
    f = fidelity_matrix(eig(h))
    assert closed > 0.99
    assert f[0, 1] == pytest.approx(closed, abs=1e-9)


def test_offdiagonal_order():
    f = np.array([[1, 0.1, 0.2], [0.1, 1, 0.3], [0.2, 0.3, 1]])
    np.testing.assert_array_equal(offdiagonal_set(f), [0.1, 0.2, 0.3])
    assert offdiagonal_set(np.eye(20)).shape == (190,)
    assert not np.any(offdiagonal_set(np.eye(5)))


def test_references_hermitian_all_states():
    f = fidelity_matrix(eig(build_hamiltonian(chain(12, 0.1, 0.1))))
    assert select_references(f, 1e-10) == list(range(12))


def test_references_staggered_one_dimensional():
    f = fidelity_matrix(eig(build_hamiltonian(staggered_spec(0.0))))
    assert select_references(f, 0.2) == [0]


def test_references_greedy_rule():
    f = np.array([
        [1.0, 0.01, 0.5, 0.02],
        [0.01, 1.0, 0.03, 0.9],
        [0.5, 0.03, 1.0, 0.04],
        [0.02, 0.9, 0.04, 1.0],
    ])
    assert select_references(f, 0.05) == [0, 1]
    assert select_references(f, 0.6) == [0, 1, 2]
    with pytest.raises(ValueError):
        select_references(f, 1.0)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(0.01, 0.9))
def test_references_stable_under_epsilon_jitter(seed, eps):
    rng = np.random.default_rng(seed)
    f = fidelity_matrix(eig(build_hamiltonian(random_spec(rng, 12))))
    off = offdiagonal_set(f)
    margin = min(np.min(np.abs(off - eps)), 1.0 - eps)
    if margin < 1e-9:
        return
    base = select_references(f, eps)
    assert select_references(f, eps + 0.5 * margin) == base
    assert select_references(f, max(0.0, eps - 0.5 * margin)) == base


def test_feature_vectors():
    f = fidelity_matrix(eig(build_hamiltonian(chain(6, 0.1, 0.05))))
    space = feature_vectors(f, [0, 1])
    np.testing.assert_array_equal(space.features[0], [1.0, f[0, 1]])
    np.testing.assert_array_equal(space.features[:, 1], f[:, 1])
    eye = feature_vectors(np.eye(4), [0, 1, 2, 3])
    np.testing.assert_array_equal(eye.features, np.eye(4))
    with pytest.raises(IndexError):
        feature_vectors(f, [0, 6])
    with pytest.raises(ValueError):
        feature_vectors(f, [])


def test_long_skin_chain_feature_plane():
    s = eig(build_hamiltonian(chain(80, 0.1, 0.05)))
    space = feature_vectors(fidelity_matrix(s), [0, 1])
    assert space.features.shape == (80, 2)


def test_packet_features_of_eigenstate_match_row():
    s = eig(build_hamiltonian(chain(8, 0.1, 0.05, 0.01)))
    f = fidelity_matrix(s)
    np.testing.assert_allclose(packet_features(s.state(3), s, [0, 2]), f[3, [0, 2]], atol=1e-14)
