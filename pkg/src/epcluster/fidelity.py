"""Eigenstate fidelities and the reference-state feature space."""

from dataclasses import dataclass

import numpy as np

from . import _kernels

DEFAULT_EPSILON = 0.05


@dataclass(frozen=True)
class FeatureSpace:
    """Per-state fidelities against a set of (nearly) orthogonal references.

    ``reference_indices`` are 0-based positions in the sorted spectrum;
    ``features[n, a]`` is the fidelity of state ``n`` with reference ``a``.
    """

    reference_indices: np.ndarray
    features: np.ndarray
    orthogonality_threshold: float = DEFAULT_EPSILON

    @property
    def dim(self):
        return self.features.shape[1]


def fidelity(v, w):
    """``|<v|w>|^2 / (<v|v><w|w>)``; invariant under rescaling either argument."""
    v = np.asarray(v, dtype=np.complex128).ravel()
    w = np.asarray(w, dtype=np.complex128).ravel()
    if v.shape != w.shape:
        raise ValueError(f"length mismatch: {v.size} vs {w.size}")
    nv = np.vdot(v, v).real
    nw = np.vdot(w, w).real
    if nv == 0.0 or nw == 0.0:
        raise ValueError("fidelity is undefined for a zero vector")
    ip = np.vdot(v, w)
    return float((ip.real * ip.real + ip.imag * ip.imag) / (nv * nw))


def fidelity_matrix(spectrum):
    """Symmetric matrix of pairwise eigenstate fidelities with unit diagonal."""
    vectors = spectrum.eigenvectors if hasattr(spectrum, "eigenvectors") else spectrum
    states = np.ascontiguousarray(np.asarray(vectors, dtype=np.complex128).T)
    return _kernels.fidelity_matrix_kernel(states)


def offdiagonal_set(f):
    """Upper-triangle values ``F[n, m]``, ``n < m``, in lexicographic order."""
    f = np.asarray(f)
    return f[np.triu_indices(f.shape[0], 1)]


def select_references(f, epsilon=DEFAULT_EPSILON):
    """Greedy reference set in spectrum order.

    State 0 is always admitted; state ``n`` joins if its fidelity with every
    admitted state is at most ``epsilon``.
    """
    if not 0.0 <= epsilon < 1.0:
        raise ValueError(f"epsilon must lie in [0, 1), got {epsilon}")
    f = np.asarray(f)
    refs = [0]
    for n in range(1, f.shape[0]):
        if np.all(f[n, refs] <= epsilon):
            refs.append(n)
    return refs


def feature_vectors(f, refs, epsilon=DEFAULT_EPSILON):
    f = np.asarray(f)
    refs = np.asarray(refs, dtype=np.int64).ravel()
    if refs.size == 0:
        raise ValueError("reference set is empty")
    if refs.min() < 0 or refs.max() >= f.shape[0]:
        raise IndexError(f"reference index out of range for {f.shape[0]} states")
    return FeatureSpace(refs, np.ascontiguousarray(f[:, refs]), float(epsilon))


def packet_features(psi, spectrum, refs):
    """Fidelities of an arbitrary state against the reference eigenstates."""
    return np.array([fidelity(spectrum.eigenvectors[:, r], psi) for r in refs])
