"""Dense non-Hermitian eigendecomposition.

Pipeline: Householder reduction to Hessenberg form, implicitly shifted
complex QR to Schur form ``H = Z T Z^H``, back-substitution for the
eigenvectors of ``T``, then ``V = Z X``.  Any eigenvector whose residual
misses the acceptance bound is recomputed by shifted inverse iteration.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels

DEFAULT_TOL = 1e-10
RESIDUAL_FACTOR = 1e-8


class ConvergenceError(RuntimeError):
    """QR iteration exhausted its sweep budget."""


@dataclass(frozen=True)
class Spectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns, paired with eigenvalues
    residuals: np.ndarray

    @property
    def dim(self):
        return self.eigenvalues.shape[0]

    def state(self, j):
        """Eigenvector ``j`` (0-based position in sorted order)."""
        return self.eigenvectors[:, j]


def residual_bound(h):
    return RESIDUAL_FACTOR * max(1.0, float(np.linalg.norm(h)))


def residual_check(h, s):
    """``||H v_j - lambda_j v_j||_2`` recomputed for every pair of ``s``."""
    h = np.asarray(h, dtype=np.complex128)
    if h.shape[0] != s.dim:
        raise ValueError(f"dimension mismatch: matrix {h.shape[0]} vs spectrum {s.dim}")
    r = h @ s.eigenvectors - s.eigenvectors * s.eigenvalues[None, :]
    return np.linalg.norm(r, axis=0)


def _phase_fix(v):
    """Rotate each column so its largest-magnitude entry is real positive."""
    out = v.copy()
    mags = np.abs(out)
    for j in range(out.shape[1]):
        i = int(np.argmax(mags[:, j]))
        z = out[i, j]
        if z != 0:
            out[:, j] *= np.conj(z) / abs(z)
            out[i, j] = abs(z)
    return out


def sort_states(eigenvalues, eigenvectors, residuals=None):
    """Order eigenpairs by real part, ties by imaginary part, and normalize."""
    w = np.asarray(eigenvalues, dtype=np.complex128)
    v = np.asarray(eigenvectors, dtype=np.complex128)
    order = np.lexsort((w.imag, w.real))
    v = v[:, order]
    v = v / np.linalg.norm(v, axis=0)[None, :]
    res = np.zeros(w.shape[0]) if residuals is None else np.asarray(residuals)[order]
    return Spectrum(w[order], _phase_fix(v), res)


def schur(h, tol=DEFAULT_TOL, max_sweeps=None):
    """Complex Schur decomposition ``h = z @ t @ z^H``."""
    h = np.ascontiguousarray(h, dtype=np.complex128)
    n = h.shape[0]
    if max_sweeps is None:
        max_sweeps = 30 * n
    t, z = _kernels.hessenberg(h)
    sweeps = _kernels.schur_hessenberg(t, z, float(tol), int(max_sweeps))
    if sweeps < 0:
        raise ConvergenceError(f"QR iteration did not converge within {max_sweeps} sweeps (N={n})")
    return np.triu(t), z


def _inverse_iteration(h, lam, seed, steps=3):
    n = h.shape[0]
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    shift = lam + 1e3 * _kernels.ULP * max(1.0, np.linalg.norm(h)) * (1 + 1j)
    a = h - shift * np.eye(n)
    for _ in range(steps):
        x = np.linalg.solve(a, x)
        x /= np.linalg.norm(x)
    return x


def eig(h, tol=DEFAULT_TOL, max_sweeps=None):
    """All eigenpairs of a dense complex matrix, sorted and residual-certified.

    Raises :class:`ConvergenceError` if the QR sweeps exceed ``30 * N``.
    """
    h = np.ascontiguousarray(h, dtype=np.complex128)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {h.shape}")
    if not np.all(np.isfinite(h)):
        raise ValueError("matrix has non-finite entries")
    if tol <= 0:
        raise ValueError("tol must be positive")
    t, z = schur(h, tol, max_sweeps)
    w = np.diagonal(t).copy()
    v = z @ _kernels.triangular_eigvecs(t)
    v /= np.linalg.norm(v, axis=0)[None, :]
    res = np.linalg.norm(h @ v - v * w[None, :], axis=0)
    bound = residual_bound(h)
    for j in np.flatnonzero(res > bound):
        x = _inverse_iteration(h, w[j], seed=int(j))
        r = np.linalg.norm(h @ x - w[j] * x)
        if r < res[j]:
            v[:, j] = x
            res[j] = r
    return sort_states(w, v, res)
