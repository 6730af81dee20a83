"""Diagnostics for proximity to an exceptional point."""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .fidelity import fidelity_matrix, offdiagonal_set


@dataclass(frozen=True)
class EpReport:
    nilpotency_index: Optional[int]
    min_eigenvalue_gap: float
    max_pair_fidelity: float
    base_state: np.ndarray

    def to_dict(self):
        return {
            "nilpotency_index": self.nilpotency_index,
            "min_eigenvalue_gap": float(self.min_eigenvalue_gap),
            "max_pair_fidelity": float(self.max_pair_fidelity),
            "base_state": [[float(z.real), float(z.imag)] for z in self.base_state],
        }


def nilpotency_index(h, tol=1e-12):
    """Smallest ``m <= N`` with ``||H^m||_F <= tol * ||H||_2^m``, else None.

    The spectral-norm scaling keeps the result invariant under ``H -> alpha H``.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    h = np.asarray(h, dtype=np.complex128)
    norm = np.linalg.norm(h, 2)
    if norm == 0.0:
        return 1
    scaled = h / norm
    power = np.eye(h.shape[0], dtype=np.complex128)
    for m in range(1, h.shape[0] + 1):
        power = power @ scaled
        if np.linalg.norm(power) <= tol:
            return m
    return None


def min_eigenvalue_gap(eigenvalues):
    w = np.asarray(eigenvalues)
    if w.size < 2:
        return 0.0
    d = np.abs(w[:, None] - w[None, :])
    return float(d[np.triu_indices(w.size, 1)].min())


def coalescence_metrics(spectrum, f=None):
    """``(min_eigenvalue_gap, max_pair_fidelity)`` of a spectrum."""
    if f is None:
        f = fidelity_matrix(spectrum)
    off = offdiagonal_set(f)
    return min_eigenvalue_gap(spectrum.eigenvalues), float(off.max()) if off.size else 0.0


def _unit_phase(v):
    i = int(np.argmax(np.abs(v)))
    v = v / np.linalg.norm(v)
    return v * (np.conj(v[i]) / abs(v[i]))


def base_state_estimate(h, spectrum, nil_index=None, tol=1e-12):
    """Common state the eigenvectors cluster around.

    For a nilpotent ``h`` this is its kernel vector (the exceptional state).
    Otherwise it is the normalized mean of the eigenvectors after rotating
    each one so its overlap with the first eigenvector is real and
    non-negative.
    """
    h = np.asarray(h, dtype=np.complex128)
    if nil_index is None:
        nil_index = nilpotency_index(h, tol)
    if nil_index is not None:
        _, _, vh = np.linalg.svd(h)
        return _unit_phase(vh[-1].conj())
    v = spectrum.eigenvectors
    anchor = v[:, 0]
    overlaps = anchor.conj() @ v
    mags = np.abs(overlaps)
    phases = np.ones_like(overlaps)
    nz = mags > 0
    phases[nz] = np.conj(overlaps[nz]) / mags[nz]
    mean = (v * phases[None, :]).mean(axis=1)
    if np.linalg.norm(mean) == 0:
        return _unit_phase(anchor)
    return _unit_phase(mean)


def ep_report(h, spectrum, f=None, tol=1e-12):
    if f is None:
        f = fidelity_matrix(spectrum)
    m = nilpotency_index(h, tol)
    gap, fmax = coalescence_metrics(spectrum, f)
    return EpReport(m, gap, fmax, base_state_estimate(h, spectrum, m, tol))
