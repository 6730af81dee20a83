"""Wave-packet evolution in the (non-orthogonal) eigenbasis."""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .clustering import classify
from .fidelity import fidelity, packet_features

CONDITION_LIMIT = 1e12
EXPONENT_LIMIT = 700.0


class SingularBasisError(np.linalg.LinAlgError):
    """Eigenvector matrix too ill-conditioned to expand in."""


class EvolutionOverflowError(OverflowError):
    pass


@dataclass(frozen=True)
class WavePacket:
    amplitudes: np.ndarray
    time: float = 0.0

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=np.complex128).ravel()
        if not np.any(amps):
            raise ValueError("wave packet amplitudes must be nonzero")
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self):
        return float(np.linalg.norm(self.amplitudes))

    def densities(self):
        return np.abs(self.amplitudes) ** 2


def site_packet(n_sites, site):
    """Packet localized on ``site`` (1-based)."""
    amps = np.zeros(n_sites, dtype=np.complex128)
    amps[site - 1] = 1.0
    return WavePacket(amps)


def expand(psi0, spectrum):
    """Coefficients ``c`` with ``V c = psi0`` (LU with partial pivoting)."""
    psi = psi0.amplitudes if isinstance(psi0, WavePacket) else np.asarray(psi0, dtype=np.complex128)
    v = spectrum.eigenvectors
    if psi.shape[0] != v.shape[0]:
        raise ValueError(f"packet has {psi.shape[0]} sites, spectrum has {v.shape[0]}")
    cond = np.linalg.cond(v)
    if not np.isfinite(cond) or cond > CONDITION_LIMIT:
        raise SingularBasisError(f"eigenbasis condition number {cond:.3e} exceeds {CONDITION_LIMIT:.0e}")
    lu = scipy.linalg.lu_factor(v)
    c = scipy.linalg.lu_solve(lu, psi)
    if np.linalg.norm(v @ c - psi) > 1e-8 * np.linalg.norm(psi):
        raise SingularBasisError("expansion does not reproduce the packet to 1e-8")
    return c


def evolve_coefficients(spectrum, c, t):
    """``c_n exp(-i E_n t)``; raises if any growth exponent passes 700."""
    w = spectrum.eigenvalues
    if np.any(np.abs(w.imag) * abs(t) > EXPONENT_LIMIT):
        raise EvolutionOverflowError(f"|Im E| * t exceeds {EXPONENT_LIMIT} at t={t}")
    return np.asarray(c) * np.exp(-1j * w * t)


def evolve(spectrum, c, t):
    """``Psi(t) = sum_n c_n exp(-i E_n t) psi_n``."""
    return WavePacket(spectrum.eigenvectors @ evolve_coefficients(spectrum, c, t), float(t))


def time_trace(spectrum, psi0, times, fidelities=False):
    """Rows of ``(t, |Psi_1|^2..|Psi_N|^2, norm[, F(Psi, psi_n)...])``."""
    c = expand(psi0, spectrum)
    rows = []
    for t in times:
        packet = evolve(spectrum, c, t)
        row = [float(t), *packet.densities(), packet.norm]
        if fidelities:
            row.extend(fidelity(packet.amplitudes, spectrum.eigenvectors[:, j]) for j in range(spectrum.dim))
        rows.append(row)
    return np.array(rows)


def classify_packet(psi0, spectrum, space, model):
    """Cluster of a packet from its fidelities with the reference states."""
    psi = psi0.amplitudes if isinstance(psi0, WavePacket) else np.asarray(psi0)
    feats = packet_features(psi, spectrum, space.reference_indices)
    return classify(model, feats), feats
