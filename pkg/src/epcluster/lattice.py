"""One-dimensional lattices with site-dependent nonreciprocal hopping and gain/loss.

The Hamiltonian acts on site amplitudes as

    (H psi)_n = t_n psi_{n+1} + t'_{n-1} psi_{n-1} + i gamma_n psi_n

so ``t`` (forward hops) sits on the superdiagonal and ``t'`` (backward hops)
on the subdiagonal.  Sites are labelled 1..N in documentation and files and
stored 0-based.
"""

from dataclasses import dataclass

import numpy as np

BOUNDARIES = ("open", "ring")


class LatticeError(ValueError):
    """Invalid lattice description."""


@dataclass(frozen=True)
class LatticeSpec:
    n_sites: int
    forward_hops: np.ndarray
    backward_hops: np.ndarray
    gain_loss: np.ndarray
    boundary: str = "open"

    def __post_init__(self):
        if int(self.n_sites) != self.n_sites or self.n_sites < 2:
            raise LatticeError(f"n_sites must be an integer >= 2, got {self.n_sites!r}")
        if self.boundary not in BOUNDARIES:
            raise LatticeError(f"boundary must be one of {BOUNDARIES}, got {self.boundary!r}")
        for name in ("forward_hops", "backward_hops", "gain_loss"):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.ndim != 1 or arr.shape[0] != self.n_sites:
                raise LatticeError(
                    f"{name} has length {arr.size}, expected n_sites={self.n_sites}"
                )
            if not np.all(np.isfinite(arr)):
                raise LatticeError(f"{name} contains non-finite values")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "n_sites", int(self.n_sites))

    def replace(self, **changes):
        fields = dict(
            n_sites=self.n_sites,
            forward_hops=self.forward_hops,
            backward_hops=self.backward_hops,
            gain_loss=self.gain_loss,
            boundary=self.boundary,
        )
        fields.update(changes)
        return LatticeSpec(**fields)

    @classmethod
    def uniform(cls, n_sites, forward, backward, gamma=0.0, boundary="open"):
        return cls(
            n_sites,
            profile_uniform(n_sites, forward),
            profile_uniform(n_sites, backward),
            profile_uniform(n_sites, gamma),
            boundary,
        )


def build_hamiltonian(spec):
    """Dense complex Hamiltonian of ``spec``.

    With ``boundary="ring"`` the closing bond uses the N-th entries of both
    profiles: ``H[N, 1] = t_N`` and ``H[1, N] = t'_N``.  On an open chain
    those entries are ignored.
    """
    n = spec.n_sites
    h = np.zeros((n, n), dtype=np.complex128)
    idx = np.arange(n - 1)
    h[idx, idx + 1] = spec.forward_hops[:-1]
    h[idx + 1, idx] = spec.backward_hops[:-1]
    h[np.arange(n), np.arange(n)] = 1j * spec.gain_loss
    if spec.boundary == "ring":
        # n == 2 folds the closing bond onto the existing one
        h[n - 1, 0] += spec.forward_hops[-1]
        h[0, n - 1] += spec.backward_hops[-1]
    return h


def _check_length(n):
    if int(n) != n or n < 2:
        raise LatticeError(f"profile length must be an integer >= 2, got {n!r}")
    return int(n)


def profile_uniform(n, value):
    return np.full(_check_length(n), float(value))


def profile_sin_squared(n, offset, divisor):
    """``offset + sin^2(m / divisor)`` for sites m = 1..n (radians)."""
    n = _check_length(n)
    if divisor == 0:
        raise LatticeError("sin_squared profile divisor must be nonzero")
    m = np.arange(1, n + 1, dtype=float)
    return offset + np.sin(m / divisor) ** 2


def profile_staggered(n, gamma):
    """Balanced gain/loss ``(-1)^m * gamma`` for sites m = 1..n."""
    n = _check_length(n)
    sign = np.where(np.arange(1, n + 1) % 2 == 0, 1.0, -1.0)
    return sign * float(gamma)


PROFILES = {
    "uniform": (profile_uniform, ("value",)),
    "sin_squared": (profile_sin_squared, ("offset", "divisor")),
    "staggered": (profile_staggered, ("gamma",)),
}
