"""Eigenstate clustering around exceptional points in 1D non-Hermitian lattices."""

__version__ = "0.1.0"

from .lattice import LatticeSpec, build_hamiltonian, profile_sin_squared, profile_staggered, profile_uniform
from .eigensolver import ConvergenceError, Spectrum, eig, residual_check, sort_states
from .fidelity import FeatureSpace, feature_vectors, fidelity, fidelity_matrix, offdiagonal_set, select_references
from .clustering import ClusterModel, classify, kmeans, silhouette_score
from .ep_analysis import EpReport, base_state_estimate, coalescence_metrics, ep_report, nilpotency_index
from .dynamics import WavePacket, classify_packet, evolve, expand
from .sweep import SweepSpec, density_table, min_fidelity_curve, run_sweep

__all__ = [
    "LatticeSpec", "build_hamiltonian", "profile_uniform", "profile_sin_squared", "profile_staggered",
    "Spectrum", "ConvergenceError", "eig", "sort_states", "residual_check",
    "FeatureSpace", "fidelity", "fidelity_matrix", "offdiagonal_set", "select_references", "feature_vectors",
    "ClusterModel", "kmeans", "classify", "silhouette_score",
    "EpReport", "nilpotency_index", "coalescence_metrics", "base_state_estimate", "ep_report",
    "WavePacket", "expand", "evolve", "classify_packet",
    "SweepSpec", "run_sweep", "density_table", "min_fidelity_curve",
]
