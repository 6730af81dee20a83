"""One-parameter sweeps over lattice families.

Each grid point runs build -> eig -> fidelity plus whichever optional
stages are enabled.  Grid points are independent and may run on a thread
pool (the numba kernels release the GIL); records always come back in grid
order, so serial and parallel runs write identical files.
"""

import datetime as _dt
import os
import platform
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import __version__, _accel
from .clustering import kmeans
from .eigensolver import ConvergenceError, eig
from .ep_analysis import ep_report
from .fidelity import DEFAULT_EPSILON, feature_vectors, fidelity_matrix, offdiagonal_set, select_references
from .io import lattice_to_dict, prepare_outputs, write_csv, write_json
from .lattice import build_hamiltonian, profile_staggered

PARAMETERS = ("gamma_staggered", "backward_scale")


class SweepError(RuntimeError):
    def __init__(self, value, cause):
        super().__init__(f"grid value {value!r}: {cause}")
        self.value = value
        self.cause = cause


@dataclass(frozen=True)
class KMeansStage:
    k: int
    seed: int = 0
    references: Optional[tuple] = None  # 0-based; None selects greedily


@dataclass(frozen=True)
class SweepSpec:
    base: object
    parameter: str
    grid: np.ndarray
    densities: bool = False
    fidelity_set: bool = True
    references: bool = False
    epsilon: float = DEFAULT_EPSILON
    kmeans: Optional[KMeansStage] = None
    ep_report: bool = False

    def __post_init__(self):
        if self.parameter not in PARAMETERS:
            raise ValueError(f"parameter must be one of {PARAMETERS}, got {self.parameter!r}")
        grid = np.asarray(self.grid, dtype=float).ravel()
        if grid.size == 0:
            raise ValueError("sweep grid is empty")
        if np.any(np.diff(grid) <= 0):
            raise ValueError("sweep grid must be strictly ascending")
        object.__setattr__(self, "grid", grid)


@dataclass
class SweepRecord:
    value: float
    fidelities: np.ndarray
    eigenvalues: np.ndarray
    densities: Optional[np.ndarray] = None
    references: Optional[list] = None
    cluster: Optional[dict] = None
    ep: Optional[object] = None


@dataclass
class SweepResult:
    spec: SweepSpec
    records: list = field(default_factory=list)


def parse_grid(text):
    """``START:STOP:STEP`` with STOP included (to within a tenth of a step)."""
    try:
        start, stop, step = (float(p) for p in text.split(":"))
    except ValueError:
        raise ValueError(f"grid must look like START:STOP:STEP, got {text!r}") from None
    if step <= 0 or stop < start:
        raise ValueError(f"grid needs STEP > 0 and STOP >= START, got {text!r}")
    count = int(np.floor((stop - start) / step + 0.1)) + 1
    return start + step * np.arange(count)


def density_table(spectrum):
    """Row ``j`` is the site density of eigenstate ``j``, normalized to sum 1."""
    d = np.abs(spectrum.eigenvectors.T) ** 2
    return d / d.sum(axis=1, keepdims=True)


def materialize(spec, value):
    base = spec.base
    if spec.parameter == "gamma_staggered":
        return base.replace(gain_loss=profile_staggered(base.n_sites, value))
    return base.replace(backward_hops=value * base.forward_hops)


def run_point(spec, value):
    lattice = materialize(spec, value)
    h = build_hamiltonian(lattice)
    try:
        s = eig(h)
    except ConvergenceError as exc:
        raise SweepError(value, exc) from exc
    f = fidelity_matrix(s)
    rec = SweepRecord(float(value), offdiagonal_set(f).copy(), s.eigenvalues)
    if spec.densities:
        rec.densities = density_table(s)
    if spec.references or spec.kmeans is not None:
        rec.references = select_references(f, spec.epsilon)
    if spec.kmeans is not None:
        refs = spec.kmeans.references if spec.kmeans.references is not None else rec.references
        model = kmeans(feature_vectors(f, refs), spec.kmeans.k, seed=spec.kmeans.seed)
        rec.cluster = {
            "k": model.k,
            "inertia": model.inertia,
            "iterations_run": model.iterations_run,
            "assignments": model.assignments.tolist(),
        }
    if spec.ep_report:
        rec.ep = ep_report(h, s, f)
    return rec


def default_workers():
    env = os.environ.get("EPCLUSTER_WORKERS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def run_sweep(spec, workers=1):
    """Evaluate every grid point; records are returned in grid order."""
    if workers is None:
        workers = default_workers()
    if workers <= 1 or spec.grid.size == 1:
        records = [run_point(spec, v) for v in spec.grid]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            records = list(pool.map(lambda v: run_point(spec, v), spec.grid))
    return SweepResult(spec, records)


def min_fidelity_curve(result):
    return [(r.value, float(r.fidelities.min())) for r in result.records]


def output_names(spec):
    names = ["manifest.json"]
    if spec.fidelity_set:
        names += ["fidelity_set.csv", "min_fidelity.csv"]
    if spec.densities:
        names.append("densities.csv")
    if spec.references or spec.kmeans is not None:
        names.append("references.csv")
    if spec.kmeans is not None:
        names.append("kmeans.csv")
    if spec.ep_report:
        names.append("ep_report.csv")
    return names


def write_sweep(result, outdir, force=False):
    spec = result.spec
    names = output_names(spec)
    paths = dict(zip(names, prepare_outputs(outdir, names, force)))
    n = spec.base.n_sites
    pairs = [(a, b) for a in range(1, n + 1) for b in range(a + 1, n + 1)]
    if spec.fidelity_set:
        write_csv(
            paths["fidelity_set.csv"],
            ["parameter"] + [f"F_{a}_{b}" for a, b in pairs],
            [[r.value, *r.fidelities] for r in result.records],
        )
        write_csv(
            paths["min_fidelity.csv"],
            ["parameter", "min_fidelity", "max_fidelity"],
            [[r.value, r.fidelities.min(), r.fidelities.max()] for r in result.records],
        )
    if spec.densities:
        rows = [[r.value, j + 1, *row] for r in result.records for j, row in enumerate(r.densities)]
        write_csv(paths["densities.csv"], ["parameter", "state"] + [f"site_{m}" for m in range(1, n + 1)], rows)
    if "references.csv" in paths:
        write_csv(
            paths["references.csv"],
            ["parameter", "n_references", "references"],
            [[r.value, len(r.references), " ".join(str(i + 1) for i in r.references)] for r in result.records],
        )
    if spec.kmeans is not None:
        write_csv(
            paths["kmeans.csv"],
            ["parameter", "k", "inertia", "iterations_run"] + [f"state_{m}" for m in range(1, n + 1)],
            [[r.value, r.cluster["k"], r.cluster["inertia"], r.cluster["iterations_run"], *r.cluster["assignments"]]
             for r in result.records],
        )
    if spec.ep_report:
        write_csv(
            paths["ep_report.csv"],
            ["parameter", "nilpotency_index", "min_eigenvalue_gap", "max_pair_fidelity"],
            [[r.value, -1 if r.ep.nilpotency_index is None else r.ep.nilpotency_index,
              r.ep.min_eigenvalue_gap, r.ep.max_pair_fidelity] for r in result.records],
        )
    manifest = {
        "parameter": spec.parameter,
        "grid": [float(g) for g in spec.grid],
        "base": lattice_to_dict(spec.base),
        "stages": {
            "densities": spec.densities,
            "fidelity_set": spec.fidelity_set,
            "references": spec.references,
            "epsilon": spec.epsilon,
            "kmeans": None if spec.kmeans is None else {
                "k": spec.kmeans.k,
                "seed": spec.kmeans.seed,
                "references": None if spec.kmeans.references is None else [i + 1 for i in spec.kmeans.references],
            },
            "ep_report": spec.ep_report,
        },
        "outputs": names[1:],
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(),
        "versions": {
            "epcluster": __version__,
            "numpy": np.__version__,
            "python": platform.python_version(),
            "backend": _accel.backend_name(),
        },
    }
    write_json(paths["manifest.json"], manifest)
    return paths
