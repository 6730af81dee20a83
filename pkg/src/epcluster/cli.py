"""Command-line front end.

Exit codes: 0 success, 2 configuration/validation error, 3 numerical failure.
"""

import argparse
import logging
import sys
from importlib import resources
from pathlib import Path

import numpy as np

from . import io
from .clustering import kmeans, silhouette_score
from .dynamics import EvolutionOverflowError, SingularBasisError, WavePacket, classify_packet, time_trace
from .eigensolver import DEFAULT_TOL, ConvergenceError, eig
from .ep_analysis import ep_report
from .fidelity import DEFAULT_EPSILON, feature_vectors, fidelity_matrix, select_references
from .io import ConfigError
from .lattice import LatticeError, build_hamiltonian
from .sweep import (
    KMeansStage,
    SweepError,
    SweepSpec,
    default_workers,
    density_table,
    output_names,
    parse_grid,
    run_sweep,
    write_sweep,
)

log = logging.getLogger("epcluster")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3


def resolve_config_path(name):
    p = Path(name)
    if p.exists():
        return p
    bundled = resources.files("epcluster") / "configs" / (p.name if p.suffix else p.name + ".json")
    if bundled.is_file():
        return Path(str(bundled))
    raise ConfigError("config", f"file not found: {name}")


def load_config(args):
    raw = io.read_json(resolve_config_path(args.config))
    if not isinstance(raw, dict):
        raise ConfigError("config", "top level must be a JSON object")
    if "n_sites" in raw:
        raw = {"lattice": raw}
    if "lattice" not in raw:
        raise ConfigError("lattice", "missing required key")
    lat = raw["lattice"]
    if isinstance(lat, str):
        lat = io.read_json(resolve_config_path(lat), key="lattice")
        if "lattice" in lat:
            lat = lat["lattice"]
    raw["lattice_spec"] = io.lattice_from_dict(lat)
    return raw


def _option(args, cfg, name, default=None, kind=None):
    val = getattr(args, name, None)
    if val is None:
        val = cfg.get(name, default)
    if val is not None and kind is not None:
        if isinstance(val, bool) or not isinstance(val, (int, float, str)):
            raise ConfigError(name, f"expected {kind.__name__}, got {val!r}")
        try:
            val = kind(val)
        except (TypeError, ValueError):
            raise ConfigError(name, f"expected {kind.__name__}, got {val!r}") from None
    return val


def _references(args, cfg, n):
    refs = getattr(args, "references", None)
    if refs is not None:
        try:
            refs = [int(x) for x in refs.split(",") if x.strip()]
        except ValueError:
            raise ConfigError("references", f"expected comma-separated integers, got {refs!r}") from None
    else:
        refs = cfg.get("references")
    if refs is None:
        return None
    if not isinstance(refs, list) or not refs or not all(isinstance(r, int) and 1 <= r <= n for r in refs):
        raise ConfigError("references", f"expected a nonempty list of state indices in 1..{n}")
    return [r - 1 for r in refs]


def _epsilon(args, cfg):
    eps = _option(args, cfg, "epsilon", DEFAULT_EPSILON, float)
    if not 0.0 <= eps < 1.0:
        raise ConfigError("epsilon", f"must lie in [0, 1), got {eps}")
    return eps


def _tol(args, cfg):
    tol = _option(args, cfg, "tol", DEFAULT_TOL, float)
    if tol <= 0:
        raise ConfigError("tol", f"must be positive, got {tol}")
    return tol


def _solve(cfg, tol):
    h = build_hamiltonian(cfg["lattice_spec"])
    return h, eig(h, tol=tol)


def _feature_space(args, cfg, f):
    refs = _references(args, cfg, f.shape[0])
    eps = _epsilon(args, cfg)
    if refs is None:
        refs = select_references(f, eps)
    return feature_vectors(f, refs, eps)


def cmd_spectrum(args):
    cfg = load_config(args)
    paths = io.prepare_outputs(args.out, ["spectrum.json", "densities.csv"], args.force)
    _, s = _solve(cfg, _tol(args, cfg))
    io.write_json(paths[0], io.spectrum_to_dict(s))
    io.write_densities(paths[1], density_table(s))
    return EXIT_OK


def cmd_fidelity(args):
    cfg = load_config(args)
    names = ["fidelity_matrix.csv", "offdiagonal.csv", "references.csv", "features.csv"]
    paths = io.prepare_outputs(args.out, names, args.force)
    _, s = _solve(cfg, _tol(args, cfg))
    f = fidelity_matrix(s)
    space = _feature_space(args, cfg, f)
    n = s.dim
    io.write_fidelity_matrix(paths[0], f)
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
    io.write_csv(paths[1], ["n", "m", "fidelity"], [[a + 1, b + 1, f[a, b]] for a, b in pairs])
    io.write_csv(paths[2], ["reference"], [[int(r) + 1] for r in space.reference_indices])
    io.write_features(paths[3], space)
    return EXIT_OK


def _fit(args, cfg, n, f):
    k = _option(args, cfg, "k", None, int)
    if k is None:
        raise ConfigError("k", "number of clusters is required (--k)")
    if k < 1:
        raise ConfigError("k", f"must be >= 1, got {k}")
    if k > n:
        raise ConfigError("k", f"k exceeds state count ({k} > {n})")
    seed = _option(args, cfg, "seed", 0, int)
    space = _feature_space(args, cfg, f)
    return space, kmeans(space, k, seed=seed)


def cmd_cluster(args):
    cfg = load_config(args)
    paths = io.prepare_outputs(args.out, ["cluster_model.json", "labeled_features.csv"], args.force)
    _, s = _solve(cfg, _tol(args, cfg))
    f = fidelity_matrix(s)
    space, model = _fit(args, cfg, s.dim, f)
    doc = model.to_dict()
    doc["references"] = [int(r) + 1 for r in space.reference_indices]
    try:
        doc["silhouette"] = silhouette_score(space, model)
    except ValueError:
        doc["silhouette"] = None
    doc = _round(doc)
    io.write_json(paths[0], doc)
    io.write_features(paths[1], space, model.assignments)
    return EXIT_OK


def _round(obj):
    if isinstance(obj, float):
        return io.fnum(obj)
    if isinstance(obj, list):
        return [_round(x) for x in obj]
    if isinstance(obj, dict):
        return {k: _round(v) for k, v in obj.items()}
    return obj


def _grid(args, cfg):
    grid = getattr(args, "grid", None) or cfg.get("grid")
    if grid is None:
        raise ConfigError("grid", "sweep grid is required (--grid START:STOP:STEP)")
    try:
        if isinstance(grid, str):
            return parse_grid(grid)
        if isinstance(grid, dict):
            return parse_grid(f"{grid['start']}:{grid['stop']}:{grid['step']}")
        return np.asarray(grid, dtype=float)
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError("grid", str(exc)) from None


def cmd_sweep(args):
    cfg = load_config(args)
    stages = cfg.get("stages", {})
    if not isinstance(stages, dict):
        raise ConfigError("stages", "expected an object of stage flags")
    k = _option(args, cfg, "k", None, int)
    km = None
    if k is not None:
        n = cfg["lattice_spec"].n_sites
        if not 1 <= k <= n:
            raise ConfigError("k", f"k exceeds state count ({k} > {n})" if k > n else "must be >= 1")
        refs = _references(args, cfg, n)
        km = KMeansStage(k, _option(args, cfg, "seed", 0, int), None if refs is None else tuple(refs))
    try:
        spec = SweepSpec(
            base=cfg["lattice_spec"],
            parameter=cfg.get("parameter", "gamma_staggered"),
            grid=_grid(args, cfg),
            densities=bool(stages.get("densities", False)),
            fidelity_set=bool(stages.get("fidelity_set", True)),
            references=bool(stages.get("references", False)),
            epsilon=_epsilon(args, cfg),
            kmeans=km,
            ep_report=bool(stages.get("ep_report", False)),
        )
    except ValueError as exc:
        raise ConfigError("sweep", str(exc)) from None
    workers = args.workers if args.workers is not None else default_workers()
    io.prepare_outputs(args.out, output_names(spec), args.force)
    result = run_sweep(spec, workers=workers)
    write_sweep(result, args.out, force=True)
    return EXIT_OK


def cmd_ep(args):
    cfg = load_config(args)
    paths = io.prepare_outputs(args.out, ["ep_report.json"], args.force)
    h, s = _solve(cfg, _tol(args, cfg))
    nil_tol = _option(args, cfg, "nilpotency_tol", 1e-12, float)
    if nil_tol <= 0:
        raise ConfigError("nilpotency_tol", f"must be positive, got {nil_tol}")
    rep = ep_report(h, s, tol=nil_tol)
    io.write_json(paths[0], _round(rep.to_dict()))
    return EXIT_OK


def _packet(cfg, n, s):
    spec = cfg.get("psi0", {"site": 1})
    if isinstance(spec, list):
        try:
            amps = np.array([complex(*z) if isinstance(z, list) else complex(z) for z in spec])
        except (TypeError, ValueError):
            raise ConfigError("psi0", "explicit amplitudes must be numbers or [re, im] pairs") from None
        if amps.shape != (n,):
            raise ConfigError("psi0", f"expected {n} amplitudes, got {amps.size}")
    elif isinstance(spec, dict) and "site" in spec:
        site = spec["site"]
        if not isinstance(site, int) or not 1 <= site <= n:
            raise ConfigError("psi0.site", f"expected a site in 1..{n}")
        amps = np.zeros(n, dtype=complex)
        amps[site - 1] = 1.0
    elif isinstance(spec, dict) and spec.get("uniform"):
        amps = np.ones(n, dtype=complex) / np.sqrt(n)
    elif isinstance(spec, dict) and "eigenstate" in spec:
        j = spec["eigenstate"]
        if not isinstance(j, int) or not 1 <= j <= n:
            raise ConfigError("psi0.eigenstate", f"expected a state index in 1..{n}")
        amps = s.eigenvectors[:, j - 1].copy()
    else:
        raise ConfigError("psi0", "expected {'site': n}, {'uniform': true}, {'eigenstate': j} or an amplitude list")
    try:
        return WavePacket(amps)
    except ValueError as exc:
        raise ConfigError("psi0", str(exc)) from None


def cmd_evolve(args):
    cfg = load_config(args)
    names = ["time_trace.csv", "packet.json"]
    paths = io.prepare_outputs(args.out, names, args.force)
    h, s = _solve(cfg, _tol(args, cfg))
    n = s.dim
    psi0 = _packet(cfg, n, s)
    times_src = getattr(args, "times", None) or cfg.get("times", "0:100:1")
    try:
        times = parse_grid(times_src) if isinstance(times_src, str) else np.asarray(times_src, dtype=float)
    except (ValueError, TypeError) as exc:
        raise ConfigError("times", str(exc)) from None
    want_fid = bool(args.fidelities or cfg.get("fidelities", False))
    trace = time_trace(s, psi0, times, fidelities=want_fid)
    header = ["t"] + [f"density_{m}" for m in range(1, n + 1)] + ["norm"]
    if want_fid:
        header += [f"fidelity_{j}" for j in range(1, n + 1)]
    io.write_csv(paths[0], header, trace)
    doc = {"initial_norm": psi0.norm}
    if _option(args, cfg, "k", None, int) is not None:
        f = fidelity_matrix(s)
        space, model = _fit(args, cfg, n, f)
        label, feats = classify_packet(psi0, s, space, model)
        doc.update(cluster=label, features=feats.tolist(), references=[int(r) + 1 for r in space.reference_indices])
    io.write_json(paths[1], _round(doc))
    return EXIT_OK


COMMANDS = {
    "spectrum": (cmd_spectrum, "eigenvalues, eigenvectors and site densities"),
    "fidelity": (cmd_fidelity, "pairwise fidelities, references and feature vectors"),
    "cluster": (cmd_cluster, "k-means over fidelity features"),
    "sweep": (cmd_sweep, "one-parameter sweep of the fidelity set"),
    "ep": (cmd_ep, "exceptional-point diagnostics"),
    "evolve": (cmd_evolve, "wave-packet time evolution"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="epcluster", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (func, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.set_defaults(func=func)
        p.add_argument("--config", required=True, help="config JSON path or bundled recipe name (e.g. fig1a)")
        p.add_argument("--out", default="out", help="output directory")
        p.add_argument("--force", action="store_true", help="overwrite existing outputs")
        p.add_argument("--tol", type=float, help="QR deflation tolerance")
        if name in ("fidelity", "cluster", "sweep", "evolve"):
            p.add_argument("--epsilon", type=float, help="reference orthogonality threshold")
            p.add_argument("--references", help="comma-separated 1-based reference states")
        if name in ("cluster", "sweep", "evolve"):
            p.add_argument("--k", type=int)
            p.add_argument("--seed", type=int)
        if name == "sweep":
            p.add_argument("--grid", help="START:STOP:STEP (inclusive)")
            p.add_argument("--workers", type=int, help="threads (default: $EPCLUSTER_WORKERS or CPU count)")
        if name == "evolve":
            p.add_argument("--times", help="START:STOP:STEP sample times")
            p.add_argument("--fidelities", action="store_true", help="add per-eigenstate fidelity columns")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ConvergenceError, SingularBasisError, EvolutionOverflowError, SweepError, np.linalg.LinAlgError) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except (ConfigError, LatticeError) as exc:
        log.error("configuration error: %s", exc)
        return EXIT_CONFIG
    except ValueError as exc:
        log.error("invalid input: %s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
