"""JSON/CSV formats shared by the CLI and the sweep harness.

Numbers are written with 15 significant digits.  Site and state indices in
files are 1-based.
"""

import csv
import json
from pathlib import Path

import numpy as np

from .eigensolver import Spectrum
from .lattice import PROFILES, LatticeError, LatticeSpec

PRECISION = 15
ARRAY_KEYS = ("forward_hops", "backward_hops", "gain_loss")


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending entry."""

    def __init__(self, key, message):
        super().__init__(f"{key}: {message}")
        self.key = key


def fnum(x):
    return float(f"{float(x):.{PRECISION}g}")


def fmt(x):
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.{PRECISION}g}"


def _cpair(z):
    return [fnum(z.real), fnum(z.imag)]


def _profile(obj, n, key):
    if isinstance(obj, dict):
        kind = obj.get("kind")
        if kind not in PROFILES:
            raise ConfigError(f"{key}.kind", f"unknown profile kind {kind!r}; expected one of {sorted(PROFILES)}")
        func, params = PROFILES[kind]
        args = []
        for p in params:
            if p not in obj:
                raise ConfigError(f"{key}.{p}", f"missing parameter for {kind} profile")
            val = obj[p]
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"{key}.{p}", f"expected a number, got {val!r}")
            args.append(float(val))
        try:
            arr = func(n, *args)
        except LatticeError as exc:
            raise ConfigError(key, str(exc)) from None
        for site, val in (obj.get("set") or {}).items():
            try:
                arr[int(site) - 1] = float(val)
            except (ValueError, IndexError, TypeError):
                raise ConfigError(f"{key}.set", f"bad site override {site!r}: {val!r}") from None
        return arr
    if isinstance(obj, list):
        try:
            return np.array(obj, dtype=float)
        except (TypeError, ValueError):
            raise ConfigError(key, "array entries must be numbers") from None
    raise ConfigError(key, "expected a numeric array or a profile object")


def lattice_from_dict(d, prefix="lattice"):
    """Build a :class:`LatticeSpec` from its JSON description.

    Each hop/gain entry is either an explicit array or a profile object
    ``{"kind": "uniform"|"sin_squared"|"staggered", ...}``; a profile may
    carry ``"set": {"<site>": value}`` to override single 1-based sites.
    """
    if not isinstance(d, dict):
        raise ConfigError(prefix, "expected a JSON object")
    for key in ("n_sites", *ARRAY_KEYS):
        if key not in d:
            raise ConfigError(f"{prefix}.{key}", "missing required key")
    n = d["n_sites"]
    if isinstance(n, bool) or not isinstance(n, int) or n < 2:
        raise ConfigError(f"{prefix}.n_sites", f"expected an integer >= 2, got {n!r}")
    boundary = d.get("boundary", "open")
    if boundary not in ("open", "ring"):
        raise ConfigError(f"{prefix}.boundary", f"expected 'open' or 'ring', got {boundary!r}")
    arrays = {k: _profile(d[k], n, f"{prefix}.{k}") for k in ARRAY_KEYS}
    for k, arr in arrays.items():
        if arr.shape != (n,):
            raise ConfigError(f"{prefix}.{k}", f"has length {arr.size}, expected n_sites={n}")
    try:
        return LatticeSpec(n, arrays["forward_hops"], arrays["backward_hops"], arrays["gain_loss"], boundary)
    except LatticeError as exc:
        raise ConfigError(prefix, str(exc)) from None


def lattice_to_dict(spec):
    return {
        "n_sites": spec.n_sites,
        "boundary": spec.boundary,
        **{k: [fnum(x) for x in getattr(spec, k)] for k in ARRAY_KEYS},
    }


def spectrum_to_dict(s):
    return {
        "dim": s.dim,
        "eigenvalues": [_cpair(z) for z in s.eigenvalues],
        "eigenvectors": [[_cpair(z) for z in s.eigenvectors[:, j]] for j in range(s.dim)],
        "residuals": [fnum(r) for r in s.residuals],
    }


def spectrum_from_dict(d):
    w = np.array([complex(re, im) for re, im in d["eigenvalues"]])
    v = np.array([[complex(re, im) for re, im in vec] for vec in d["eigenvectors"]]).T
    return Spectrum(w, v, np.asarray(d["residuals"], dtype=float))


def read_json(path, key="config"):
    try:
        with open(path) as fh:
            return json.load(fh)
    except FileNotFoundError:
        raise ConfigError(key, f"file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(key, f"malformed JSON in {path}: {exc}") from None


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)
        fh.write("\n")


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(x) for x in row])


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], np.array(rows[1:], dtype=float)


def prepare_outputs(outdir, names, force=False):
    """Create ``outdir`` and refuse to clobber existing outputs unless forced."""
    out = Path(outdir)
    out.mkdir(parents=True, exist_ok=True)
    paths = [out / name for name in names]
    existing = [p.name for p in paths if p.exists()]
    if existing and not force:
        raise ConfigError("out", f"refusing to overwrite {', '.join(existing)} in {out} (use --force)")
    return paths


def write_fidelity_matrix(path, f):
    n = f.shape[0]
    write_csv(path, [f"state_{m}" for m in range(1, n + 1)], f)


def write_features(path, space, assignments=None):
    header = ["state"] + [f"ref_{a}" for a in range(1, space.dim + 1)]
    if assignments is not None:
        header.append("cluster")
    rows = []
    for n, feat in enumerate(space.features):
        row = [n + 1, *feat]
        if assignments is not None:
            row.append(int(assignments[n]))
        rows.append(row)
    write_csv(path, header, rows)


def write_densities(path, table):
    n = table.shape[1]
    rows = [[j + 1, *row] for j, row in enumerate(table)]
    write_csv(path, ["state"] + [f"site_{m}" for m in range(1, n + 1)], rows)
