"""Seeded k-means over fidelity feature vectors.

Randomness comes from numpy's PCG64 generator (``np.random.default_rng``)
seeded with the user seed; all restarts draw from one stream in order, so
a (features, k, seed) triple always selects the same initial indices.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels

DEFAULT_MAX_ITER = 300
DEFAULT_TOL = 1e-9
DEFAULT_RESTARTS = 10


@dataclass(frozen=True)
class ClusterModel:
    k: int
    centroids: np.ndarray
    assignments: np.ndarray
    inertia: float
    seed: int
    iterations_run: int
    inertia_history: np.ndarray

    def to_dict(self):
        return {
            "k": self.k,
            "seed": self.seed,
            "inertia": float(self.inertia),
            "iterations_run": int(self.iterations_run),
            "centroids": self.centroids.tolist(),
            "assignments": self.assignments.tolist(),
        }


def _as_points(features):
    x = getattr(features, "features", features)
    x = np.asarray(x, dtype=float)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.shape[0] == 0 or x.shape[1] == 0:
        raise ValueError("k-means needs a nonempty 2D feature array")
    return np.ascontiguousarray(x)


def kmeans_plusplus(x, k, rng):
    """D^2-weighted seeding; returns the chosen row indices."""
    n = x.shape[0]
    chosen = [int(rng.integers(n))]
    d2 = ((x - x[chosen[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = d2.sum()
        if total > 0.0:
            cum = np.cumsum(d2)
            idx = int(np.searchsorted(cum, rng.random() * total, side="right"))
            idx = min(idx, n - 1)
        else:
            idx = int(rng.integers(n))
        chosen.append(idx)
        d2 = np.minimum(d2, ((x - x[idx]) ** 2).sum(axis=1))
    return np.array(chosen)


def lloyd(x, init, max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL):
    """Run Lloyd iterations from explicit initial centroids."""
    x = _as_points(x)
    init = np.ascontiguousarray(np.asarray(init, dtype=float))
    return _kernels.lloyd(x, init, int(max_iter), float(tol))


def kmeans(features, k, seed=0, max_iter=DEFAULT_MAX_ITER, tol=DEFAULT_TOL,
           restarts=DEFAULT_RESTARTS):
    x = _as_points(features)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k={k} exceeds state count {n}" if k > n else f"k must be >= 1, got {k}")
    if max_iter < 1 or tol < 0 or restarts < 1:
        raise ValueError("need max_iter >= 1, tol >= 0 and restarts >= 1")
    rng = np.random.default_rng(seed)
    best = None
    for _ in range(restarts):
        init = x[kmeans_plusplus(x, k, rng)]
        run = _kernels.lloyd(x, init, int(max_iter), float(tol))
        if best is None or run[2] < best[2]:
            best = run
    centroids, labels, inertia, steps, history = best
    return ClusterModel(
        k=int(k),
        centroids=centroids,
        assignments=np.asarray(labels, dtype=np.int64),
        inertia=float(inertia),
        seed=int(seed),
        iterations_run=int(steps),
        inertia_history=np.asarray(history),
    )


def classify(model, feature):
    """Index of the nearest centroid; ties go to the lower index."""
    feature = np.asarray(feature, dtype=float).ravel()
    if feature.shape[0] != model.centroids.shape[1]:
        raise ValueError(
            f"feature has length {feature.shape[0]}, model expects {model.centroids.shape[1]}"
        )
    d2 = ((model.centroids - feature[None, :]) ** 2).sum(axis=1)
    return int(np.argmin(d2))


def silhouette_score(features, model):
    """Mean silhouette coefficient of the model's partition."""
    x = _as_points(features)
    labels = np.asarray(model.assignments)
    present = np.unique(labels)
    if model.k < 2 or present.size < 2:
        raise ValueError("silhouette needs at least two nonempty clusters")
    counts = np.bincount(labels, minlength=model.k)
    if np.all(counts[present] == 1):
        raise ValueError("silhouette is undefined when every cluster is a singleton")
    dist = np.sqrt(((x[:, None, :] - x[None, :, :]) ** 2).sum(axis=2))
    scores = np.zeros(x.shape[0])
    for i in range(x.shape[0]):
        own = labels[i]
        if counts[own] == 1:
            continue
        a = dist[i, labels == own].sum() / (counts[own] - 1)
        b = min(dist[i, labels == j].mean() for j in present if j != own)
        top = max(a, b)
        scores[i] = 0.0 if top == 0 else (b - a) / top
    return float(scores.mean())
