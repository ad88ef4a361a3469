"""k-means over trait vectors with silhouette-based selection of k."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DataError

MAX_ITER = 300


@dataclass(frozen=True)
class FeatureMatrix:
    keys: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self) -> None:
        vals = np.asarray(self.values, dtype=float)
        if vals.ndim != 2 or vals.shape[1] < 1:
            raise DataError("feature matrix must be 2-D with at least one column")
        if len(self.keys) != vals.shape[0]:
            raise DataError("one key per row required")
        if not np.all(np.isfinite(vals)):
            raise DataError("feature matrix contains non-finite values")
        object.__setattr__(self, "keys", tuple(self.keys))
        object.__setattr__(self, "values", vals)

    @classmethod
    def from_rows(cls, rows: Sequence[tuple[str, Sequence[float]]]) -> "FeatureMatrix":
        if not rows:
            raise DataError("no rows")
        return cls(tuple(k for k, _ in rows), np.array([list(v) for _, v in rows], dtype=float))

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def d(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class ClusteringResult:
    k: int
    assignments: np.ndarray
    centroids: np.ndarray
    mean_silhouette: float
    per_point_silhouette: np.ndarray
    rng_seed: int
    iterations_run: int
    objective_history: tuple[float, ...] = field(default=(), compare=False)

    @property
    def inertia(self) -> float:
        return self.objective_history[-1] if self.objective_history else float("nan")


@dataclass(frozen=True)
class KSelectionResult:
    best_k: int
    per_k: dict[int, float]
    repeats: int
    best: ClusteringResult


def _sq_dists(x: np.ndarray, c: np.ndarray) -> np.ndarray:
    diff = x[:, None, :] - c[None, :, :]
    return np.einsum("ijk,ijk->ij", diff, diff)


def _kmeans_pp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centers = [x[rng.integers(n)]]
    closest = ((x - centers[0]) ** 2).sum(axis=1)
    for _ in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=closest / total))
        centers.append(x[idx])
        closest = np.minimum(closest, ((x - x[idx]) ** 2).sum(axis=1))
    return np.array(centers, dtype=float)


def _update(x: np.ndarray, labels: np.ndarray, k: int, centroids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Recompute centroids; an emptied cluster takes over the point farthest from its centroid."""
    labels = labels.copy()
    while True:
        counts = np.bincount(labels, minlength=k)
        empty = np.flatnonzero(counts == 0)
        if empty.size == 0:
            break
        dist = ((x - centroids[labels]) ** 2).sum(axis=1)
        movable = counts[labels] > 1
        dist = np.where(movable, dist, -1.0)
        p = int(np.argmax(dist))
        labels[p] = empty[0]
        centroids = centroids.copy()
        centroids[empty[0]] = x[p]
    new = np.zeros_like(centroids)
    np.add.at(new, labels, x)
    new /= np.bincount(labels, minlength=k)[:, None]
    return new, labels


def _objective(x: np.ndarray, labels: np.ndarray, centroids: np.ndarray) -> float:
    return float(((x - centroids[labels]) ** 2).sum())


def kmeans(data: FeatureMatrix, k: int, seed: int, max_iter: int = MAX_ITER) -> ClusteringResult:
    """Lloyd's algorithm from k-means++ seeding, run to an assignment fixpoint.

    ``objective_history[t]`` is the within-cluster sum of squares after the
    t-th centroid update; it never increases.
    """
    x = data.values
    n = x.shape[0]
    if k < 2 or k > n:
        raise DataError(f"k={k} must satisfy 2 <= k <= {n} rows")
    rng = np.random.default_rng(seed & 0xFFFFFFFFFFFFFFFF)
    centroids = _kmeans_pp(x, k, rng)
    labels = None
    history: list[float] = []
    it = 0
    for it in range(1, max_iter + 1):
        new_labels = np.argmin(_sq_dists(x, centroids), axis=1)
        centroids, new_labels = _update(x, new_labels, k, centroids)
        history.append(_objective(x, new_labels, centroids))
        if labels is not None and np.array_equal(new_labels, labels):
            labels = new_labels
            break
        labels = new_labels
    per_point, mean = silhouette(data, labels)
    return ClusteringResult(
        k=k,
        assignments=labels,
        centroids=centroids,
        mean_silhouette=mean,
        per_point_silhouette=per_point,
        rng_seed=seed,
        iterations_run=it,
        objective_history=tuple(history),
    )


def silhouette(data: FeatureMatrix | np.ndarray, assignments: Sequence[int]) -> tuple[np.ndarray, float]:
    """Per-point silhouette ``(b - a) / max(a, b)`` and its mean.

    Points in singleton clusters score 0, as do points with ``a == b == 0``.
    """
    x = data.values if isinstance(data, FeatureMatrix) else np.asarray(data, dtype=float)
    labels = np.asarray(assignments)
    clusters = np.unique(labels)
    if clusters.size < 2:
        raise DataError("silhouette needs at least two nonempty clusters")
    diff = np.abs(x[:, None, :] - x[None, :, :])
    # scale each pair by its largest component (as hypot does) so tiny gaps do not square to zero
    peak = diff.max(axis=2, initial=0.0)
    safe = np.where(peak > 0, peak, 1.0)
    ratio = diff / safe[:, :, None]
    dist = peak * np.sqrt(np.einsum("ijk,ijk->ij", ratio, ratio))
    onehot = (labels[:, None] == clusters[None, :]).astype(float)
    sizes = onehot.sum(axis=0)
    sums = dist @ onehot  # [i, c] = sum of distances from i to members of c
    own = np.searchsorted(clusters, labels)
    own_size = sizes[own]
    idx = np.arange(len(labels))
    with np.errstate(divide="ignore", invalid="ignore"):
        a = np.where(own_size > 1, sums[idx, own] / np.maximum(own_size - 1, 1), 0.0)
        mean_other = sums / sizes[None, :]
        mean_other[idx, own] = np.inf
        b = mean_other.min(axis=1)
        denom = np.maximum(a, b)
        s = np.where(denom > 0, (b - a) / np.where(denom > 0, denom, 1.0), 0.0)
    s = np.where(own_size > 1, s, 0.0)
    return s, float(s.mean())


def derive_seed(seed: int, repeat: int) -> int:
    return seed + repeat


def select_k(
    data: FeatureMatrix, k_range: tuple[int, int] = (2, 20), repeats: int = 10, seed: int = 0
) -> KSelectionResult:
    """For each k keep the best-silhouette run of ``repeats``; pick the best k.

    k is clipped to ``rows - 1``. Ties go to the smaller k.
    """
    if data.n < 3:
        raise DataError("select_k needs at least three rows")
    if repeats < 1:
        raise DataError("repeats must be >= 1")
    lo, hi = max(2, k_range[0]), min(k_range[1], data.n - 1)
    if lo > hi:
        raise DataError(f"no feasible k in {k_range} for {data.n} rows")
    per_k: dict[int, float] = {}
    best_per_k: dict[int, ClusteringResult] = {}
    for k in range(lo, hi + 1):
        best = None
        for r in range(repeats):
            res = kmeans(data, k, derive_seed(seed, r))
            if best is None or res.mean_silhouette > best.mean_silhouette:
                best = res
        per_k[k] = best.mean_silhouette
        best_per_k[k] = best
    best_k = max(per_k, key=lambda k: (per_k[k], -k))
    return KSelectionResult(best_k=best_k, per_k=per_k, repeats=repeats, best=best_per_k[best_k])


def cluster_means(data: FeatureMatrix, assignments: Sequence[int], k: int) -> tuple[np.ndarray, np.ndarray]:
    """Cluster sizes and per-cluster mean feature vectors."""
    labels = np.asarray(assignments)
    sizes = np.bincount(labels, minlength=k)
    means = np.zeros((k, data.d))
    np.add.at(means, labels, data.values)
    with np.errstate(invalid="ignore", divide="ignore"):
        means = means / sizes[:, None]
    return sizes, means
