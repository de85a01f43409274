"""Buckshot clustering: group-average agglomeration on a random sample.

Similarity is the cosine between reduced vectors (optionally mean-centered,
i.e. Pearson correlation). Group-average linkage is maintained with the
Lance-Williams weighted-mean update, which is algebraically identical to the
mean pairwise similarity between cluster members. Merging always folds the
higher-indexed cluster into the lower one, so a cluster's representative row
is its minimum member index; ties in the merge choice resolve to the
lexicographically smallest representative pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import DataError, NumericError
from .svd import center_rows, unit_rows

UNASSIGNED = -1


@dataclass
class ClusterModel:
    """k centroids plus the sampled points and labels that produced them.

    ``sample_assignment`` keeps the agglomerative labels of the sampled
    points, which may differ from what nearest-centroid ``assign`` would
    give; both views are intentionally available. Centroids are member
    means, which under cosine ranks identically to member sums.
    """

    k: int
    centroids: np.ndarray
    sample_ids: np.ndarray
    sample_assignment: np.ndarray
    seed: int
    centered: bool = False
    merges: Optional[list[tuple[int, int]]] = None

    @property
    def dims(self) -> int:
        return self.centroids.shape[1]


def default_sample_size(n: int, k: int) -> int:
    """Buckshot's sample: sqrt(k*n) points, capped at n."""
    return min(n, math.ceil(math.sqrt(k * n)))


def similarity_matrix(points: np.ndarray, centered: bool = False) -> np.ndarray:
    pts = center_rows(points) if centered else np.asarray(points, np.float64)
    u = unit_rows(pts)
    sims = u @ u.T
    return np.clip(sims, -1.0, 1.0)


def group_average_agglomerate(sims: np.ndarray, k: int):
    """Merge clusters of highest average pairwise similarity until k remain.

    Returns ``(labels, merges)``: labels map each point to 0..k-1 (numbered
    by ascending minimum member index), merges list the representative pairs
    in merge order.
    """
    s = sims.shape[0]
    if k > s:
        raise DataError(f"cannot form {k} clusters from {s} points")
    work = np.array(sims, dtype=np.float64)
    np.fill_diagonal(work, -np.inf)
    sizes = np.ones(s, dtype=np.int64)
    labels = np.arange(s)
    merges: list[tuple[int, int]] = []
    for _ in range(s - k):
        flat = int(np.argmax(work))
        i, j = divmod(flat, s)  # row-major argmax gives i < j on symmetric ties
        if not np.isfinite(work[i, j]):
            raise NumericError("similarity matrix exhausted before reaching k")
        merged = (sizes[i] * work[i] + sizes[j] * work[j]) / (sizes[i] + sizes[j])
        work[i, :] = merged
        work[:, i] = merged
        work[i, i] = -np.inf
        work[j, :] = -np.inf
        work[:, j] = -np.inf
        sizes[i] += sizes[j]
        labels[labels == j] = i
        merges.append((i, j))
    reps = np.unique(labels)
    renumber = {int(rep): c for c, rep in enumerate(reps)}
    return np.array([renumber[int(r)] for r in labels]), merges


def buckshot(points: np.ndarray, k: int, sample_size: Optional[int] = None,
             seed: int = 0, centered: bool = False) -> ClusterModel:
    """Cluster by group-average agglomeration of a seeded uniform sample.

    ``sample_size`` defaults to sqrt(k*n). Requires k <= sample_size <= n
    and finite points; a sample of identical points cannot be split and is
    reported as degenerate geometry.
    """
    points = np.asarray(points, dtype=np.float64)
    if points.ndim != 2:
        raise ValueError("points must be a 2-d array")
    n = points.shape[0]
    if sample_size is None:
        sample_size = max(k, default_sample_size(n, k))
    if not k >= 1:
        raise DataError(f"need at least one cluster, got k={k}")
    if not k <= sample_size <= n:
        raise DataError(
            f"need k <= sample_size <= n, got k={k}, sample={sample_size}, n={n}")
    if not np.isfinite(points).all():
        raise DataError("points contain non-finite values")

    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xB5]))
    sample_ids = np.sort(rng.choice(n, size=sample_size, replace=False))
    sample = points[sample_ids]
    if k > 1 and bool((sample == sample[0]).all()):
        raise NumericError("degenerate geometry: all sampled points identical")

    labels, merges = group_average_agglomerate(
        similarity_matrix(sample, centered), k)
    centroids = np.zeros((k, points.shape[1]))
    for c in range(k):
        centroids[c] = sample[labels == c].mean(axis=0)
    return ClusterModel(k=k, centroids=centroids, sample_ids=sample_ids,
                        sample_assignment=labels, seed=seed, centered=centered,
                        merges=merges)


def assign_batch(points: np.ndarray, model: ClusterModel) -> np.ndarray:
    """Nearest-centroid labels for rows of ``points``.

    Similarity ties break toward the lowest cluster id; rows with zero norm
    get UNASSIGNED.
    """
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[1] != model.dims:
        raise ValueError(
            f"point dimension {points.shape[1]} != model dimension {model.dims}")
    pts = center_rows(points) if model.centered else points
    cents = center_rows(model.centroids) if model.centered else model.centroids
    sims = unit_rows(pts) @ unit_rows(cents).T
    out = np.argmax(sims, axis=1).astype(np.int32)
    zero = np.linalg.norm(pts, axis=1) == 0.0
    out[zero] = UNASSIGNED
    return out


def assign(point, model: ClusterModel) -> int:
    """Cluster id of the closest centroid, or UNASSIGNED for a zero vector."""
    point = np.asarray(point, dtype=np.float64)
    if point.shape != (model.dims,):
        raise ValueError(f"expected a vector of length {model.dims}, got {point.shape}")
    return int(assign_batch(point[None, :], model)[0])
