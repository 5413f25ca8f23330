"""Writer-specific feature selection.

Three stages, run per writer on the training signature matrix:

1. a robust pairwise-difference dispersion estimate per feature column,
2. density clustering of the per-feature dispersions (1-D DBSCAN), keeping
   the most populated cluster,
3. Minkowski-weighted k-means over the surviving features, averaging the
   per-feature weights over several seeded trials and keeping the top slice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DispersionError

EPS_FLOOR = 1e-12


@dataclass
class WeightingConfig:
    """Knobs for the Minkowski-weighted k-means stage."""

    cluster_count: int = 2
    minkowski_exponent: float = 2.0
    trials: int = 20
    seed: int | None = None

    def __post_init__(self):
        if self.cluster_count < 1:
            raise ValueError(f"cluster_count must be >= 1, got {self.cluster_count}")
        if not self.minkowski_exponent > 1:
            raise ValueError(
                f"minkowski_exponent must be > 1, got {self.minkowski_exponent}"
            )
        if self.trials < 1:
            raise ValueError(f"trials must be >= 1, got {self.trials}")


@dataclass
class FeatureSelectionConfig:
    """Knobs for the full three-stage selection pipeline."""

    mom_constant: float = 1.0
    dbscan_eps: float | None = None  # None -> scale-adaptive auto rule
    dbscan_min_pts: int = 3
    retention_ratio: float = 0.8
    weighting: WeightingConfig = field(default_factory=WeightingConfig)

    def __post_init__(self):
        if not self.mom_constant > 0:
            raise ValueError(f"mom_constant must be > 0, got {self.mom_constant}")
        if self.dbscan_eps is not None and not self.dbscan_eps > 0:
            raise ValueError(f"dbscan_eps must be > 0, got {self.dbscan_eps}")
        if self.dbscan_min_pts < 1:
            raise ValueError(f"dbscan_min_pts must be >= 1, got {self.dbscan_min_pts}")
        if not 0 < self.retention_ratio <= 1:
            raise ValueError(
                f"retention_ratio must be in (0, 1], got {self.retention_ratio}"
            )


@dataclass
class ClusterResult:
    """Outcome of the dispersion-clustering stage."""

    labels: np.ndarray  # per-feature cluster id, -1 for noise
    surviving: np.ndarray  # feature indices of the winning cluster, ascending
    noise_fallback: bool  # True when everything was noise and we kept all
    eps: float  # the eps actually used


@dataclass
class FeatureWeighting:
    """Converged state of the weighted k-means stage.

    ``centroids``, ``dispersions`` and ``weights`` are the (K, d) arrays from
    the last trial; ``averaged_weights`` is the per-feature mean, over all
    trials, of the majority cluster's weight vector.
    """

    centroids: np.ndarray
    dispersions: np.ndarray
    weights: np.ndarray
    averaged_weights: np.ndarray


@dataclass
class FeatureSelection:
    """Surviving feature indices plus full provenance of how they won."""

    selected_indices: np.ndarray  # original column indices, best first
    weights: np.ndarray  # averaged weight per selected feature
    mom_values: np.ndarray  # dispersion per original feature
    surviving_cluster: np.ndarray  # indices retained after clustering
    noise_fallback: bool = False

    @property
    def size(self) -> int:
        return int(self.selected_indices.size)


def mom_dispersion(values, c: float = 1.0) -> float:
    """Robust scale of a 1-D sample from pairwise absolute differences.

    Computes ``c * lomed_i { himed_{j != i} |x_i - x_j| }`` where lomed/himed
    are the low and high medians (the Rousseeuw-Croux Sn convention).
    Translation-invariant and scale-equivariant; zero for constant input.
    """
    x = np.asarray(values, dtype=float).ravel()
    n = x.size
    if n < 2:
        raise DispersionError(
            f"dispersion needs at least 2 observations, got {n}"
        )
    diffs = np.abs(x[:, None] - x[None, :])
    off_diag = diffs[~np.eye(n, dtype=bool)].reshape(n, n - 1)
    # high median of the n-1 differences for each i, then low median over i;
    # for q sorted values the high median sits at q//2, the low at (q-1)//2
    inner = np.sort(off_diag, axis=1)[:, (n - 1) // 2]
    outer = np.sort(inner)[(n - 1) // 2]
    return float(c * outer)


def _auto_eps(mom_values: np.ndarray) -> float:
    if mom_values.size < 2:
        return EPS_FLOOR
    return max(EPS_FLOOR, 0.5 * float(np.std(mom_values, ddof=1)))


def cluster_features_by_mom(
    mom_values, eps: float | None = None, min_pts: int = 3
) -> ClusterResult:
    """Group features by dispersion with a deterministic 1-D DBSCAN.

    The cluster with the most members survives.  Ties go to the cluster with
    the smaller mean dispersion, then to the one containing the smallest
    feature index.  If every point ends up as noise the full feature set is
    kept and ``noise_fallback`` is set.
    """
    x = np.asarray(mom_values, dtype=float).ravel()
    m = x.size
    if m < 1:
        raise ValueError("mom_values must be non-empty")
    if eps is None:
        eps = _auto_eps(x)

    order = np.argsort(x, kind="stable")
    xs = x[order]
    lo = np.searchsorted(xs, x - eps, side="left")
    hi = np.searchsorted(xs, x + eps, side="right")
    is_core = (hi - lo) >= min_pts

    labels = np.full(m, -1, dtype=int)
    n_clusters = 0
    for i in range(m):
        if labels[i] != -1 or not is_core[i]:
            continue
        stack = [i]
        while stack:
            j = stack.pop()
            if labels[j] != -1:
                continue
            labels[j] = n_clusters
            if is_core[j]:
                for v in order[lo[j]:hi[j]]:
                    if labels[v] == -1:
                        stack.append(int(v))
        n_clusters += 1

    if n_clusters == 0:
        return ClusterResult(
            labels=labels, surviving=np.arange(m), noise_fallback=True, eps=eps
        )

    best = None
    for k in range(n_clusters):
        members = np.flatnonzero(labels == k)
        key = (-members.size, float(np.mean(x[members])), int(members.min()))
        if best is None or key < best[0]:
            best = (key, members)
    return ClusterResult(
        labels=labels, surviving=best[1], noise_fallback=False, eps=eps
    )


def _minkowski_center(column: np.ndarray, p: float) -> float:
    """Minimizer of sum |y - c|^p over c for a 1-D sample (p > 1)."""
    if p == 2.0:
        return float(column.mean())
    from scipy.optimize import minimize_scalar

    lo, hi = float(column.min()), float(column.max())
    if lo == hi:
        return lo
    res = minimize_scalar(
        lambda centre: float(np.sum(np.abs(column - centre) ** p)),
        bounds=(lo, hi),
        method="bounded",
    )
    return float(res.x)


def _weights_from_dispersions(dispersions: np.ndarray, p: float) -> np.ndarray:
    """Per-cluster feature weights: reciprocal dispersion-ratio sums, rows sum to 1."""
    d = np.maximum(dispersions, EPS_FLOOR)
    t = d ** (-1.0 / (p - 1.0))
    return t / t.sum(axis=1, keepdims=True)


def imwk_feature_weights(matrix, config: WeightingConfig) -> FeatureWeighting:
    """Minkowski-weighted k-means feature weights, averaged over seeded trials.

    Each trial: initialize centroids from random distinct rows and uniform
    weights, then iterate (assign rows by weighted Minkowski distance, update
    centroids to per-cluster Minkowski centers, recompute per-feature
    within-cluster dispersions and weights) until assignments stabilize.
    Per trial, the weight vector of the cluster holding the most rows is
    contributed to the average.
    """
    y = np.asarray(matrix, dtype=float)
    if y.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {y.shape}")
    n, d = y.shape
    if n < 2:
        raise ValueError(f"weighting needs at least 2 rows, got {n}")
    if d < 1:
        raise ValueError("weighting needs at least 1 feature")
    k = config.cluster_count
    p = config.minkowski_exponent
    if k > n:
        raise ValueError(f"cluster_count {k} exceeds row count {n}")

    rng = np.random.default_rng(config.seed)
    trial_weights = np.empty((config.trials, d))
    centroids = dispersions = weights = None
    for t in range(config.trials):
        init_rows = rng.choice(n, size=k, replace=False)
        centroids = y[init_rows].copy()
        weights = np.full((k, d), 1.0 / d)
        labels = np.full(n, -1, dtype=int)
        for _ in range(100):
            dist = np.empty((n, k))
            for c in range(k):
                dist[:, c] = np.sum(
                    weights[c] ** p * np.abs(y - centroids[c]) ** p, axis=1
                )
            new_labels = np.argmin(dist, axis=1)
            assigned = dist[np.arange(n), new_labels]
            for c in range(k):
                if not np.any(new_labels == c):
                    far = int(np.argmax(assigned))
                    centroids[c] = y[far]
                    new_labels[far] = c
                    assigned[far] = 0.0
            if np.array_equal(new_labels, labels):
                break
            labels = new_labels
            for c in range(k):
                members = y[labels == c]
                for v in range(d):
                    centroids[c, v] = _minkowski_center(members[:, v], p)
            dispersions = np.empty((k, d))
            for c in range(k):
                dispersions[c] = np.sum(
                    np.abs(y[labels == c] - centroids[c]) ** p, axis=0
                )
            weights = _weights_from_dispersions(dispersions, p)
        sizes = np.bincount(labels, minlength=k)
        trial_weights[t] = weights[int(np.argmax(sizes))]

    return FeatureWeighting(
        centroids=centroids,
        dispersions=np.maximum(dispersions, EPS_FLOOR),
        weights=weights,
        averaged_weights=trial_weights.mean(axis=0),
    )


def select_writer_features(
    train_matrix, config: FeatureSelectionConfig | None = None
) -> FeatureSelection:
    """Run all three stages and return the ranked writer-specific feature set.

    The retained count is ``floor(retention_ratio * m)`` of the *original*
    feature count (never below 1), capped at the surviving cluster's size.
    Selected indices are ordered by nonincreasing averaged weight, ties by
    ascending feature index.
    """
    if config is None:
        config = FeatureSelectionConfig()
    y = np.asarray(train_matrix, dtype=float)
    if y.ndim != 2:
        raise ValueError(f"expected a 2-D training matrix, got shape {y.shape}")
    n, m = y.shape
    if n < 2:
        raise DispersionError(
            f"feature selection needs at least 2 training rows, got {n}"
        )
    if m < 1:
        raise ValueError("training matrix has no feature columns")

    mom_values = np.array(
        [mom_dispersion(y[:, v], config.mom_constant) for v in range(m)]
    )
    clusters = cluster_features_by_mom(
        mom_values, eps=config.dbscan_eps, min_pts=config.dbscan_min_pts
    )
    surviving = clusters.surviving

    weighting = imwk_feature_weights(y[:, surviving], config.weighting)
    avg = weighting.averaged_weights
    # argsort on (-weight, index): stable sort over ascending index input
    rank = np.argsort(-avg, kind="stable")
    keep = min(surviving.size, max(1, math.floor(config.retention_ratio * m)))
    chosen = rank[:keep]
    return FeatureSelection(
        selected_indices=surviving[chosen],
        weights=avg[chosen],
        mom_values=mom_values,
        surviving_cluster=surviving,
        noise_fallback=clusters.noise_fallback,
    )
