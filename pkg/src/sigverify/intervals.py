"""Interval-valued symbolic writer models and the fuzzy similarity score.

A writer model stores, per selected feature, the training mean and standard
deviation plus a support interval spanning ``eta`` standard deviations each
way.  A crisp test value scores 1 on the plateau within one standard
deviation of the mean, 0 outside the support, and ramps linearly in between,
so the per-signature score is a trapezoidal fuzzy membership averaged over
features.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ModelError
from .features import FeatureSelection

# relative tolerance for the point plateau of a zero-variance feature
DEGENERATE_EQ_TOL = 1e-9


@dataclass(frozen=True)
class IntervalFeature:
    """Per-feature quadruple: mean, std and the support interval."""

    feature_index: int
    mean: float
    std: float
    lower: float
    upper: float


@dataclass
class IntervalModel:
    """Interval representation of one writer over the selected features."""

    writer_id: str
    eta: float
    feature_indices: np.ndarray
    means: np.ndarray
    stds: np.ndarray
    lowers: np.ndarray
    uppers: np.ndarray

    def __len__(self) -> int:
        return int(self.means.size)

    @property
    def features(self) -> list[IntervalFeature]:
        return [
            IntervalFeature(
                feature_index=int(self.feature_indices[i]),
                mean=float(self.means[i]),
                std=float(self.stds[i]),
                lower=float(self.lowers[i]),
                upper=float(self.uppers[i]),
            )
            for i in range(len(self))
        ]


def build_interval_model(
    train_matrix, fs: FeatureSelection, eta: float, writer_id: str = ""
) -> IntervalModel:
    """Build the interval model from an already-projected training matrix.

    ``train_matrix`` has one row per training signature and one column per
    selected feature (aligned with ``fs.selected_indices``).  Means use the
    arithmetic average, stds the population form (divisor n), so a single
    training row yields degenerate zero-width intervals.
    """
    if not eta > 1:
        raise ModelError(f"eta must be > 1 so ramps have width, got {eta}")
    y = np.atleast_2d(np.asarray(train_matrix, dtype=float))
    n, d = y.shape
    if n < 1:
        raise ModelError("interval model needs at least one training row")
    if d != fs.size:
        raise DimensionError(
            f"training matrix has {d} columns but selection has {fs.size} features"
        )
    means = y.mean(axis=0)
    stds = y.std(axis=0)  # population form
    return IntervalModel(
        writer_id=writer_id,
        eta=float(eta),
        feature_indices=np.asarray(fs.selected_indices, dtype=int).copy(),
        means=means,
        stds=stds,
        lowers=means - eta * stds,
        uppers=means + eta * stds,
    )


def _trapezoid(t, means, stds, lowers, uppers) -> np.ndarray:
    """Trapezoidal membership of crisp values; all arrays broadcast to t."""
    t = np.asarray(t, dtype=float)
    means = np.broadcast_to(means, t.shape)
    stds = np.broadcast_to(stds, t.shape)
    lowers = np.broadcast_to(lowers, t.shape)
    uppers = np.broadcast_to(uppers, t.shape)

    out = np.zeros(t.shape)
    degenerate = stds <= 0.0
    plateau_lo = means - stds
    plateau_hi = means + stds

    inside = ~degenerate & (t >= lowers) & (t <= uppers)
    plateau = inside & (t >= plateau_lo) & (t <= plateau_hi)
    left = inside & (t < plateau_lo)
    right = inside & (t > plateau_hi)

    out[plateau] = 1.0
    out[left] = (t[left] - lowers[left]) / (plateau_lo[left] - lowers[left])
    out[right] = (uppers[right] - t[right]) / (uppers[right] - plateau_hi[right])

    if np.any(degenerate):
        tol = DEGENERATE_EQ_TOL * np.maximum(1.0, np.abs(means[degenerate]))
        out[degenerate] = (np.abs(t[degenerate] - means[degenerate]) <= tol).astype(
            float
        )
    return out


def feature_membership(t: float, feat: IntervalFeature) -> float:
    """Membership of a single crisp value in one interval feature."""
    value = _trapezoid(
        np.array([t]),
        np.array([feat.mean]),
        np.array([feat.std]),
        np.array([feat.lower]),
        np.array([feat.upper]),
    )
    return float(value[0])


def memberships(values, model: IntervalModel) -> np.ndarray:
    """Per-feature memberships of projected values; broadcasts over rows."""
    return _trapezoid(values, model.means, model.stds, model.lowers, model.uppers)


def fuzzy_similarity(test, model: IntervalModel) -> float:
    """Mean per-feature membership of a projected test vector, in [0, 1]."""
    t = np.asarray(test, dtype=float).ravel()
    if t.size != len(model):
        raise DimensionError(
            f"test vector has {t.size} features, model expects {len(model)}"
        )
    return float(memberships(t, model).mean())


def similarity_scores(matrix, model: IntervalModel) -> np.ndarray:
    """Fuzzy similarity of each row of an already-projected matrix."""
    y = np.atleast_2d(np.asarray(matrix, dtype=float))
    if y.shape[1] != len(model):
        raise DimensionError(
            f"matrix has {y.shape[1]} features, model expects {len(model)}"
        )
    return memberships(y, model).mean(axis=1)
