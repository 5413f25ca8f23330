"""FAR/FRR/EER metrics and per-writer threshold calibration.

The acceptance threshold is ``mean - alpha * std`` of the training-sample
similarities.  Calibration grid-searches (eta, alpha): for each eta an
interval model is built and scored, for each alpha the resulting single
operating point is rated by ``max(FAR, FRR)``, and the pair minimizing that
error wins (ties to the smaller eta, then the smaller alpha).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import CalibrationError, MetricError
from .features import FeatureSelection
from .intervals import IntervalModel, build_interval_model, similarity_scores


def _inclusive_range(lo: float, hi: float, step: float) -> list[float]:
    if step <= 0:
        raise ValueError(f"step must be > 0, got {step}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [lo + i * step for i in range(max(count, 0))]


@dataclass
class ScoreSet:
    """Genuine and impostor similarity scores for one evaluation."""

    genuine_scores: np.ndarray
    impostor_scores: np.ndarray

    def __post_init__(self):
        self.genuine_scores = np.asarray(self.genuine_scores, dtype=float).ravel()
        self.impostor_scores = np.asarray(self.impostor_scores, dtype=float).ravel()


@dataclass
class GridSpec:
    """Search grid for the interval span eta and threshold slack alpha."""

    eta_values: list[float] = field(
        default_factory=lambda: _inclusive_range(1.25, 4.0, 0.25)
    )
    alpha_values: list[float] = field(
        default_factory=lambda: _inclusive_range(0.0, 3.0, 0.25)
    )

    def __post_init__(self):
        if not self.eta_values or not self.alpha_values:
            raise ValueError("grid must contain at least one eta and one alpha")
        if any(not e > 1 for e in self.eta_values):
            raise ValueError("all eta values must be > 1")
        if any(a < 0 for a in self.alpha_values):
            raise ValueError("all alpha values must be >= 0")

    @classmethod
    def from_bounds(
        cls,
        eta_min: float = 1.25,
        eta_max: float = 4.0,
        eta_step: float = 0.25,
        alpha_min: float = 0.0,
        alpha_max: float = 3.0,
        alpha_step: float = 0.25,
    ) -> "GridSpec":
        return cls(
            eta_values=_inclusive_range(eta_min, eta_max, eta_step),
            alpha_values=_inclusive_range(alpha_min, alpha_max, alpha_step),
        )


@dataclass
class CalibrationResult:
    """The winning (eta, alpha, theta) triple and its validation errors."""

    eta: float
    alpha: float
    theta: float
    achieved_eer: float  # min over the grid of max(FAR, FRR) at theta
    roc: list[tuple[float, float, float]]  # (threshold, far, frr) for chosen eta
    validation_eer: float  # interpolated EER of the chosen eta's score set


def decision_threshold(train_similarities, alpha: float) -> float:
    """Acceptance threshold: mean minus alpha population-stds of the scores."""
    sims = np.asarray(train_similarities, dtype=float).ravel()
    if sims.size == 0:
        raise CalibrationError("cannot derive a threshold from zero scores")
    if alpha < 0:
        raise CalibrationError(f"alpha must be >= 0, got {alpha}")
    return float(sims.mean() - alpha * sims.std())


def compute_far_frr(scores: ScoreSet, threshold: float) -> tuple[float, float]:
    """Error rates at one threshold; a score is accepted iff >= threshold."""
    gen, imp = scores.genuine_scores, scores.impostor_scores
    if gen.size == 0 or imp.size == 0:
        raise MetricError("FAR/FRR need non-empty genuine and impostor scores")
    if not np.isfinite(threshold):
        raise MetricError(f"threshold must be finite, got {threshold}")
    far = float(np.count_nonzero(imp >= threshold)) / imp.size
    frr = float(np.count_nonzero(gen < threshold)) / gen.size
    return far, frr


def compute_eer(
    scores: ScoreSet,
) -> tuple[float, float, list[tuple[float, float, float]]]:
    """Equal error rate from a threshold sweep over the observed scores.

    Thresholds are the sorted distinct scores plus one sentinel below the
    minimum and one above the maximum.  If FAR equals FRR exactly at a swept
    point that value is returned; otherwise FAR and FRR are interpolated
    linearly between the two sweep points where their difference changes
    sign.  Also returns the full (threshold, far, frr) sweep for reporting.
    """
    gen, imp = scores.genuine_scores, scores.impostor_scores
    if gen.size == 0 or imp.size == 0:
        raise MetricError("EER needs non-empty genuine and impostor scores")

    pooled = np.concatenate([gen, imp])
    distinct = np.unique(pooled)
    thresholds = np.concatenate(
        [[distinct[0] - 1.0], distinct, [distinct[-1] + 1.0]]
    )
    gen_sorted = np.sort(gen)
    imp_sorted = np.sort(imp)
    far = (
        imp.size - np.searchsorted(imp_sorted, thresholds, side="left")
    ) / imp.size
    frr = np.searchsorted(gen_sorted, thresholds, side="left") / gen.size
    roc = [
        (float(t), float(a), float(r)) for t, a, r in zip(thresholds, far, frr)
    ]

    diff = far - frr
    exact = np.flatnonzero(diff == 0.0)
    if exact.size:
        i = int(exact[0])
        return float(far[i]), float(thresholds[i]), roc

    # diff starts at +1 (accept everything) and ends at -1 (reject everything)
    i = int(np.flatnonzero((diff[:-1] > 0) & (diff[1:] < 0))[0])
    t = diff[i] / (diff[i] - diff[i + 1])
    eer = float(far[i] + (far[i + 1] - far[i]) * t)
    eer_threshold = float(thresholds[i] + (thresholds[i + 1] - thresholds[i]) * t)
    return eer, eer_threshold, roc


def calibrate_writer(
    train_matrix,
    fs: FeatureSelection,
    validation_genuine,
    impostor_pool,
    grid: GridSpec | None = None,
    writer_id: str = "",
) -> tuple[CalibrationResult, IntervalModel]:
    """Pick the (eta, alpha) pair whose operating point balances errors best.

    ``train_matrix``, ``validation_genuine`` and ``impostor_pool`` are
    full-width matrices; the writer's selected features are projected out
    here.  Returns the calibration result together with the winning eta's
    interval model.
    """
    if grid is None:
        grid = GridSpec()
    train = np.atleast_2d(np.asarray(train_matrix, dtype=float))
    val = np.atleast_2d(np.asarray(validation_genuine, dtype=float))
    pool = np.atleast_2d(np.asarray(impostor_pool, dtype=float))
    if train.shape[0] < 1:
        raise CalibrationError("calibration needs at least one training row")
    if val.size == 0 or pool.size == 0:
        raise CalibrationError(
            "calibration needs non-empty validation and impostor pools"
        )

    idx = fs.selected_indices
    train_p, val_p, pool_p = train[:, idx], val[:, idx], pool[:, idx]

    best = None  # (error, eta, alpha, theta, model, val_scores, pool_scores)
    for eta in grid.eta_values:
        model = build_interval_model(train_p, fs, eta, writer_id)
        train_scores = similarity_scores(train_p, model)
        val_scores = similarity_scores(val_p, model)
        pool_scores = similarity_scores(pool_p, model)
        for alpha in grid.alpha_values:
            theta = decision_threshold(train_scores, alpha)
            far, frr = compute_far_frr(
                ScoreSet(val_scores, pool_scores), theta
            )
            error = max(far, frr)
            if best is None or error < best[0]:
                best = (error, eta, alpha, theta, model, val_scores, pool_scores)

    error, eta, alpha, theta, model, val_scores, pool_scores = best
    validation_eer, _, roc = compute_eer(ScoreSet(val_scores, pool_scores))
    result = CalibrationResult(
        eta=float(eta),
        alpha=float(alpha),
        theta=float(theta),
        achieved_eer=float(error),
        roc=roc,
        validation_eer=float(validation_eer),
    )
    return result, model
