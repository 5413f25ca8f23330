"""Enrollment, verification decisions, and the writer-model store.

Enrollment chains the protocol split, feature selection and calibration for
one writer and packs the result into a ``WriterModel``.  Verification
projects a test vector onto the writer's selected features, scores it with
the fuzzy similarity and compares against the calibrated threshold; the
work done is exactly one membership evaluation per selected feature.

The store is a single JSON document.  All float fields are serialized as
decimal strings (``repr``) so reloaded models reproduce decisions bit for
bit.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .calibration import GridSpec, calibrate_writer
from .dataset import FeatureDataset, ProtocolCategory, feature_matrix, split_protocol
from .errors import DimensionError, SigverifyError, StoreError
from .features import (
    FeatureSelection,
    FeatureSelectionConfig,
    select_writer_features,
)
from .intervals import IntervalModel, memberships

STORE_SCHEMA_VERSION = 1


@dataclass
class Provenance:
    """How a writer model came to be; everything needed to reproduce it."""

    dataset_name: str
    category: str
    seed: int
    config: dict
    created_at: str | None = None


@dataclass
class WriterModel:
    """Knowledge-base entry: selected features, intervals and thresholds."""

    writer_id: str
    selection: FeatureSelection
    interval_model: IntervalModel
    eta: float
    alpha: float
    theta: float
    provenance: Provenance


@dataclass
class Decision:
    """Outcome of one verification attempt."""

    writer_id: str
    verdict: str  # "genuine" or "forgery"
    score: float
    threshold: float
    membership_evaluations: int

    def record(self) -> str:
        """Single-line machine-readable form: writer_id,verdict,score,threshold."""
        return f"{self.writer_id},{self.verdict},{self.score!r},{self.threshold!r}"


def _degenerate_selection(m: int, retention_ratio: float) -> FeatureSelection:
    """One-shot fallback: no pairwise dispersion exists for a single row."""
    keep = min(m, max(1, math.floor(retention_ratio * m)))
    return FeatureSelection(
        selected_indices=np.arange(keep),
        weights=np.full(keep, 1.0 / keep),
        mom_values=np.full(m, np.nan),
        surviving_cluster=np.arange(m),
        noise_fallback=False,
    )


def _stage(name: str, exc: SigverifyError) -> SigverifyError:
    return type(exc)(f"{name}: {exc}")


def enroll_writer(
    dataset: FeatureDataset,
    writer_id: str,
    category: ProtocolCategory | str,
    selection_config: FeatureSelectionConfig | None = None,
    grid: GridSpec | None = None,
    seed: int = 0,
    validation_count: int | None = None,
    pool_per_writer: int = 1,
    created_at: str | None = None,
) -> WriterModel:
    """Split, select features, calibrate and assemble one writer's model.

    Deterministic given the seed: the split draws and the weighting trials
    both derive from it.  ``created_at`` is an optional provenance stamp;
    it defaults to absent so identical runs serialize identically.
    """
    if isinstance(category, str):
        category = ProtocolCategory.parse(category)
    if selection_config is None:
        selection_config = FeatureSelectionConfig()
    if grid is None:
        grid = GridSpec()

    try:
        split = split_protocol(
            dataset,
            writer_id,
            category,
            validation_count=validation_count,
            seed=seed,
            pool_per_writer=pool_per_writer,
        )
    except SigverifyError as exc:
        raise _stage("protocol-split", exc) from exc

    train = feature_matrix(split.train_genuine)
    if selection_config.weighting.seed is None:
        selection_config = replace(
            selection_config,
            weighting=replace(selection_config.weighting, seed=seed),
        )
    try:
        if train.shape[0] >= 2:
            fs = select_writer_features(train, selection_config)
        else:
            fs = _degenerate_selection(
                dataset.feature_count, selection_config.retention_ratio
            )
    except SigverifyError as exc:
        raise _stage("feature-selection", exc) from exc

    try:
        result, model = calibrate_writer(
            train,
            fs,
            feature_matrix(split.validation_genuine),
            feature_matrix(split.impostor_calibration_pool),
            grid,
            writer_id,
        )
    except SigverifyError as exc:
        raise _stage("calibration", exc) from exc

    provenance = Provenance(
        dataset_name=dataset.name,
        category=str(category),
        seed=seed,
        config={
            "mom_constant": selection_config.mom_constant,
            "dbscan_eps": selection_config.dbscan_eps,
            "dbscan_min_pts": selection_config.dbscan_min_pts,
            "retention_ratio": selection_config.retention_ratio,
            "cluster_count": selection_config.weighting.cluster_count,
            "minkowski_exponent": selection_config.weighting.minkowski_exponent,
            "trials": selection_config.weighting.trials,
            "weighting_seed": selection_config.weighting.seed,
            "eta_values": list(grid.eta_values),
            "alpha_values": list(grid.alpha_values),
            "validation_count": validation_count,
            "pool_per_writer": pool_per_writer,
        },
        created_at=created_at,
    )
    return WriterModel(
        writer_id=writer_id,
        selection=fs,
        interval_model=model,
        eta=result.eta,
        alpha=result.alpha,
        theta=result.theta,
        provenance=provenance,
    )


def verify_signature(test, model: WriterModel) -> Decision:
    """Project a test signature onto the writer's features and decide.

    ``test`` is a :class:`SignatureSample` or a full-width feature vector.
    Performs exactly ``|FS|`` membership evaluations.
    """
    features = getattr(test, "features", test)
    vector = np.asarray(features, dtype=float).ravel()
    idx = model.selection.selected_indices
    if vector.size <= int(idx.max()):
        raise DimensionError(
            f"test vector has {vector.size} features but the model selects "
            f"index {int(idx.max())}"
        )
    projected = vector[idx]
    values = memberships(projected, model.interval_model)
    score = float(values.mean())
    verdict = "genuine" if score >= model.theta else "forgery"
    return Decision(
        writer_id=model.writer_id,
        verdict=verdict,
        score=score,
        threshold=model.theta,
        membership_evaluations=int(values.size),
    )


# ---------------------------------------------------------------------------
# model store


def _fstr(x: float) -> str:
    return repr(float(x))


def _flist(values) -> list[str]:
    return [_fstr(v) for v in np.asarray(values, dtype=float).ravel()]


def _ilist(values) -> list[int]:
    return [int(v) for v in np.asarray(values).ravel()]


def _selection_to_doc(fs: FeatureSelection) -> dict:
    return {
        "selected_indices": _ilist(fs.selected_indices),
        "weights": _flist(fs.weights),
        "mom_values": _flist(fs.mom_values),
        "surviving_cluster": _ilist(fs.surviving_cluster),
        "noise_fallback": bool(fs.noise_fallback),
    }


def _intervals_to_doc(model: IntervalModel) -> dict:
    return {
        "writer_id": model.writer_id,
        "eta": _fstr(model.eta),
        "features": [
            {
                "feature_index": int(model.feature_indices[i]),
                "mean": _fstr(model.means[i]),
                "std": _fstr(model.stds[i]),
                "lower": _fstr(model.lowers[i]),
                "upper": _fstr(model.uppers[i]),
            }
            for i in range(len(model))
        ],
    }


def _model_to_doc(model: WriterModel) -> dict:
    doc = {
        "writer_id": model.writer_id,
        "eta": _fstr(model.eta),
        "alpha": _fstr(model.alpha),
        "theta": _fstr(model.theta),
        "selection": _selection_to_doc(model.selection),
        "interval_model": _intervals_to_doc(model.interval_model),
        "provenance": {
            "dataset_name": model.provenance.dataset_name,
            "category": model.provenance.category,
            "seed": model.provenance.seed,
            "config": model.provenance.config,
        },
    }
    if model.provenance.created_at is not None:
        doc["provenance"]["created_at"] = model.provenance.created_at
    return doc


def _require(doc: dict, key: str, context: str):
    if key not in doc:
        raise StoreError(f"model store missing field '{key}' in {context}")
    return doc[key]


def _float_field(doc: dict, key: str, context: str) -> float:
    raw = _require(doc, key, context)
    try:
        return float(raw)
    except (TypeError, ValueError) as exc:
        raise StoreError(
            f"model store field '{key}' in {context} is not a number: {raw!r}"
        ) from exc


def _selection_from_doc(doc: dict, context: str) -> FeatureSelection:
    return FeatureSelection(
        selected_indices=np.asarray(
            _require(doc, "selected_indices", context), dtype=int
        ),
        weights=np.asarray(
            [float(v) for v in _require(doc, "weights", context)], dtype=float
        ),
        mom_values=np.asarray(
            [float(v) for v in _require(doc, "mom_values", context)], dtype=float
        ),
        surviving_cluster=np.asarray(
            _require(doc, "surviving_cluster", context), dtype=int
        ),
        noise_fallback=bool(doc.get("noise_fallback", False)),
    )


def _intervals_from_doc(doc: dict, context: str) -> IntervalModel:
    feats = _require(doc, "features", context)
    idx, means, stds, lowers, uppers = [], [], [], [], []
    for i, f in enumerate(feats):
        fctx = f"{context}.features[{i}]"
        idx.append(int(_require(f, "feature_index", fctx)))
        means.append(_float_field(f, "mean", fctx))
        stds.append(_float_field(f, "std", fctx))
        lowers.append(_float_field(f, "lower", fctx))
        uppers.append(_float_field(f, "upper", fctx))
    return IntervalModel(
        writer_id=str(_require(doc, "writer_id", context)),
        eta=_float_field(doc, "eta", context),
        feature_indices=np.asarray(idx, dtype=int),
        means=np.asarray(means),
        stds=np.asarray(stds),
        lowers=np.asarray(lowers),
        uppers=np.asarray(uppers),
    )


def _model_from_doc(doc: dict) -> WriterModel:
    writer_id = str(_require(doc, "writer_id", "model"))
    context = f"model '{writer_id}'"
    prov_doc = _require(doc, "provenance", context)
    provenance = Provenance(
        dataset_name=str(prov_doc.get("dataset_name", "")),
        category=str(prov_doc.get("category", "")),
        seed=int(prov_doc.get("seed", 0)),
        config=dict(prov_doc.get("config", {})),
        created_at=prov_doc.get("created_at"),
    )
    return WriterModel(
        writer_id=writer_id,
        selection=_selection_from_doc(_require(doc, "selection", context), context),
        interval_model=_intervals_from_doc(
            _require(doc, "interval_model", context), context
        ),
        eta=_float_field(doc, "eta", context),
        alpha=_float_field(doc, "alpha", context),
        theta=_float_field(doc, "theta", context),
        provenance=provenance,
    )


def save_models(models, path) -> None:
    """Atomically write the model store (temp file + rename)."""
    path = Path(path)
    doc = {
        "schema_version": STORE_SCHEMA_VERSION,
        "models": [_model_to_doc(m) for m in models],
    }
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    os.replace(tmp, path)


def load_models(path) -> list[WriterModel]:
    """Load and validate a model store; errors name the offending field."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise StoreError(f"cannot read model store {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise StoreError(f"model store {path} is not valid JSON: {exc}") from exc
    version = _require(doc, "schema_version", "store")
    if version != STORE_SCHEMA_VERSION:
        raise StoreError(
            f"model store field 'schema_version' is {version}, "
            f"expected {STORE_SCHEMA_VERSION}"
        )
    return [_model_from_doc(m) for m in _require(doc, "models", "store")]


def find_model(models, writer_id: str) -> WriterModel:
    """Look up a writer in a loaded store; unknown ids are an error."""
    for model in models:
        if model.writer_id == writer_id:
            return model
    raise StoreError(f"writer '{writer_id}' not found in model store")
