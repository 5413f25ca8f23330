"""Writer-adaptive online signature verification.

Per-writer feature selection (robust dispersion, density clustering,
Minkowski-weighted feature weights), interval symbolic models scored with a
trapezoidal fuzzy similarity, EER-driven threshold calibration, and a
benchmark harness over skilled/random forgery protocols.
"""

from .benchmark import (
    BenchmarkSpec,
    CategorySummary,
    EvaluationReport,
    default_categories,
    render_report,
    run_benchmark,
)
from .calibration import (
    CalibrationResult,
    GridSpec,
    ScoreSet,
    calibrate_writer,
    compute_eer,
    compute_far_frr,
    decision_threshold,
)
from .dataset import (
    FeatureDataset,
    ProtocolCategory,
    ProtocolSplit,
    SignatureSample,
    SyntheticSpec,
    WriterRecord,
    feature_matrix,
    generate_synthetic,
    load_feature_dataset,
    load_probe,
    split_protocol,
    write_feature_dataset,
)
from .errors import (
    CalibrationError,
    DatasetError,
    DimensionError,
    DispersionError,
    MetricError,
    ModelError,
    ProtocolError,
    SigverifyError,
    StoreError,
)
from .features import (
    FeatureSelection,
    FeatureSelectionConfig,
    FeatureWeighting,
    WeightingConfig,
    cluster_features_by_mom,
    imwk_feature_weights,
    mom_dispersion,
    select_writer_features,
)
from .intervals import (
    IntervalFeature,
    IntervalModel,
    build_interval_model,
    feature_membership,
    fuzzy_similarity,
    memberships,
    similarity_scores,
)
from .verifier import (
    Decision,
    Provenance,
    WriterModel,
    enroll_writer,
    find_model,
    load_models,
    save_models,
    verify_signature,
)

__version__ = "0.1.0"
