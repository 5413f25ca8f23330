"""Signature feature datasets: CSV I/O, protocol splits, synthetic data.

Dataset CSV format: header ``writer_id,sample_id,label,f1,...,fm``; label is
``genuine`` or ``forgery``; ids match ``[A-Za-z0-9_-]+``; features are
decimal text parsed to binary64; UTF-8 with LF line endings.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DatasetError, ProtocolError

_ID_RE = re.compile(r"^[A-Za-z0-9_-]+$")
_LABELS = ("genuine", "forgery")


@dataclass
class SignatureSample:
    """One signature as a fixed-length feature vector."""

    sample_id: str
    label: str  # "genuine" or "forgery"
    features: np.ndarray


@dataclass
class WriterRecord:
    """All samples of one writer, in file order."""

    writer_id: str
    genuine: list[SignatureSample]
    forgeries: list[SignatureSample]


@dataclass
class FeatureDataset:
    """A named collection of writers sharing one feature dimensionality."""

    name: str
    feature_count: int
    writers: list[WriterRecord]

    def writer_ids(self) -> list[str]:
        return [w.writer_id for w in self.writers]

    def get_writer(self, writer_id: str) -> WriterRecord:
        for w in self.writers:
            if w.writer_id == writer_id:
                return w
        raise ProtocolError(f"writer '{writer_id}' not found in dataset {self.name!r}")

    def sample_count(self) -> int:
        return sum(len(w.genuine) + len(w.forgeries) for w in self.writers)


@dataclass(frozen=True)
class ProtocolCategory:
    """Evaluation category: skilled (S) or random (R) forgeries, n training."""

    kind: str  # "S" or "R"
    train_count: int

    def __post_init__(self):
        if self.kind not in ("S", "R"):
            raise ValueError(f"category kind must be 'S' or 'R', got {self.kind!r}")
        if self.train_count < 1:
            raise ValueError(f"training count must be >= 1, got {self.train_count}")

    def __str__(self) -> str:
        return f"{self.kind}_{self.train_count:02d}"

    @classmethod
    def parse(cls, text: str) -> "ProtocolCategory":
        m = re.fullmatch(r"([SR])_?(\d+)", text.strip())
        if not m:
            raise ValueError(
                f"bad category {text!r}; expected e.g. S_05, S_20, R_01"
            )
        return cls(kind=m.group(1), train_count=int(m.group(2)))


@dataclass
class ProtocolSplit:
    """Per-writer partition of samples into the evaluation protocol roles."""

    category: ProtocolCategory
    writer_id: str
    train_genuine: list[SignatureSample]
    validation_genuine: list[SignatureSample]
    test_genuine: list[SignatureSample]
    test_impostor: list[SignatureSample]
    impostor_calibration_pool: list[SignatureSample]


@dataclass
class SyntheticSpec:
    """Shape and separation knobs for a synthetic feature dataset.

    Genuine samples of each writer come from a per-writer Gaussian whose
    per-feature means are drawn once; forgeries come from the same Gaussian
    shifted by ``forgery_offset`` genuine-scales along a random sign pattern,
    so every feature moves by the full offset.
    """

    writers: int
    genuine_per_writer: int
    forgeries_per_writer: int
    feature_count: int
    genuine_scale: float = 1.0
    forgery_offset: float = 4.0  # in units of genuine_scale
    writer_spread: float = 10.0  # writer-mean std, in units of genuine_scale
    name: str = "synthetic"

    def __post_init__(self):
        if self.writers < 1:
            raise DatasetError(f"writers must be >= 1, got {self.writers}")
        if self.genuine_per_writer < 1:
            raise DatasetError(
                f"genuine_per_writer must be >= 1, got {self.genuine_per_writer}"
            )
        if self.forgeries_per_writer < 0:
            raise DatasetError(
                f"forgeries_per_writer must be >= 0, got {self.forgeries_per_writer}"
            )
        if self.feature_count < 1:
            raise DatasetError(
                f"feature_count must be >= 1, got {self.feature_count}"
            )
        if not self.genuine_scale > 0:
            raise DatasetError(
                f"genuine_scale must be > 0, got {self.genuine_scale}"
            )
        if self.forgery_offset < 0:
            raise DatasetError(
                f"forgery_offset must be >= 0, got {self.forgery_offset}"
            )
        if self.writer_spread < 0:
            raise DatasetError(
                f"writer_spread must be >= 0, got {self.writer_spread}"
            )


def _parse_header(header: str, path: Path) -> int:
    cols = header.rstrip("\n").split(",")
    if cols[:3] != ["writer_id", "sample_id", "label"] or len(cols) < 4:
        raise DatasetError(
            f"{path}: line 1: header must be 'writer_id,sample_id,label,f1,...,fm'"
        )
    expected = [f"f{i}" for i in range(1, len(cols) - 2)]
    if cols[3:] != expected:
        raise DatasetError(
            f"{path}: line 1: feature columns must be f1..f{len(cols) - 3}"
        )
    return len(cols) - 3


def load_feature_dataset(path) -> FeatureDataset:
    """Load and validate a dataset CSV; errors name the offending line."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read dataset file {path}: {exc}") from exc
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise DatasetError(f"{path}: empty file")

    m = _parse_header(lines[0], path)
    order: list[str] = []
    records: dict[str, WriterRecord] = {}
    seen: set[tuple[str, str]] = set()
    for lineno, line in enumerate(lines[1:], start=2):
        cols = line.split(",")
        if len(cols) != 3 + m:
            raise DatasetError(
                f"{path}: line {lineno}: expected {3 + m} columns, got {len(cols)}"
            )
        writer_id, sample_id, label = cols[0], cols[1], cols[2]
        if not _ID_RE.match(writer_id):
            raise DatasetError(f"{path}: line {lineno}: bad writer_id {writer_id!r}")
        if not _ID_RE.match(sample_id):
            raise DatasetError(f"{path}: line {lineno}: bad sample_id {sample_id!r}")
        if label not in _LABELS:
            raise DatasetError(
                f"{path}: line {lineno}: label must be genuine or forgery, "
                f"got {label!r}"
            )
        if (writer_id, sample_id) in seen:
            raise DatasetError(
                f"{path}: line {lineno}: duplicate sample "
                f"({writer_id}, {sample_id})"
            )
        seen.add((writer_id, sample_id))
        features = np.empty(m)
        for i, cell in enumerate(cols[3:]):
            try:
                value = float(cell)
            except ValueError:
                raise DatasetError(
                    f"{path}: line {lineno}: non-numeric value {cell!r} "
                    f"in column f{i + 1}"
                ) from None
            if not np.isfinite(value):
                raise DatasetError(
                    f"{path}: line {lineno}: non-finite value {cell!r} "
                    f"in column f{i + 1}"
                )
            features[i] = value
        if writer_id not in records:
            records[writer_id] = WriterRecord(writer_id, [], [])
            order.append(writer_id)
        sample = SignatureSample(sample_id=sample_id, label=label, features=features)
        if label == "genuine":
            records[writer_id].genuine.append(sample)
        else:
            records[writer_id].forgeries.append(sample)

    return FeatureDataset(
        name=path.stem,
        feature_count=m,
        writers=[records[w] for w in order],
    )


def write_feature_dataset(dataset: FeatureDataset, path) -> None:
    """Write the dataset CSV; feature values round-trip bit-exactly."""
    path = Path(path)
    m = dataset.feature_count
    lines = ["writer_id,sample_id,label," + ",".join(f"f{i}" for i in range(1, m + 1))]
    for writer in dataset.writers:
        for sample in list(writer.genuine) + list(writer.forgeries):
            values = ",".join(repr(float(v)) for v in sample.features)
            lines.append(f"{writer.writer_id},{sample.sample_id},{sample.label},{values}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")


def load_probe(path) -> tuple[str, SignatureSample]:
    """Read a single-signature probe file: the dataset format minus label.

    Returns the claimed writer id together with the sample.
    """
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise DatasetError(f"cannot read probe file {path}: {exc}") from exc
    lines = [ln for ln in text.split("\n") if ln != ""]
    if len(lines) != 2:
        raise DatasetError(
            f"{path}: probe file must have a header and exactly one row"
        )
    cols = lines[0].split(",")
    if cols[:2] != ["writer_id", "sample_id"] or len(cols) < 3:
        raise DatasetError(
            f"{path}: line 1: header must be 'writer_id,sample_id,f1,...,fm'"
        )
    m = len(cols) - 2
    row = lines[1].split(",")
    if len(row) != 2 + m:
        raise DatasetError(
            f"{path}: line 2: expected {2 + m} columns, got {len(row)}"
        )
    writer_id, sample_id = row[0], row[1]
    if not _ID_RE.match(writer_id) or not _ID_RE.match(sample_id):
        raise DatasetError(f"{path}: line 2: bad writer_id/sample_id")
    features = np.empty(m)
    for i, cell in enumerate(row[2:]):
        try:
            value = float(cell)
        except ValueError:
            raise DatasetError(
                f"{path}: line 2: non-numeric value {cell!r} in column f{i + 1}"
            ) from None
        if not np.isfinite(value):
            raise DatasetError(
                f"{path}: line 2: non-finite value {cell!r} in column f{i + 1}"
            )
        features[i] = value
    # the probe's label is what verification decides, not an input
    return writer_id, SignatureSample(
        sample_id=sample_id, label="genuine", features=features
    )


def split_protocol(
    dataset: FeatureDataset,
    writer_id: str,
    category: ProtocolCategory | str,
    validation_count: int | None = None,
    seed: int = 0,
    pool_per_writer: int = 1,
) -> ProtocolSplit:
    """Partition one writer's samples for a protocol category.

    Training and validation genuines follow file order (first ``n``, then
    ``validation_count``); the rest are test genuines.  Skilled categories
    take the writer's own forgeries as test impostors; random categories draw
    one genuine sample from every other writer (seeded).  The calibration
    pool draws ``pool_per_writer`` further genuine samples per other writer,
    avoiding the random-category test impostors where the donor has spares.
    """
    if isinstance(category, str):
        category = ProtocolCategory.parse(category)
    writer = dataset.get_writer(writer_id)
    n = category.train_count
    g = len(writer.genuine)
    if validation_count is None:
        validation_count = max((g - n) // 2, 0)
    if validation_count < 0:
        raise ProtocolError(f"validation_count must be >= 0, got {validation_count}")
    need = n + validation_count + 1
    if g < need:
        raise ProtocolError(
            f"writer {writer_id}: category {category} needs {need} genuine "
            f"samples ({n} train + {validation_count} validation + >=1 test), "
            f"found {g}"
        )
    if category.kind == "S" and not writer.forgeries:
        raise ProtocolError(
            f"writer {writer_id}: category {category} needs at least 1 skilled "
            f"forgery, found 0"
        )

    train = list(writer.genuine[:n])
    validation = list(writer.genuine[n:n + validation_count])
    test_genuine = list(writer.genuine[n + validation_count:])

    rng = np.random.default_rng(seed)
    test_impostor: list[SignatureSample] = []
    pool: list[SignatureSample] = []
    for other in dataset.writers:
        if other.writer_id == writer_id or not other.genuine:
            continue
        avail = len(other.genuine)
        taken = None
        if category.kind == "R":
            taken = int(rng.integers(avail))
            test_impostor.append(other.genuine[taken])
        candidates = [i for i in range(avail) if i != taken]
        if not candidates:  # donor has a single genuine sample
            candidates = list(range(avail))
        k = min(pool_per_writer, len(candidates))
        if k > 0:
            picks = rng.choice(len(candidates), size=k, replace=False)
            pool.extend(other.genuine[candidates[int(i)]] for i in np.sort(picks))
    if category.kind == "S":
        test_impostor = list(writer.forgeries)

    return ProtocolSplit(
        category=category,
        writer_id=writer_id,
        train_genuine=train,
        validation_genuine=validation,
        test_genuine=test_genuine,
        test_impostor=test_impostor,
        impostor_calibration_pool=pool,
    )


def generate_synthetic(spec: SyntheticSpec, seed: int = 0) -> FeatureDataset:
    """Deterministically synthesize a dataset with a known class separation."""
    rng = np.random.default_rng(seed)
    ww = max(2, len(str(spec.writers)))
    sw = max(2, len(str(max(spec.genuine_per_writer, spec.forgeries_per_writer))))
    sigma = spec.genuine_scale
    writers = []
    for j in range(spec.writers):
        mu = rng.normal(0.0, spec.writer_spread * sigma, spec.feature_count)
        signs = rng.choice(np.array([-1.0, 1.0]), size=spec.feature_count)
        genuine_rows = rng.normal(
            mu, sigma, (spec.genuine_per_writer, spec.feature_count)
        )
        forged_mu = mu + spec.forgery_offset * sigma * signs
        forgery_rows = rng.normal(
            forged_mu, sigma, (spec.forgeries_per_writer, spec.feature_count)
        )
        wid = f"w{j + 1:0{ww}d}"
        writers.append(
            WriterRecord(
                writer_id=wid,
                genuine=[
                    SignatureSample(f"g{i + 1:0{sw}d}", "genuine", genuine_rows[i])
                    for i in range(spec.genuine_per_writer)
                ],
                forgeries=[
                    SignatureSample(f"f{i + 1:0{sw}d}", "forgery", forgery_rows[i])
                    for i in range(spec.forgeries_per_writer)
                ],
            )
        )
    return FeatureDataset(
        name=spec.name, feature_count=spec.feature_count, writers=writers
    )


def feature_matrix(samples: list[SignatureSample]) -> np.ndarray:
    """Stack sample feature vectors into an (n, m) matrix."""
    if not samples:
        return np.empty((0, 0))
    return np.vstack([s.features for s in samples])
