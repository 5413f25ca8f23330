"""Dataset-wide evaluation harness.

Runs enrollment and verification for every (seed, category, writer) cell,
then aggregates two views per category: decision-level mean FAR/FRR at each
writer's own threshold, and a score-pooled equal error rate over all
writers' raw test scores.  Writers that cannot satisfy a category are
recorded as skipped, never fatal.

Report files: ``report.txt`` (aligned table), ``report.csv``,
``per_writer.csv``, ``roc_<category>.csv`` per category, and matplotlib
figures next to them unless disabled.  CSV content is byte-identical for
identical specs (floats are written with ``repr``; wall-clock timings stay
out of the CSVs).
"""

from __future__ import annotations

import os
import time
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .calibration import GridSpec, ScoreSet, compute_eer
from .dataset import (
    FeatureDataset,
    ProtocolCategory,
    load_feature_dataset,
    split_protocol,
)
from .errors import SigverifyError
from .features import FeatureSelectionConfig
from .verifier import enroll_writer, verify_signature

DEFAULT_CATEGORIES = ("S_01", "S_05", "R_01", "R_05")


@dataclass
class BenchmarkSpec:
    """What to evaluate and how; seeds make the whole run reproducible."""

    dataset_path: str | Path
    categories: list[str] | None = None  # None -> feasible defaults
    selection: FeatureSelectionConfig = field(default_factory=FeatureSelectionConfig)
    grid: GridSpec = field(default_factory=GridSpec)
    seeds: list[int] = field(default_factory=lambda: [0])
    output_dir: str | Path | None = None
    validation_count: int | None = None
    pool_per_writer: int = 1
    figures: bool = True


@dataclass
class WriterCell:
    """One (seed, category, writer) evaluation."""

    category: str
    writer_id: str
    seed: int
    skipped: bool = False
    reason: str = ""
    far: float = float("nan")
    frr: float = float("nan")
    theta: float = float("nan")
    eta: float = float("nan")
    alpha: float = float("nan")
    fs_size: int = 0
    genuine_scores: list[float] = field(default_factory=list)
    impostor_scores: list[float] = field(default_factory=list)
    genuine_accepted: int = 0
    impostor_accepted: int = 0

    @property
    def n_test_genuine(self) -> int:
        return len(self.genuine_scores)

    @property
    def n_test_impostor(self) -> int:
        return len(self.impostor_scores)


@dataclass
class CategorySummary:
    """Aggregate metrics for one category over all writers and seeds."""

    category: str
    pooled_eer: float
    pooled_eer_threshold: float
    mean_far: float
    mean_frr: float
    writers_evaluated: int
    writers_skipped: int
    roc: list[tuple[float, float, float]]


@dataclass
class EvaluationReport:
    dataset_name: str
    seeds: list[int]
    categories: list[CategorySummary]
    cells: list[WriterCell]
    complete: bool
    runtime_seconds: float


def _cell_seed(seed: int, category: str, writer_id: str) -> int:
    return zlib.crc32(f"{seed}|{category}|{writer_id}".encode()) & 0x7FFFFFFF


def default_categories(dataset: FeatureDataset) -> list[str]:
    """The standard category set, filtered to what the dataset can support."""
    feasible = []
    for name in DEFAULT_CATEGORIES:
        cat = ProtocolCategory.parse(name)
        for writer in dataset.writers:
            if len(writer.genuine) < cat.train_count + 2:
                continue
            if cat.kind == "S" and not writer.forgeries:
                continue
            if cat.kind == "R" and len(dataset.writers) < 2:
                continue
            feasible.append(name)
            break
    return feasible


def _evaluate_cell(
    dataset: FeatureDataset,
    writer_id: str,
    category: str,
    spec: BenchmarkSpec,
    seed: int,
) -> WriterCell:
    cell = WriterCell(category=category, writer_id=writer_id, seed=seed)
    try:
        cell_seed = _cell_seed(seed, category, writer_id)
        model = enroll_writer(
            dataset,
            writer_id,
            category,
            selection_config=spec.selection,
            grid=spec.grid,
            seed=cell_seed,
            validation_count=spec.validation_count,
            pool_per_writer=spec.pool_per_writer,
        )
        split = split_protocol(
            dataset,
            writer_id,
            category,
            validation_count=spec.validation_count,
            seed=cell_seed,
            pool_per_writer=spec.pool_per_writer,
        )
        if not split.test_genuine or not split.test_impostor:
            raise SigverifyError(
                f"empty test partition (genuine {len(split.test_genuine)}, "
                f"impostor {len(split.test_impostor)})"
            )
        for sample in split.test_genuine:
            decision = verify_signature(sample, model)
            cell.genuine_scores.append(decision.score)
            cell.genuine_accepted += decision.verdict == "genuine"
        for sample in split.test_impostor:
            decision = verify_signature(sample, model)
            cell.impostor_scores.append(decision.score)
            cell.impostor_accepted += decision.verdict == "genuine"
        cell.far = cell.impostor_accepted / cell.n_test_impostor
        cell.frr = (cell.n_test_genuine - cell.genuine_accepted) / cell.n_test_genuine
        cell.theta = model.theta
        cell.eta = model.eta
        cell.alpha = model.alpha
        cell.fs_size = model.selection.size
    except SigverifyError as exc:
        cell.skipped = True
        cell.reason = str(exc)
    return cell


def run_benchmark(spec: BenchmarkSpec) -> EvaluationReport:
    """Evaluate every (seed, category, writer) cell and aggregate.

    Writes report files (and figures) when ``spec.output_dir`` is set.
    """
    start = time.perf_counter()
    dataset = load_feature_dataset(spec.dataset_path)
    categories = spec.categories or default_categories(dataset)

    cells: list[WriterCell] = []
    for seed in spec.seeds:
        for category in categories:
            for writer in dataset.writers:
                cells.append(
                    _evaluate_cell(dataset, writer.writer_id, category, spec, seed)
                )

    summaries = []
    for category in categories:
        evaluated = [
            c for c in cells if c.category == category and not c.skipped
        ]
        skipped = [c for c in cells if c.category == category and c.skipped]
        if evaluated:
            pooled = ScoreSet(
                np.concatenate([c.genuine_scores for c in evaluated]),
                np.concatenate([c.impostor_scores for c in evaluated]),
            )
            eer, eer_thr, roc = compute_eer(pooled)
            mean_far = float(np.mean([c.far for c in evaluated]))
            mean_frr = float(np.mean([c.frr for c in evaluated]))
        else:
            eer = eer_thr = mean_far = mean_frr = float("nan")
            roc = []
        summaries.append(
            CategorySummary(
                category=category,
                pooled_eer=eer,
                pooled_eer_threshold=eer_thr,
                mean_far=mean_far,
                mean_frr=mean_frr,
                writers_evaluated=len(evaluated),
                writers_skipped=len(skipped),
                roc=roc,
            )
        )

    report = EvaluationReport(
        dataset_name=dataset.name,
        seeds=list(spec.seeds),
        categories=summaries,
        cells=cells,
        complete=not any(c.skipped for c in cells),
        runtime_seconds=time.perf_counter() - start,
    )
    if spec.output_dir is not None:
        render_report(report, spec.output_dir, figures=spec.figures)
    return report


def _atomic_write(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8", newline="\n")
    os.replace(tmp, path)


def _text_table(report: EvaluationReport) -> str:
    header = ("category", "pooled_eer", "mean_far", "mean_frr", "writers", "skipped")
    rows = [header]
    for s in report.categories:
        rows.append(
            (
                s.category,
                f"{s.pooled_eer:.6f}",
                f"{s.mean_far:.6f}",
                f"{s.mean_frr:.6f}",
                str(s.writers_evaluated),
                str(s.writers_skipped),
            )
        )
    widths = [max(len(r[i]) for r in rows) for i in range(len(header))]
    lines = [
        f"signature verification benchmark: {report.dataset_name}",
        "all rates are fractions in [0, 1]",
        "",
    ]
    for r in rows:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip())
    lines.append("")
    lines.append(f"seeds: {','.join(str(s) for s in report.seeds)}")
    lines.append(f"complete: {'yes' if report.complete else 'no'}")
    skipped = [c for c in report.cells if c.skipped]
    for c in skipped:
        lines.append(f"skipped: {c.category} {c.writer_id} (seed {c.seed}): {c.reason}")
    lines.append(f"runtime: {report.runtime_seconds:.2f} s")
    return "\n".join(lines) + "\n"


def render_report(
    report: EvaluationReport,
    output_dir: str | Path,
    formats: tuple[str, ...] = ("text", "csv"),
    figures: bool = True,
) -> list[Path]:
    """Write the report files; returns the paths written."""
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: list[Path] = []

    if "text" in formats:
        path = out / "report.txt"
        _atomic_write(path, _text_table(report))
        written.append(path)

    if "csv" in formats:
        lines = [
            "category,pooled_eer,eer_threshold,mean_far,mean_frr,"
            "writers_evaluated,writers_skipped"
        ]
        for s in report.categories:
            lines.append(
                f"{s.category},{s.pooled_eer!r},{s.pooled_eer_threshold!r},"
                f"{s.mean_far!r},{s.mean_frr!r},"
                f"{s.writers_evaluated},{s.writers_skipped}"
            )
        path = out / "report.csv"
        _atomic_write(path, "\n".join(lines) + "\n")
        written.append(path)

        lines = ["category,writer_id,far,frr,theta,eta,alpha,fs_size"]
        for c in report.cells:
            if c.skipped:
                continue
            lines.append(
                f"{c.category},{c.writer_id},{c.far!r},{c.frr!r},"
                f"{c.theta!r},{c.eta!r},{c.alpha!r},{c.fs_size}"
            )
        path = out / "per_writer.csv"
        _atomic_write(path, "\n".join(lines) + "\n")
        written.append(path)

        for s in report.categories:
            lines = ["threshold,far,frr"]
            for threshold, far, frr in s.roc:
                lines.append(f"{threshold!r},{far!r},{frr!r}")
            path = out / f"roc_{s.category}.csv"
            _atomic_write(path, "\n".join(lines) + "\n")
            written.append(path)

    if figures:
        from . import figures as fig_mod

        written.extend(fig_mod.render_figures(report, out))
    return written
