"""Matplotlib rendering of benchmark reports.

One EER bar chart across categories, plus per-category figures: the
FAR/FRR threshold sweep behind the pooled EER, and per-writer acceptance
rates (TAR for genuine attempts, FAR for impostor attempts).
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return path


def render_eer_bars(report, path: Path) -> Path:
    cats = [s.category for s in report.categories]
    eers = [s.pooled_eer for s in report.categories]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.bar(cats, eers, color="#4878a8")
    ax.set_xlabel("category")
    ax.set_ylabel("pooled EER (fraction)")
    ax.set_title(f"{report.dataset_name}: equal error rate by category")
    ax.set_ylim(bottom=0)
    ax.grid(axis="y", alpha=0.3)
    return _save(fig, path)


def render_roc(summary, dataset_name: str, path: Path) -> Path:
    thresholds = [p[0] for p in summary.roc]
    far = [p[1] for p in summary.roc]
    frr = [p[2] for p in summary.roc]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(thresholds, far, label="FAR", color="#a84848")
    ax.plot(thresholds, frr, label="FRR", color="#4878a8")
    ax.axvline(
        summary.pooled_eer_threshold, color="gray", linestyle="--", linewidth=1
    )
    ax.axhline(summary.pooled_eer, color="gray", linestyle=":", linewidth=1)
    ax.set_xlabel("threshold")
    ax.set_ylabel("error rate (fraction)")
    ax.set_title(
        f"{dataset_name} {summary.category}: "
        f"EER = {summary.pooled_eer:.4f}"
    )
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, path)


def render_writer_errors(cells, category: str, dataset_name: str, path: Path) -> Path:
    evaluated = [c for c in cells if c.category == category and not c.skipped]
    labels = [c.writer_id for c in evaluated]
    tar = [1.0 - c.frr for c in evaluated]
    far = [c.far for c in evaluated]
    x = range(len(evaluated))
    fig, ax = plt.subplots(figsize=(max(6, 0.3 * len(evaluated)), 4))
    ax.plot(x, tar, "o-", label="TAR (genuine accepted)", color="#4878a8",
            markersize=3)
    ax.plot(x, far, "s-", label="FAR (impostor accepted)", color="#a84848",
            markersize=3)
    ax.set_xticks(list(x))
    ax.set_xticklabels(labels, rotation=90, fontsize=6)
    ax.set_xlabel("writer")
    ax.set_ylabel("rate (fraction)")
    ax.set_ylim(-0.05, 1.05)
    ax.set_title(f"{dataset_name} {category}: per-writer acceptance")
    ax.legend()
    ax.grid(alpha=0.3)
    return _save(fig, path)


def render_figures(report, output_dir: Path) -> list[Path]:
    """Render all benchmark figures into the output directory."""
    out = Path(output_dir)
    written = [render_eer_bars(report, out / "eer_by_category.png")]
    for summary in report.categories:
        if summary.roc:
            written.append(
                render_roc(
                    summary,
                    report.dataset_name,
                    out / f"roc_{summary.category}.png",
                )
            )
        if summary.writers_evaluated:
            written.append(
                render_writer_errors(
                    report.cells,
                    summary.category,
                    report.dataset_name,
                    out / f"writer_errors_{summary.category}.png",
                )
            )
    return written
