"""Evaluation report writers: delimited tables mirroring the per-class
metric layout, a confusion-matrix file, and rendered figures."""

from __future__ import annotations

from pathlib import Path
from typing import List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .evaluate import EvalReport

REPORT_HEADER = ["Clase", "Imágenes", "Instancias", "Box(P)", "R", "mAP50",
                 "mAP50-95"]


def report_table(report: EvalReport, sep: str = "\t") -> str:
    lines = [sep.join(REPORT_HEADER)]
    for row in report.rows():
        lines.append(sep.join([
            row.name, str(row.images), str(row.instances),
            f"{row.precision:.6f}", f"{row.recall:.6f}",
            f"{row.ap50:.6f}", f"{row.ap50_95:.6f}",
        ]))
    return "\n".join(lines) + "\n"


def confusion_table(report: EvalReport, sep: str = "\t") -> str:
    names = report.class_map.names + ["background"]
    lines = [sep.join(["pred\\true"] + names)]
    for i, row_name in enumerate(names):
        vals = [f"{v:.6f}" for v in report.confusion[i]]
        lines.append(sep.join([row_name] + vals))
    return "\n".join(lines) + "\n"


def render_confusion_figure(report: EvalReport, path: Path) -> None:
    names = report.class_map.names + ["background"]
    n = len(names)
    fig, ax = plt.subplots(figsize=(1.0 + 0.9 * n, 1.0 + 0.8 * n))
    im = ax.imshow(report.confusion, cmap="Blues", vmin=0.0, vmax=1.0)
    ax.set_xticks(range(n), names, rotation=45, ha="right")
    ax.set_yticks(range(n), names)
    ax.set_xlabel("true class")
    ax.set_ylabel("predicted class")
    for i in range(n):
        for j in range(n):
            v = report.confusion[i, j]
            if v > 0:
                ax.text(j, i, f"{v:.2f}", ha="center", va="center",
                        color="white" if v > 0.5 else "black", fontsize=8)
    fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_metrics_figure(report: EvalReport, path: Path) -> None:
    rows = report.rows()
    labels = [r.name for r in rows]
    x = np.arange(len(rows))
    width = 0.2
    fig, ax = plt.subplots(figsize=(1.5 + 1.2 * len(rows), 4.0))
    for k, (attr, label) in enumerate([
        ("precision", "P"), ("recall", "R"),
        ("ap50", "mAP50"), ("ap50_95", "mAP50-95"),
    ]):
        ax.bar(x + (k - 1.5) * width, [getattr(r, attr) for r in rows],
               width, label=label)
    ax.set_xticks(x, labels, rotation=30, ha="right")
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("metric value")
    ax.legend(ncol=4, fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def write_report(report: EvalReport, out_dir: Path, sep: str = "\t") -> List[Path]:
    """Write the metric table, confusion matrix, and figures; returns the
    created paths."""
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = []
    p = out_dir / "report.tsv"
    p.write_text(report_table(report, sep), encoding="utf-8")
    paths.append(p)
    p = out_dir / "confusion.tsv"
    p.write_text(confusion_table(report, sep), encoding="utf-8")
    paths.append(p)
    p = out_dir / "confusion.png"
    render_confusion_figure(report, p)
    paths.append(p)
    p = out_dir / "metrics.png"
    render_metrics_figure(report, p)
    paths.append(p)
    return paths
