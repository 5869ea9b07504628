"""
Result tables and figures.

Tables are TSV and Markdown; figures are PNG, drawn with matplotlib's
Agg backend so no display is needed.
"""

from __future__ import annotations

import csv
import logging
from pathlib import Path
from typing import List, Optional, Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from lung_attr_seg.evaluation.evaluate import EvalResult  # noqa: E402
from lung_attr_seg.evaluation.sweep import SweepTable  # noqa: E402

logger = logging.getLogger(__name__)

METRIC_COLUMNS = ["dice", "jaccard", "n_samples"]


def _fmt(val) -> str:
    if val is None:
        return ""
    if isinstance(val, float):
        return f"{val:.6f}"
    return str(val)


def write_metrics_tsv(result: EvalResult, filepath: str | Path, per_sample: bool = True) -> None:
    """Summary row, then one row per sample when available."""
    filepath = Path(filepath)
    with open(filepath, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, delimiter="\t", lineterminator="\n")
        writer.writerow(["sample_id", "dice", "jaccard"])
        writer.writerow(["mean", _fmt(result.dice), _fmt(result.jaccard)])
        if per_sample and result.per_sample:
            for s in result.per_sample:
                writer.writerow([s.sample_id, _fmt(s.dice), _fmt(s.jaccard)])


def read_metrics_tsv(filepath: str | Path) -> dict:
    with open(filepath, newline="", encoding="utf-8") as f:
        rows = list(csv.DictReader(f, delimiter="\t"))
    mean = rows[0]
    return {
        "dice": float(mean["dice"]),
        "jaccard": float(mean["jaccard"]),
        "per_sample": {r["sample_id"]: (float(r["dice"]), float(r["jaccard"])) for r in rows[1:]},
    }


def _sweep_header(table: SweepTable) -> List[str]:
    return ["label", *table.keys, "dice", "jaccard", "best_dice", "best_jaccard", "best_epoch", "trainable_parameters"]


def _sweep_rows(table: SweepTable) -> List[List[str]]:
    rows = []
    for r in table.rows:
        d = r.to_dict()
        rows.append(
            [r.label, *(r.values.get(k, "") for k in table.keys)]
            + [_fmt(d[c]) for c in ("dice", "jaccard", "best_dice", "best_jaccard", "best_epoch", "trainable_parameters")]
        )
    return rows


def write_sweep_tsv(table: SweepTable, filepath: str | Path) -> None:
    with open(filepath, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, delimiter="\t", lineterminator="\n")
        writer.writerow(_sweep_header(table))
        writer.writerows(_sweep_rows(table))


def sweep_markdown(table: SweepTable) -> str:
    header = _sweep_header(table)
    lines = [
        f"Mode: {table.mode}",
        "",
        "| " + " | ".join(header) + " |",
        "|" + "|".join("---" for _ in header) + "|",
    ]
    for row in _sweep_rows(table):
        lines.append("| " + " | ".join(row) + " |")
    return "\n".join(lines) + "\n"


def plot_sweep(table: SweepTable, filepath: str | Path, key: Optional[str] = None) -> Path:
    """Dice and Jaccard against the swept value (or the row label)."""
    key = key or (table.keys[0] if len(table.keys) == 1 else None)
    labels = [r.values.get(key, r.label) if key else r.label for r in table.rows]
    try:
        xs = [float(v) for v in labels]
        ticks = None
    except ValueError:
        xs = list(range(len(labels)))
        ticks = labels

    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(xs, [r.result.dice for r in table.rows], "o-", label="Dice")
    ax.plot(xs, [r.result.jaccard for r in table.rows], "s--", label="Jaccard")
    if ticks is not None:
        ax.set_xticks(xs)
        ax.set_xticklabels(ticks, rotation=30, ha="right")
    ax.set_xlabel(key or "configuration")
    ax.set_ylabel("score")
    ax.set_ylim(0.0, 1.0)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(filepath, dpi=100)
    plt.close(fig)
    return Path(filepath)


def plot_history(history: Sequence[dict], filepath: str | Path) -> Path:
    """Loss terms per epoch, with evaluation Dice on a second axis."""
    epochs = [h["epoch"] for h in history]
    fig, ax = plt.subplots(figsize=(6, 4))
    for term in ("l_total", "l_c", "l_a", "l_st"):
        ax.plot(epochs, [h[term] for h in history], label=term)
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    evaluated = [(h["epoch"], h["eval"]["dice"]) for h in history if "eval" in h]
    if evaluated:
        ax2 = ax.twinx()
        ax2.plot(*zip(*evaluated), "k:o", label="eval Dice")
        ax2.set_ylabel("Dice")
        ax2.set_ylim(0.0, 1.0)
    ax.legend(loc="upper right")
    fig.tight_layout()
    fig.savefig(filepath, dpi=100)
    plt.close(fig)
    return Path(filepath)


def plot_overlay(
    image: np.ndarray,
    filepath: str | Path,
    prediction: Optional[np.ndarray] = None,
    gt: Optional[np.ndarray] = None,
    coarse: Optional[np.ndarray] = None,
    title: str = "",
) -> Path:
    """Image with contours of ground truth, prediction and coarse mask."""
    fig, ax = plt.subplots(figsize=(4, 4))
    ax.imshow(np.squeeze(image), cmap="gray", vmin=0.0, vmax=1.0)
    for mask, color, name in ((gt, "lime", "ground truth"), (prediction, "red", "prediction"), (coarse, "yellow", "coarse")):
        if mask is not None and np.any(mask):
            ax.contour(np.squeeze(mask).astype(float), levels=[0.5], colors=color, linewidths=1)
            ax.plot([], [], color=color, label=name)
    if ax.get_legend_handles_labels()[0]:
        ax.legend(loc="lower right", fontsize=7)
    ax.set_title(title, fontsize=8)
    ax.axis("off")
    fig.tight_layout()
    fig.savefig(filepath, dpi=100)
    plt.close(fig)
    return Path(filepath)
