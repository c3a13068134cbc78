"""Score-report persistence: delimited output plus rendered figures.

The CSV is the primary artifact; the figures give a quick visual read of
the same numbers (per-variable scores grouped by prior, and the posterior
stationarity probabilities).
"""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .dataio import write_csv
from .scoring import ScoreReport


def write_score_csv(report: ScoreReport, path: str) -> None:
    rows = []
    for row in report.rows:
        cells = [row.label, row.pr_stationary]
        cells += list(row.crps) + list(row.logs)
        cells += [row.es_all, row.es_subset, report.mode]
        rows.append(cells)
    write_csv(path, report.header(), rows)


def render_score_figures(report: ScoreReport, outdir: str, stem: str = "scores") -> list:
    """Render grouped-bar figures next to the CSV; returns written paths."""
    os.makedirs(outdir, exist_ok=True)
    labels = [row.label for row in report.rows]
    paths = []

    def grouped_bars(ax, values, group_names):
        nrows, ngroup = values.shape
        width = 0.8 / nrows
        offsets = (np.arange(nrows) - (nrows - 1) / 2) * width
        for i, row_label in enumerate(labels):
            ax.bar(np.arange(ngroup) + offsets[i], values[i], width, label=row_label)
        ax.set_xticks(np.arange(ngroup))
        ax.set_xticklabels(group_names)
        ax.legend(fontsize=8)

    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    crps = np.array([row.crps for row in report.rows])
    logs = np.array([row.logs for row in report.rows])
    grouped_bars(axes[0], crps, report.variables)
    axes[0].set_title("CRPS by variable (lower is better)")
    grouped_bars(axes[1], logs, report.variables)
    axes[1].set_title("log score by variable (lower is better)")
    fig.tight_layout()
    path = os.path.join(outdir, f"{stem}_pointwise.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    paths.append(path)

    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    x = np.arange(len(labels))
    es = np.array([[row.es_all, row.es_subset] for row in report.rows])
    axes[0].bar(x - 0.2, es[:, 0], 0.4, label="all variables")
    axes[0].bar(x + 0.2, es[:, 1], 0.4, label="subset")
    axes[0].set_xticks(x)
    axes[0].set_xticklabels(labels)
    axes[0].set_title("energy score (lower is better)")
    axes[0].legend(fontsize=8)
    axes[1].bar(x, [row.pr_stationary for row in report.rows], 0.5)
    axes[1].set_xticks(x)
    axes[1].set_xticklabels(labels)
    axes[1].set_ylim(0, 1.05)
    axes[1].set_title("posterior Pr(stationary)")
    fig.tight_layout()
    path = os.path.join(outdir, f"{stem}_joint.png")
    fig.savefig(path, dpi=120)
    plt.close(fig)
    paths.append(path)
    return paths
