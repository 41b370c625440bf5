"""Static figures written next to the CSV/JSON outputs."""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

if TYPE_CHECKING:
    from .fairness import FairnessReport
    from .toy import ToyResult

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
    "savefig.bbox": "tight",
}
GROUP_COLORS = ("#4C72B0", "#DD8452", "#55A868", "#C44E52", "#8172B3", "#937860")


def _figsize(scale: float = 1.0, ratio: float = 0.45) -> tuple[float, float]:
    width = 7.0 * scale
    return width, width * ratio


def toy_figure(result: ToyResult, path: str | Path) -> Path:
    """GPI_TV and GPI_W1 per estimator for both groups, one panel each."""
    path = Path(path)
    estimators = list(result.config.estimators)
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, 2, figsize=_figsize())
        pos = np.arange(len(estimators))
        for ax, key, title in zip(axes, ("gpi_tv", "gpi_w1"), ("total variation", "Wasserstein-1")):
            for g, offset in ((0, -0.2), (1, 0.2)):
                vals = [getattr(result.cell(e, g), key) for e in estimators]
                ax.bar(pos + offset, vals, width=0.4, color=GROUP_COLORS[g], label=f"a={g}")
            ax.set_xticks(pos)
            ax.set_xticklabels(estimators)
            ax.set_title(f"GPI, {title}")
            ax.set_ylabel("GPI")
        axes[0].legend(frameon=False)
        fig.savefig(path)
        plt.close(fig)
    return path


def report_figure(report: FairnessReport, path: str | Path) -> Path:
    """One bar panel per GPI divergence, groups side by side."""
    path = Path(path)
    metrics = list(report.disparity)
    groups = list(report.per_group)
    with plt.rc_context(STYLE):
        n = max(1, len(metrics))
        fig, axes = plt.subplots(1, n, figsize=_figsize(min(1.0, 0.35 * n + 0.3)), squeeze=False)
        for ax, m in zip(axes[0], metrics):
            vals = [report.per_group[g].gpi[m] for g in groups]
            colors = [GROUP_COLORS[i % len(GROUP_COLORS)] for i in range(len(groups))]
            ax.bar(range(len(groups)), vals, color=colors)
            ax.set_xticks(range(len(groups)))
            ax.set_xticklabels(groups, rotation=30, ha="right")
            d = report.disparity[m]
            ax.set_title(f"GPI {m} (gap {d.gap:.3g})")
        fig.savefig(path)
        plt.close(fig)
    return path
