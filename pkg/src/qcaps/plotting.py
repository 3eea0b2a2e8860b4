"""Figures for reports: weight distributions and search-tree profiles."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "savefig.dpi": 150,
}


def _bars(ax, pairs, color="#3b6ea5"):
    xs = [w for w, _ in pairs]
    ys = [c for _, c in pairs]
    ax.bar(xs, ys, width=1.4, color=color)
    for x, y in zip(xs, ys):
        ax.annotate(str(y), (x, y), ha="center", va="bottom", fontsize=7, xytext=(0, 1), textcoords="offset points")
    ax.set_xticks(xs)


def plot_weight_distribution(pairs, path, title: str | None = None) -> str:
    """Bar chart of [[weight, count], ...]; returns the path written."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 2.8))
        _bars(ax, pairs)
        ax.set_xlabel("codeword weight")
        ax.set_ylabel("count")
        if title:
            ax.set_title(title, fontsize=9)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return str(path)


def plot_weight_grid(items, path, ncols: int = 3) -> str:
    """One small panel per (name, pairs)."""
    items = list(items)
    nrows = max(1, -(-len(items) // ncols))
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(nrows, ncols, figsize=(3.0 * ncols, 2.1 * nrows), squeeze=False)
        for ax, (name, pairs) in zip(axes.flat, items):
            _bars(ax, pairs)
            ax.set_title(name, fontsize=8)
            ax.tick_params(labelsize=6)
        for ax in list(axes.flat)[len(items):]:
            ax.axis("off")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return str(path)


def plot_depth_profile(per_depth: dict, path, title: str | None = None) -> str:
    """Nodes visited per cap size (log scale)."""
    depths = sorted(int(k) for k in per_depth)
    counts = [per_depth[k] if k in per_depth else per_depth[str(k)] for k in depths]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 2.8))
        ax.plot(depths, counts, marker="o", color="#a5533b")
        ax.set_yscale("log")
        ax.set_xlabel("cap size")
        ax.set_ylabel("nodes")
        if title:
            ax.set_title(title, fontsize=9)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return str(path)
