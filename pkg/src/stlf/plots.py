"""Matplotlib figures written next to the CSV/JSON reports.

Every figure is drawn from numbers that are also written to CSV, so a figure
can always be regenerated from the report directory.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "savefig.dpi": 150,
}
# PNG metadata otherwise embeds the matplotlib version string only; keep it fixed
_META = {"Software": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, metadata=_META)
    plt.close(fig)


def forecast_figure(path, index, actual, forecasts: dict, title: str = "Test forecasts"):
    """Actual load against one or more forecast curves."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(7.0, 3.0))
        ax.plot(index, actual, color="black", lw=1.0, label="actual")
        for name, values in forecasts.items():
            ax.plot(index, values, lw=0.9, label=name)
        ax.set_xlabel("time index")
        ax.set_ylabel("load")
        ax.set_title(title)
        ax.legend(loc="upper right", ncol=2, frameon=False)
        _save(fig, path)


def components_figure(path, window, components):
    comps = np.atleast_2d(components)
    n = comps.shape[0] + 1
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(n, 1, figsize=(6.0, 1.4 * n), sharex=True)
        axes[0].plot(window, color="black", lw=0.9)
        axes[0].set_ylabel("window")
        for k, (ax, comp) in enumerate(zip(axes[1:], comps)):
            ax.plot(comp, lw=0.9)
            ax.set_ylabel("scaling" if k == 0 else f"wavelet {k}")
        axes[-1].set_xlabel("sample")
        _save(fig, path)


def filter_bank_figure(path, grid, filters):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.0, 2.6))
        for k, resp in enumerate(filters):
            ax.plot(grid, resp, label="scaling" if k == 0 else f"wavelet {k}")
        ax.set_xlim(0, np.pi)
        ax.set_xlabel("normalized angular frequency")
        ax.set_ylabel("response")
        ax.legend(frameon=False)
        _save(fig, path)


def rank_figure(path, models, avg_ranks, cd=None):
    """Horizontal average-rank chart with the critical distance drawn from the best model."""
    order = np.argsort(avg_ranks, kind="stable")
    names = [models[i] for i in order]
    ranks = np.asarray(avg_ranks)[order]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5.5, 0.3 * len(names) + 1.0))
        y = np.arange(len(names))[::-1]
        ax.hlines(y, 1, ranks, color="0.7", lw=0.8)
        ax.plot(ranks, y, "o", color="C0")
        ax.set_yticks(y, names)
        ax.set_xlabel("average rank")
        if cd is not None:
            ax.axvspan(ranks[0], ranks[0] + cd, color="C1", alpha=0.15, lw=0)
            ax.set_title(f"CD = {cd:.2f}")
        _save(fig, path)
