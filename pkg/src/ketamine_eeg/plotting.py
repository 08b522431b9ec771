"""SVG figures for the report path.

Everything renders through the Agg backend with a fixed SVG hash salt and
no date metadata, so identical inputs give byte-identical files.
"""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "svg.hashsalt": "ketamine-eeg",
    "svg.fonttype": "path",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.titlesize": 10,
    "legend.frameon": False,
}

COLORS = {"responder": "#c0392b", "nonresponder": "#2c6fbb", "NS": "#7f7f7f"}


def _save(fig, path):
    fig.savefig(path, format="svg", metadata={"Date": None, "Creator": None})
    plt.close(fig)


def plot_prediction_grid(grid: dict, path, title="Mean accuracy (3-fold / LOSO)"):
    """Grouped bar chart; ``grid[panel][feature_set][kind] = (mean, sd)``."""
    with plt.rc_context(RC):
        panels = list(grid)
        fig, axes = plt.subplots(1, len(panels), figsize=(4.2 * len(panels), 3.4),
                                 sharey=True, squeeze=False)
        for ax, panel in zip(axes[0], panels):
            fsets = list(grid[panel])
            kinds = list(grid[panel][fsets[0]]) if fsets else []
            width = 0.8 / max(len(fsets), 1)
            x = np.arange(len(kinds))
            for i, fs in enumerate(fsets):
                means = [grid[panel][fs][k][0] or 0.0 for k in kinds]
                sds = [grid[panel][fs][k][1] or 0.0 for k in kinds]
                ax.bar(x + (i - (len(fsets) - 1) / 2) * width, means, width, yerr=sds,
                       capsize=2, label=fs, error_kw={"elinewidth": 0.6})
            ax.axhline(50, color="k", lw=0.5, ls=":")
            ax.set_xticks(x)
            ax.set_xticklabels(kinds, rotation=30, ha="right")
            ax.set_ylim(0, 105)
            ax.set_title(panel)
        axes[0][0].set_ylabel("accuracy (%)")
        axes[0][-1].legend(loc="lower right", fontsize=7)
        fig.suptitle(title)
        fig.tight_layout()
        _save(fig, path)


def plot_hdrs_trajectories(curves: dict, timepoints, path):
    """``curves[label] = (means, sds)`` over ``timepoints``."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(6, 3.4))
        x = np.arange(len(timepoints))
        for label, (m, s) in curves.items():
            m, s = np.asarray(m, float), np.asarray(s, float)
            c = COLORS.get(label)
            ax.plot(x, m, marker="o", ms=3, color=c, label=label)
            ax.fill_between(x, m - s, m + s, color=c, alpha=0.15, lw=0)
        ax.set_xticks(x)
        ax.set_xticklabels(timepoints, rotation=45, ha="right")
        ax.set_ylabel("HDRS-17")
        ax.legend()
        fig.tight_layout()
        _save(fig, path)


def plot_mean_spectra(freqs, spectra: dict, path, title=""):
    """``spectra[label] = (n_subjects x n_freqs)`` array of relative spectra."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5, 3.4))
        for label, arr in spectra.items():
            arr = np.asarray(arr, float)
            if arr.size == 0:
                continue
            m = arr.mean(axis=0)
            s = arr.std(axis=0, ddof=1) if arr.shape[0] > 1 else np.zeros_like(m)
            c = COLORS.get(label)
            ax.plot(freqs, m, color=c, label=f"{label} (n={arr.shape[0]})")
            ax.fill_between(freqs, m - s, m + s, color=c, alpha=0.15, lw=0)
        for edge in (3.5, 4, 7.5, 8, 10, 10.5):
            ax.axvline(edge, color="k", lw=0.3, ls=":")
        ax.set_xlabel("frequency (Hz)")
        ax.set_ylabel("relative power per bin")
        ax.set_title(title)
        ax.legend()
        fig.tight_layout()
        _save(fig, path)
