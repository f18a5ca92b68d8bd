"""Matplotlib figures written next to the CSV output of the CLI."""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "legend.frameon": False,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "kdecomp",
}


def figsize(scale=1.0):
    width = 6.5 * scale
    return width, width * (math.sqrt(5.0) - 1.0) / 2.0


def _save(fig, path):
    path = Path(path)
    # no timestamps, so reruns give the same file
    meta = {"Date": None} if path.suffix.lower() in (".svg", ".pdf") else {}
    fig.savefig(path, bbox_inches="tight", dpi=150, metadata=meta)
    plt.close(fig)
    return path


def plot_density(x, pdf, path, xlabel="x", title=None):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize())
        ax.plot(x, pdf, color="k", lw=1.2)
        ax.fill_between(x, pdf, color="0.85")
        ax.set_xlabel(xlabel)
        ax.set_ylabel("density")
        ax.set_ylim(bottom=0)
        if title:
            ax.set_title(title)
        return _save(fig, path)


def plot_decomposition(x, names, weighted_pdfs, composite, path, xlabel="x", title=None):
    """Stacked weighted component densities with the composite on top."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize())
        ax.stackplot(x, np.asarray(weighted_pdfs), labels=list(names), alpha=0.85, lw=0)
        ax.plot(x, composite, color="k", lw=1.2, label="composite")
        ax.set_xlabel(xlabel)
        ax.set_ylabel("density")
        ax.set_ylim(bottom=0)
        ax.legend(loc="upper right")
        if title:
            ax.set_title(title)
        return _save(fig, path)


def plot_shares(share_matrix, path, title=None):
    """Stacked bars of component shares per quantile, with the null shares as a last bar."""
    sm = share_matrix
    labels = list(sm.quantile_labels) + ["Null"]
    cols = np.hstack([sm.shares, sm.null_weights[:, None] / sm.p])
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=figsize())
        bottom = np.zeros(len(labels))
        for name, row in zip(sm.component_names, cols):
            ax.bar(labels, row, bottom=bottom, label=name, width=0.7)
            bottom += row
        ax.set_ylabel("share of probability mass")
        ax.legend(loc="upper left", bbox_to_anchor=(1.0, 1.0))
        if title:
            ax.set_title(title)
        return _save(fig, path)
