"""Figures written next to the CSV outputs of the command-line runs."""
from __future__ import annotations

import numpy as np
from matplotlib.backends.backend_agg import FigureCanvasAgg
from matplotlib.figure import Figure


def _new(width=6.0, height=None):
    height = height or width * (np.sqrt(5.0) - 1.0) / 2.0
    fig = Figure(figsize=(width, height))
    FigureCanvasAgg(fig)
    return fig, fig.add_subplot(1, 1, 1)


def plot_scan(rows, path, true_angle=None, label=None):
    """Total log-likelihood against unmixing angle, optional truth markers."""
    fig, ax = _new()
    a = np.array(rows, dtype=float)
    ax.plot(a[:, 0], a[:, 1], lw=1.5, label=label)
    if true_angle is not None:
        lo, hi = a[:, 0].min(), a[:, 0].max()
        t = true_angle % 90.0
        while t <= hi:
            if t >= lo:
                ax.axvline(t, color="k", ls="--", lw=0.8)
            t += 90.0
    ax.set_xlabel("rotation angle (deg)")
    ax.set_ylabel("modified log-likelihood")
    if label:
        ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    return path


def plot_loglik(trace, path):
    fig, ax = _new()
    ax.plot(np.arange(1, len(trace) + 1), trace, marker="o", ms=3)
    ax.set_xlabel("outer iteration")
    ax.set_ylabel("total modified log-likelihood")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    return path


def plot_sweep(rows, path, columns=("M", "amari_x100", "mean_sir_db")):
    """Amari metric (left axis) and SIR (right axis) against boosting iterations."""
    a = np.array(rows, dtype=float)
    fig, ax = _new()
    ax.plot(a[:, 0], a[:, 1], marker="o", ms=3, color="C0")
    ax.set_xlabel("boosting iterations M")
    ax.set_ylabel("Amari metric x100", color="C0")
    if a.shape[1] > 2 and np.all(np.isfinite(a[:, 2])):
        ax2 = ax.twinx()
        ax2.plot(a[:, 0], a[:, 2], marker="s", ms=3, color="C1")
        ax2.set_ylabel("mean SIR (dB)", color="C1")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    return path
