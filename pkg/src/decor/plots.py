"""Figure rendering for the report commands (Agg backend, deterministic PNGs)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

GROUP_COLORS = {"primary": "tab:blue", "subsequent": "tab:red", "residual": "tab:orange"}

plt.rcParams.update(
    {
        "figure.figsize": (6.4, 4.0),
        "figure.dpi": 110,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "axes.spines.top": False,
        "axes.spines.right": False,
        "legend.frameon": False,
        "font.size": 9,
    }
)


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)


def plot_spectrum(sigmas, path, title="singular value spectrum"):
    fig, ax = plt.subplots()
    ranks = np.arange(1, len(sigmas) + 1)
    ax.plot(ranks, sigmas, marker="o", ms=3.5, lw=1.2, color="tab:blue")
    ax.set_xlabel("rank")
    ax.set_ylabel("singular value")
    ax.set_title(title)
    _save(fig, path)


def plot_profiles(profiles, word_count, path, title="token similarity by component group"):
    """profiles: mapping group name -> per-token cosine array."""
    fig, ax = plt.subplots()
    for group, cos in profiles.items():
        ax.plot(
            np.arange(len(cos)),
            cos,
            label=group,
            lw=1.2,
            color=GROUP_COLORS.get(group),
        )
    ax.axvline(word_count - 0.5, color="gray", ls="--", lw=1, label="word | pad")
    ax.set_ylim(-1.05, 1.05)
    ax.set_xlabel("token index")
    ax.set_ylabel("cosine vs original")
    ax.set_title(title)
    ax.legend(loc="center right")
    _save(fig, path)


def plot_sweep(rows, path):
    """One panel per suppression method: word/pad mean similarity across the sweep."""
    by_method = {}
    for row in rows:
        by_method.setdefault(row["method"], []).append(row)
    fig, axes = plt.subplots(1, len(by_method), figsize=(4.2 * len(by_method), 3.6), squeeze=False)
    for ax, (method, pts) in zip(axes[0], sorted(by_method.items())):
        if method == "exclude_components":
            x = [p["hi_rank"] for p in pts]
            ax.set_xlabel("excluded through rank")
        else:
            x = [p["alpha"] if p["alpha"] != "" else 0.0 for p in pts]
            ax.set_xlabel("alpha")
        ax.plot(x, [p["word_mean"] for p in pts], marker="o", ms=4, label="word mean")
        ax.plot(x, [p["pad_mean"] for p in pts], marker="s", ms=4, label="pad mean")
        ax.set_ylim(-0.05, 1.05)
        ax.set_title(method)
        ax.legend()
    axes[0][0].set_ylabel("cosine vs original")
    _save(fig, path)


def plot_attention_deltas(key_deltas, value_deltas, word_count, path):
    fig, ax = plt.subplots()
    idx = np.arange(len(key_deltas))
    ax.plot(idx, key_deltas, label="key delta", lw=1.2)
    ax.plot(idx, value_deltas, label="value delta", lw=1.2)
    ax.axvline(word_count - 0.5, color="gray", ls="--", lw=1, label="word | pad")
    ax.set_xlabel("token index")
    ax.set_ylabel("|dual-path - standard|")
    ax.set_title("per-token key/value deltas")
    ax.legend()
    _save(fig, path)
