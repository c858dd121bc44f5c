"""Figures written next to the delimited outputs."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_confusion(cm, path, title: str = "Confusion matrix (rows = true class)"):
    rates = cm.normalized
    names = [c.display_name for c in cm.classes]
    fig, ax = plt.subplots(figsize=(6, 5))
    im = ax.imshow(np.nan_to_num(rates), vmin=0, vmax=1, cmap="Blues")
    ax.set_xticks(range(len(names)), names, rotation=30, ha="right")
    ax.set_yticks(range(len(names)), names)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    for i in range(rates.shape[0]):
        for j in range(rates.shape[1]):
            v = rates[i, j]
            text = "NA" if np.isnan(v) else f"{v:.2f}"
            ax.text(j, i, text, ha="center", va="center",
                    color="white" if (not np.isnan(v) and v > 0.6) else "black", fontsize=9)
    ax.set_title(title, fontsize=10)
    fig.colorbar(im, ax=ax, fraction=0.046, pad=0.04)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def plot_profile(frames: np.ndarray, path, sample_rate_hz: float,
                 speed_of_sound_mps: float = 343.0, title: str = "Motion profile"):
    """Motion frames as an image: time (block) on x, range on y."""
    frames = np.asarray(frames)
    max_range = speed_of_sound_mps * frames.shape[1] / (2 * sample_rate_hz)
    fig, ax = plt.subplots(figsize=(7, 4))
    ax.imshow(frames.T, aspect="auto", origin="lower", cmap="viridis",
              extent=(0, frames.shape[0], 0, max_range))
    ax.set_xlabel("block")
    ax.set_ylabel("range (m)")
    ax.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)


def plot_features(rss: np.ndarray, dominant_lags: np.ndarray, path, title: str = "Features"):
    fig, (a, b) = plt.subplots(2, 1, figsize=(7, 5), sharex=True)
    a.plot(rss, lw=1.2)
    a.set_ylabel("RSS")
    b.plot(dominant_lags, ".", ms=3)
    b.set_ylabel("strongest peak lag")
    b.set_xlabel("frame")
    a.set_title(title, fontsize=10)
    fig.tight_layout()
    fig.savefig(path, dpi=120, metadata={"Software": None})
    plt.close(fig)
