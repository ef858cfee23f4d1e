"""Matplotlib renderings of the report CSVs, saved next to them."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_profile_figure",
    "save_trace_figure",
    "save_mae_figure",
    "save_spectrum_figure",
    "save_image_figure",
]

_FLOOR = 1e-18  # keeps log plots finite where a profile touches zero


def save_profile_figure(path, x, curves: dict, eta=None, title="error shape") -> None:
    """Semilog plot of one or more error profiles, optionally with the target."""
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for label, values in curves.items():
        ax.semilogy(x, np.maximum(np.asarray(values, dtype=float), _FLOOR), label=label)
    if eta is not None:
        ax.semilogy(x, np.maximum(np.asarray(eta, dtype=float), _FLOOR),
                    "k--", linewidth=1, label="target")
    ax.set_xlabel("x")
    ax.set_ylabel("value")
    ax.set_title(title)
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_trace_figure(path, trace) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    if trace:
        evals, values = zip(*trace)
        ax.plot(evals, values, drawstyle="steps-post")
    ax.set_xlabel("objective evaluations")
    ax.set_ylabel("best objective")
    ax.set_title("optimization trace")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_mae_figure(path, x, mae_per_method: dict) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    for name, vec in mae_per_method.items():
        ax.semilogy(x, np.maximum(np.asarray(vec, dtype=float), _FLOOR), label=name)
    ax.set_xlabel("x")
    ax.set_ylabel("MAE")
    ax.set_title("mean absolute error per frequency")
    ax.legend(fontsize=8)
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_spectrum_figure(path, x, values) -> None:
    fig, ax = plt.subplots(figsize=(7, 4.5))
    ax.plot(x, np.abs(np.asarray(values)))
    ax.set_xlabel("x")
    ax.set_ylabel("|y(x)|")
    ax.set_title("spectrum magnitude")
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_image_figure(path, image, title="", cmap="gray") -> None:
    fig, ax = plt.subplots(figsize=(5.5, 5))
    im = ax.imshow(np.asarray(image, dtype=float), cmap=cmap, origin="lower")
    fig.colorbar(im, ax=ax, shrink=0.85)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
