"""Matplotlib figures written next to the delimited outputs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .losses import LossReport
from .spline import Colormap, sample_colormap


def save_trace_figure(trace: list[LossReport], path) -> None:
    """Loss components over iterations, log scale where positive."""
    fig, (ax_top, ax_bottom) = plt.subplots(2, 1, figsize=(7, 6), sharex=True)
    its = np.arange(len(trace))
    for name in ("total", "reconstruction", "data_fidelity", "color_fidelity"):
        series = np.array([getattr(r, name) for r in trace])
        ax_top.plot(its, np.maximum(series, 1e-12), label=name)
    ax_top.set_yscale("log")
    ax_top.set_ylabel("loss")
    ax_top.legend(fontsize=8)
    ax_top.set_title("recovery loss trace")
    ax_bottom.plot(its, [r.color_order for r in trace], color="tab:purple")
    ax_bottom.set_ylabel("color order loss")
    ax_bottom.set_xlabel("iteration")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_eval_figure(rows: list[dict], pairs: list[tuple[str, Colormap, Colormap]],
                     path) -> None:
    """Per-entry MSE bars plus reference/recovered colormap strips."""
    n = max(len(pairs), 1)
    fig, (ax_bar, ax_strips) = plt.subplots(
        1, 2, figsize=(11, max(2.0, 0.55 * n + 1.2)), width_ratios=[1, 1.4]
    )
    ids = [row["id"] for row in rows]
    ax_bar.barh(np.arange(len(rows)), [row["mse_ign"] for row in rows], color="tab:blue")
    ax_bar.set_yticks(np.arange(len(rows)), ids, fontsize=7)
    ax_bar.invert_yaxis()
    ax_bar.set_xlabel("colormap MSE (ignoring direction)")

    ax_strips.set_xlim(0, 1)
    ax_strips.set_ylim(0, n)
    ax_strips.axis("off")
    for k, (entry_id, reference, recovered) in enumerate(pairs):
        y = n - 1 - k
        ax_strips.imshow(
            sample_colormap(reference, 256)[None, :, :],
            extent=(0.0, 1.0, y + 0.55, y + 0.9), aspect="auto",
        )
        ax_strips.imshow(
            sample_colormap(recovered, 256)[None, :, :],
            extent=(0.0, 1.0, y + 0.15, y + 0.5), aspect="auto",
        )
        ax_strips.text(1.01, y + 0.72, f"{entry_id} (reference)", fontsize=6, va="center")
        ax_strips.text(1.01, y + 0.32, "recovered", fontsize=6, va="center")
    ax_strips.set_xlim(0, 1.6)
    fig.suptitle("recovered colormap evaluation")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def figure_path_for(output_path, suffix: str = "") -> Path:
    out = Path(output_path)
    return out.with_name(out.stem + suffix + ".png")
