"""Recovery quality metrics: MSE, PSNR, SSIM, direction-aware variants.

Colormaps are compared as their uniform sample lists; the direction-
ignoring variants take the better score of the forward and reversed
orientations (reversal samples the second colormap at 1 - t).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .spline import Colormap, load_colormap, sample_colormap

log = logging.getLogger(__name__)

PSNR_MSE_FLOOR = 1e-12
SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03
SSIM_PEAK = 1.0


@dataclass(frozen=True)
class MetricReport:
    mse: float
    psnr: float
    ssim: float
    direction: str  # "considering" or "ignoring"

    def __post_init__(self):
        if self.mse < 0.0:
            raise ValueError("mse must be non-negative")
        if not -1.0 - 1e-9 <= self.ssim <= 1.0 + 1e-9:
            raise ValueError("ssim must lie in [-1, 1]")


def psnr(mse: float) -> float:
    """Peak signal-to-noise ratio for unit peak, floored at mse 1e-12."""
    if mse < 0.0:
        raise ValueError("mse must be non-negative")
    return float(20.0 * np.log10(SSIM_PEAK / np.sqrt(max(mse, PSNR_MSE_FLOOR))))


def _gaussian_window(taps: int = SSIM_WINDOW, sigma: float = SSIM_SIGMA) -> np.ndarray:
    offsets = np.arange(taps) - (taps - 1) / 2.0
    w = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    return w / w.sum()


def _valid_filter_1d(arr: np.ndarray, window: np.ndarray, axis: int) -> np.ndarray:
    taps = len(window)
    moved = np.moveaxis(arr, axis, -1)
    length = moved.shape[-1]
    out = np.zeros(moved.shape[:-1] + (length - taps + 1,))
    for k in range(taps):
        out += window[k] * moved[..., k : k + length - taps + 1]
    return np.moveaxis(out, -1, axis)


def _ssim_channel(a: np.ndarray, b: np.ndarray, window: np.ndarray, axes) -> float:
    def smooth(x):
        for axis in axes:
            x = _valid_filter_1d(x, window, axis)
        return x

    c1 = (SSIM_K1 * SSIM_PEAK) ** 2
    c2 = (SSIM_K2 * SSIM_PEAK) ** 2
    mu_a = smooth(a)
    mu_b = smooth(b)
    var_a = smooth(a * a) - mu_a * mu_a
    var_b = smooth(b * b) - mu_b * mu_b
    cov = smooth(a * b) - mu_a * mu_b
    num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    return float((num / den).mean())


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    """Mean local SSIM with an 11-tap Gaussian window (sigma 1.5), peak 1.

    Accepts (H, W) or (H, W, 3) arrays; multi-channel inputs are averaged
    per channel. Inputs with a singleton spatial dimension (colormap
    strips) are smoothed with a 1D window along the long axis; otherwise
    both spatial dimensions must cover the window.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shapes differ: {a.shape} vs {b.shape}")
    if a.ndim == 2:
        a = a[:, :, None]
        b = b[:, :, None]
    if a.ndim != 3:
        raise ValueError(f"expected (H, W) or (H, W, C), got shape {a.shape}")
    height, width = a.shape[:2]
    if height == 1:
        axes = (1,)
    elif width == 1:
        axes = (0,)
    else:
        axes = (0, 1)
    window = _gaussian_window()
    for axis in axes:
        if a.shape[axis] < SSIM_WINDOW:
            raise ValueError(
                f"dimension {a.shape[axis]} smaller than the {SSIM_WINDOW}-tap window"
            )
    return float(
        np.mean([_ssim_channel(a[:, :, c], b[:, :, c], window, axes) for c in range(a.shape[2])])
    )


def colormap_strip(cmap: Colormap, size: int = 256) -> np.ndarray:
    """Colormap as a 1 x size x 3 image strip."""
    return sample_colormap(cmap, size)[None, :, :]


def colormap_mse(a: Colormap, b: Colormap, size: int = 256,
                 direction: str = "ignoring") -> float:
    """Mean squared sample difference; ignoring mode takes the better of
    the forward and reversed orientations of ``b``."""
    sa = sample_colormap(a, size)
    sb = sample_colormap(b, size)
    forward = float(((sa - sb) ** 2).mean())
    if direction == "considering":
        return forward
    if direction == "ignoring":
        return min(forward, float(((sa - sb[::-1]) ** 2).mean()))
    raise ValueError(f"direction must be 'considering' or 'ignoring', got {direction!r}")


def colormap_ssim(a: Colormap, b: Colormap, size: int = 256,
                  direction: str = "ignoring") -> float:
    sa = colormap_strip(a, size)
    sb = colormap_strip(b, size)
    forward = ssim(sa, sb)
    if direction == "considering":
        return forward
    if direction == "ignoring":
        return max(forward, ssim(sa, sb[:, ::-1]))
    raise ValueError(f"direction must be 'considering' or 'ignoring', got {direction!r}")


def compare_colormaps(recovered: Colormap, reference: Colormap,
                      size: int = 256) -> dict[str, MetricReport]:
    """Both direction modes of all three metrics for one colormap pair."""
    out = {}
    for direction in ("ignoring", "considering"):
        mse = colormap_mse(recovered, reference, size, direction)
        out[direction] = MetricReport(
            mse=mse,
            psnr=psnr(mse),
            ssim=colormap_ssim(recovered, reference, size, direction),
            direction=direction,
        )
    return out


EVAL_COLUMNS = ("id", "mse_ign", "psnr_ign", "ssim_ign", "mse_dir", "psnr_dir", "ssim_dir")


def evaluate_corpus(manifest: dict, manifest_dir, results_dir, size: int = 256):
    """Score recovered colormaps against a corpus manifest.

    Expects ``<results_dir>/<id>/cmap.json`` per entry. Returns
    ``(rows, mean_row, skipped)`` where each row maps the eval CSV columns;
    the mean row carries id ``"mean"``. Entries without results are
    reported and skipped.
    """
    manifest_dir = Path(manifest_dir)
    results_dir = Path(results_dir)
    rows = []
    skipped = []
    for entry in manifest["entries"]:
        entry_id = entry["id"]
        result_path = results_dir / entry_id / "cmap.json"
        if not result_path.exists():
            log.warning("no result for corpus entry %s; row skipped", entry_id)
            skipped.append(entry_id)
            continue
        reference = load_colormap(manifest_dir / entry["cmap"])
        recovered = load_colormap(result_path)
        reports = compare_colormaps(recovered, reference, size)
        rows.append(
            {
                "id": entry_id,
                "mse_ign": reports["ignoring"].mse,
                "psnr_ign": reports["ignoring"].psnr,
                "ssim_ign": reports["ignoring"].ssim,
                "mse_dir": reports["considering"].mse,
                "psnr_dir": reports["considering"].psnr,
                "ssim_dir": reports["considering"].ssim,
            }
        )
    mean_row = None
    if rows:
        mean_row = {"id": "mean"}
        for col in EVAL_COLUMNS[1:]:
            mean_row[col] = float(np.mean([row[col] for row in rows]))
    return rows, mean_row, skipped
