"""Applications on top of recovery: recoloring and colormap transfer."""

from __future__ import annotations

import numpy as np

from .colormapping import RgbImage, ScalarField, render
from .recovery import RecoveryResult
from .spline import Colormap

HISTOGRAM_BINS = 64


def adjust(result: RecoveryResult, new_cmap: Colormap) -> RgbImage:
    """Re-render the recovered data under an edited or replacement colormap."""
    return render(result.field, new_cmap)


def transfer(cmap: Colormap, new_field: ScalarField) -> RgbImage:
    """Render new data under a colormap, min-max normalizing if needed."""
    values = new_field.values
    if values.min() < 0.0 or values.max() > 1.0:
        lo, hi = values.min(), values.max()
        values = np.full_like(values, 0.5) if hi - lo < 1e-12 else (values - lo) / (hi - lo)
        new_field = ScalarField(values)
    return render(new_field, cmap)


def field_histogram(field: ScalarField, bins: int = HISTOGRAM_BINS) -> np.ndarray:
    """Fixed-bin counts of field values over [0, 1], for the UI panel."""
    counts, _ = np.histogram(field.values, bins=bins, range=(0.0, 1.0))
    return counts
