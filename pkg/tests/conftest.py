import numpy as np
import pytest

from cmaprec.colormapping import RgbImage, ScalarField
from cmaprec.spline import Colormap, clamped_uniform_knots, gray_colormap


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def gray10():
    return gray_colormap(10)


def random_colormap(rng, n_points=10):
    return Colormap(rng.random((n_points, 3)), clamped_uniform_knots(n_points))


def random_image(rng, height=8, width=8):
    return RgbImage(rng.random((height, width, 3)))


def random_field(rng, height=8, width=8, margin=0.02):
    return ScalarField(rng.uniform(margin, 1.0 - margin, (height, width)))


def rel_close(analytic, numeric, rtol, scale=None):
    """Elementwise relative comparison with a scale-aware absolute floor."""
    analytic = np.asarray(analytic, dtype=np.float64)
    numeric = np.asarray(numeric, dtype=np.float64)
    if scale is None:
        scale = max(np.abs(analytic).max(), np.abs(numeric).max(), 1e-12)
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-4 * scale)
    return bool((np.abs(analytic - numeric) / denom <= rtol).all())
