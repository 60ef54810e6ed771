"""Differentiable colormapping: render a scalar field through a colormap.

The forward operator maps every field value through the spline curve,
pixel(h, w) = S(field(h, w)), with a linear value-to-parameter mapping.
The adjoint pushes per-pixel gradients back to the control-point channels
and to the field values, which is what makes direct optimization of both
possible.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .spline import Colormap, basis_matrix

LUMA_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])


@dataclass(frozen=True)
class ScalarField:
    """Normalized H x W scalar data; rendering clamps values into [0, 1]."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64).copy()
        if values.ndim != 2 or values.size == 0:
            raise ValueError(f"field must be a non-empty 2D array, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise ValueError("field values must be finite")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True)
class RgbImage:
    """H x W image with three channels in [0, 1]."""

    pixels: np.ndarray

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float64).copy()
        if pixels.ndim != 3 or pixels.shape[2] != 3 or pixels.shape[0] * pixels.shape[1] == 0:
            raise ValueError(f"image must be non-empty (H, W, 3), got shape {pixels.shape}")
        if not np.all(np.isfinite(pixels)):
            raise ValueError("pixel values must be finite")
        if pixels.min() < -1e-9 or pixels.max() > 1.0 + 1e-9:
            raise ValueError("pixel channels must lie in [0, 1]")
        pixels = np.clip(pixels, 0.0, 1.0)
        pixels.flags.writeable = False
        object.__setattr__(self, "pixels", pixels)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]


def render(field: ScalarField, cmap: Colormap) -> RgbImage:
    """Map every field value through the colormap curve.

    The spline is evaluated per pixel (no LUT quantization) so the operator
    stays exactly differentiable; field values outside [0, 1] are clamped.
    """
    flat = np.clip(field.values.ravel(), 0.0, 1.0)
    pixels = basis_matrix(cmap.knots, flat) @ cmap.control
    return RgbImage(pixels.reshape(field.height, field.width, 3))


def spline_derivative(cmap: Colormap, t):
    """dS/dt via the standard degree-2 spline on differenced control points."""
    knots = cmap.knots
    control = cmap.control
    spans = knots[4:-1] - knots[1:-4]
    safe = np.where(spans > 0.0, spans, 1.0)
    diffs = 3.0 * (control[1:] - control[:-1]) / safe[:, None]
    diffs[spans <= 0.0] = 0.0
    ts = np.asarray(t, dtype=np.float64)
    deriv = basis_matrix(knots[1:-1], ts.ravel(), degree=2) @ diffs
    if ts.ndim == 0:
        return deriv[0]
    return deriv.reshape(ts.shape + (3,))


def render_adjoint(field: ScalarField, cmap: Colormap, upstream: np.ndarray):
    """Pull a per-pixel RGB gradient back to control points and field values.

    Returns ``(grad_control, grad_field)`` where
    ``grad_control[i, r] = sum_hw upstream[h, w, r] * N_i(field[h, w])`` and
    ``grad_field = upstream . S'(field)``. Field entries outside [0, 1]
    receive zero gradient (projection rule for the clamp in ``render``).
    """
    upstream = np.asarray(upstream, dtype=np.float64)
    if upstream.shape != (field.height, field.width, 3):
        raise ValueError(
            f"upstream shape {upstream.shape} does not match image "
            f"({field.height}, {field.width}, 3)"
        )
    raw = field.values.ravel()
    clamped = np.clip(raw, 0.0, 1.0)
    up = upstream.reshape(-1, 3)
    grad_control = basis_matrix(cmap.knots, clamped).T @ up
    deriv = spline_derivative(cmap, clamped)
    grad_field = np.einsum("nc,nc->n", up, deriv)
    grad_field[(raw < 0.0) | (raw > 1.0)] = 0.0
    return grad_control, grad_field.reshape(field.height, field.width)


def relative_luminance(rgb: np.ndarray) -> np.ndarray:
    """Rec. 709 luma of (..., 3) RGB values."""
    return np.asarray(rgb, dtype=np.float64) @ LUMA_WEIGHTS


# ---------------------------------------------------------------------------
# image and field file formats


def decode_image(data: bytes) -> RgbImage:
    """Decode PNG (or any PIL-readable) bytes to [0, 1] floats via x/255."""
    with Image.open(io.BytesIO(data)) as img:
        arr = np.asarray(img.convert("RGB"), dtype=np.float64) / 255.0
    return RgbImage(arr)


def read_image(path) -> RgbImage:
    return decode_image(Path(path).read_bytes())


def encode_png(image: RgbImage) -> bytes:
    quantized = np.round(np.clip(image.pixels, 0.0, 1.0) * 255.0).astype(np.uint8)
    buf = io.BytesIO()
    Image.fromarray(quantized, mode="RGB").save(buf, format="PNG")
    return buf.getvalue()


def write_image(image: RgbImage, path) -> None:
    Path(path).write_bytes(encode_png(image))


def write_field(field: ScalarField, path) -> None:
    """Plain-text field format: first line ``H W``, then H rows of W floats.

    Floats are written with 17 significant digits so reading the file back
    reproduces the array bit-exactly.
    """
    lines = [f"{field.height} {field.width}"]
    for row in field.values:
        lines.append(" ".join(f"{v:.17g}" for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def parse_field(text: str) -> ScalarField:
    lines = [ln for ln in text.strip().splitlines() if ln.strip()]
    if not lines:
        raise ValueError("empty field file")
    header = lines[0].replace(",", " ").split()
    if len(header) != 2:
        raise ValueError(f"field header must be 'H W', got {lines[0]!r}")
    height, width = int(header[0]), int(header[1])
    if len(lines) - 1 != height:
        raise ValueError(f"expected {height} field rows, found {len(lines) - 1}")
    rows = []
    for ln in lines[1:]:
        row = [float(v) for v in ln.replace(",", " ").split()]
        if len(row) != width:
            raise ValueError(f"expected {width} values per row, found {len(row)}")
        rows.append(row)
    return ScalarField(np.asarray(rows, dtype=np.float64))


def read_field(path) -> ScalarField:
    return parse_field(Path(path).read_text())
