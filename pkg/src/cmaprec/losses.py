"""The four-part recovery objective and its exact gradients.

Components (all unweighted values):

* reconstruction: mean per-pixel Euclidean RGB distance between the input
  and the re-rendered visualization (not squared),
* data fidelity: mean squared difference between two fields,
* color fidelity: mean Euclidean distance between colormap samples and a
  reference sample list,
* color order: negated minimum over all sample pairs of
  ||S(t_i) - S(t_j)|| / (i - j)^2, which is 0 for a colormap with repeated
  colors and most negative for well-spread ones.

The total is the weighted sum of the four. Gradients are analytic; the
norm terms use a 1e-12 guard inside the square root so the gradient at a
zero residual is zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .colormapping import RgbImage, ScalarField
from .spline import Colormap, basis_and_derivative_matrix, basis_matrix, cached_grid_basis

NORM_GUARD = 1e-12

_PAIR_CACHE: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}


def _pair_indices(m: int):
    hit = _PAIR_CACHE.get(m)
    if hit is None:
        if len(_PAIR_CACHE) > 8:
            _PAIR_CACHE.clear()
        iu, ju = np.triu_indices(m, k=1)
        hit = (iu, ju, 1.0 / (iu - ju).astype(np.float64) ** 2)
        _PAIR_CACHE[m] = hit
    return hit


@dataclass(frozen=True)
class LossWeights:
    """Balancing weights of the four objective components (all default 1)."""

    reconstruction: float = 1.0
    data_fidelity: float = 1.0
    color_fidelity: float = 1.0
    color_order: float = 1.0

    def __post_init__(self):
        for name in ("reconstruction", "data_fidelity", "color_fidelity", "color_order"):
            if getattr(self, name) < 0.0:
                raise ValueError(f"loss weight {name} must be non-negative")


@dataclass(frozen=True)
class LossReport:
    reconstruction: float
    data_fidelity: float
    color_fidelity: float
    color_order: float
    total: float

    def to_dict(self) -> dict:
        return {
            "reconstruction": self.reconstruction,
            "data_fidelity": self.data_fidelity,
            "color_fidelity": self.color_fidelity,
            "color_order": self.color_order,
            "total": self.total,
        }


@dataclass(frozen=True)
class LossAnchors:
    """Reference targets for the fidelity terms during anchored optimization.

    ``color_reference`` is an (m, 3) sample list; ``field_reference`` an
    (H, W) array. Either may be None when the matching weight is zero.
    """

    color_reference: np.ndarray | None = None
    field_reference: np.ndarray | None = None


def total_loss(weights: LossWeights, reconstruction: float, data_fidelity: float,
               color_fidelity: float, color_order: float) -> LossReport:
    total = (
        weights.reconstruction * reconstruction
        + weights.data_fidelity * data_fidelity
        + weights.color_fidelity * color_fidelity
        + weights.color_order * color_order
    )
    return LossReport(reconstruction, data_fidelity, color_fidelity, color_order, total)


def reconstruction_loss(a: RgbImage, b: RgbImage) -> float:
    """Mean per-pixel Euclidean RGB distance (the norm itself, not squared)."""
    if a.pixels.shape != b.pixels.shape:
        raise ValueError(f"image shapes differ: {a.pixels.shape} vs {b.pixels.shape}")
    diff = a.pixels - b.pixels
    return float(np.sqrt((diff * diff).sum(axis=2)).mean())


def data_fidelity_loss(a: ScalarField, b: ScalarField) -> float:
    """Mean squared difference between two fields."""
    if a.values.shape != b.values.shape:
        raise ValueError(f"field shapes differ: {a.values.shape} vs {b.values.shape}")
    diff = a.values - b.values
    return float((diff * diff).mean())


def color_fidelity_loss(recovered: Colormap, reference: np.ndarray) -> float:
    """Mean Euclidean distance between curve samples and reference colors.

    The recovered colormap is sampled on the same uniform grid as the
    reference list (one sample per reference color).
    """
    reference = np.asarray(reference, dtype=np.float64)
    if reference.ndim != 2 or reference.shape[1] != 3 or len(reference) < 2:
        raise ValueError("reference must be an (m, 3) color list with m >= 2")
    from .spline import sample_colormap

    samples = sample_colormap(recovered, len(reference))
    diff = samples - reference
    return float(np.sqrt((diff * diff).sum(axis=1)).mean())


def _order_ratio_min(samples: np.ndarray):
    """Minimum pairwise ||S_i - S_j|| / (i - j)^2 and its achieving pair.

    The exact all-pairs minimum; ties resolve to the lexicographically
    smallest (i, j) with i < j, which np.argmin's scan order over the
    row-major upper-triangle pair list gives.
    """
    iu, ju, inv_sq = _pair_indices(len(samples))
    diff = samples[iu] - samples[ju]
    dist = np.sqrt((diff * diff).sum(axis=1))
    ratios = dist * inv_sq
    k = int(np.argmin(ratios))
    return float(ratios[k]), (int(iu[k]), int(ju[k])), float(dist[k])


def color_order_loss(cmap: Colormap, size: int = 256) -> float:
    """Negated minimum order ratio over all sample pairs (always <= 0)."""
    from .spline import sample_colormap

    samples = sample_colormap(cmap, size)
    ratio, _, _ = _order_ratio_min(samples)
    return -ratio


def evaluate_objective(weights: LossWeights, image: RgbImage, cmap: Colormap,
                       field_values: np.ndarray, anchors: LossAnchors | None,
                       sample_count: int = 256):
    """Value and exact gradient of the weighted total objective.

    ``field_values`` is the raw (possibly shadow) field array. Returns
    ``(report, grad_control, grad_field)``. Fidelity components evaluate to
    zero when their anchor is absent; a missing anchor with a non-zero
    weight is an error.
    """
    pixel_count = image.height * image.width
    raw = np.asarray(field_values, dtype=np.float64)
    if raw.shape != (image.height, image.width):
        raise ValueError(
            f"field shape {raw.shape} does not match image ({image.height}, {image.width})"
        )
    flat_raw = raw.ravel()
    clamped = np.clip(flat_raw, 0.0, 1.0)

    # forward render; the basis and derivative tables are reused by the adjoint
    basis_field, deriv_field = basis_and_derivative_matrix(cmap.knots, clamped)
    rendered = basis_field @ cmap.control
    residual = rendered - image.pixels.reshape(-1, 3)
    sq_norms = (residual * residual).sum(axis=1)
    rec_value = float(np.sqrt(sq_norms).mean())
    guarded = np.sqrt(sq_norms + NORM_GUARD)

    grad_control = np.zeros_like(cmap.control)
    grad_field = np.zeros(pixel_count)

    if weights.reconstruction != 0.0:
        upstream = (weights.reconstruction / pixel_count) * (residual / guarded[:, None])
        upstream[sq_norms <= NORM_GUARD] = 0.0  # exact zero at zero residual
        grad_control += basis_field.T @ upstream
        grad_field += np.einsum("nc,nc->n", upstream, deriv_field @ cmap.control)
        grad_field[(flat_raw < 0.0) | (flat_raw > 1.0)] = 0.0

    data_value = 0.0
    if anchors is not None and anchors.field_reference is not None:
        d = flat_raw - anchors.field_reference.ravel()
        data_value = float((d * d).mean())
        if weights.data_fidelity != 0.0:
            grad_field += weights.data_fidelity * 2.0 * d / pixel_count
    elif weights.data_fidelity != 0.0:
        raise ValueError("data fidelity weight is non-zero but no field anchor given")

    # colormap samples shared by the fidelity and order terms
    basis_grid = cached_grid_basis(cmap.knots, sample_count)
    samples = basis_grid @ cmap.control

    color_value = 0.0
    if anchors is not None and anchors.color_reference is not None:
        ref = np.asarray(anchors.color_reference, dtype=np.float64)
        if ref.shape != samples.shape:
            raise ValueError(
                f"color anchor shape {ref.shape} does not match ({sample_count}, 3)"
            )
        cdiff = samples - ref
        c_sq = (cdiff * cdiff).sum(axis=1)
        color_value = float(np.sqrt(c_sq).mean())
        if weights.color_fidelity != 0.0:
            c_guarded = np.sqrt(c_sq + NORM_GUARD)
            c_upstream = cdiff / (len(ref) * c_guarded[:, None])
            c_upstream[c_sq <= NORM_GUARD] = 0.0
            grad_control += weights.color_fidelity * (basis_grid.T @ c_upstream)
    elif weights.color_fidelity != 0.0:
        raise ValueError("color fidelity weight is non-zero but no color anchor given")

    ratio, (pair_i, pair_j), pair_dist = _order_ratio_min(samples)
    order_value = -ratio
    if weights.color_order != 0.0 and pair_dist > NORM_GUARD:
        unit = (samples[pair_i] - samples[pair_j]) / pair_dist
        scale = weights.color_order / (pair_i - pair_j) ** 2
        grad_control += scale * np.outer(basis_grid[pair_j] - basis_grid[pair_i], unit)

    report = total_loss(weights, rec_value, data_value, color_value, order_value)
    return report, grad_control, grad_field.reshape(raw.shape)


def loss_gradients(weights: LossWeights, image: RgbImage, cmap: Colormap,
                   field: ScalarField, anchors: LossAnchors | None,
                   sample_count: int = 256):
    """Gradient of the weighted total with respect to (control, field)."""
    _, grad_control, grad_field = evaluate_objective(
        weights, image, cmap, field.values, anchors, sample_count
    )
    return grad_control, grad_field
