"""Joint recovery of colormap and field from a single visualization image.

The loop replaces the trained-network initial estimate with a heuristic:
the field starts as min-max-normalized luminance and the control colors as
per-luminance-bin mean colors. Two optimization phases follow. The first
minimizes the full four-part objective with the fidelity terms anchored to
that initialization; the second drops the anchors and minimizes only the
reconstruction and color order terms. Control points and field values are
projected back onto [0, 1] after every Adam step, and the finished result
is canonicalized to a dark-first colormap direction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dataclass_field, replace

import numpy as np

from .colormapping import RgbImage, ScalarField, relative_luminance, render
from .losses import LossAnchors, LossReport, LossWeights, evaluate_objective
from .spline import Colormap, clamped_uniform_knots, sample_colormap

RECONSTRUCTION_STOP = 1e-4
PLATEAU_WINDOW = 100
PLATEAU_RELATIVE_IMPROVEMENT = 1e-6
# plateau checks start this many iterations into the anchor-free phase, so
# the optimizer has adapted to the objective switch before being judged
PLATEAU_GRACE = 300


def _plateaued(recon_history: list[float]) -> bool:
    """Windowed improvement test, robust to Adam oscillation.

    Compares the mean reconstruction loss of the last window against the
    window before it; the mean is the stable statistic under the +/-50%
    per-iteration oscillation Adam produces near its noise floor. Progress
    below a 1e-6 relative factor counts as a plateau.
    """
    w = PLATEAU_WINDOW
    if len(recon_history) < 2 * w:
        return False
    previous = math.fsum(recon_history[-2 * w : -w]) / w
    current = math.fsum(recon_history[-w:]) / w
    return previous - current < PLATEAU_RELATIVE_IMPROVEMENT * max(previous, 1e-12)


class RecoveryError(RuntimeError):
    pass


@dataclass
class OptimizerConfig:
    """Settings of the direct two-phase optimization.

    The learning rate applies to raw parameters, not network weights, and
    follows a cosine decay down to ``learning_rate * lr_floor_fraction``;
    a constant rate leaves Adam oscillating above the accuracy the
    reconstruction term can reach.
    """

    learning_rate: float = 1e-2
    iterations: int = 2000
    adam_beta1: float = 0.5
    adam_beta2: float = 0.999
    adam_epsilon: float = 1e-8
    anchor_phase_fraction: float = 0.5
    colormap_samples: int = 256
    weights: LossWeights = dataclass_field(default_factory=LossWeights)
    control_points: int = 10
    seed: int = 0
    lr_floor_fraction: float = 1e-3

    def __post_init__(self):
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 <= self.anchor_phase_fraction <= 1.0:
            raise ValueError("anchor_phase_fraction must lie in [0, 1]")
        if self.iterations < 0:
            raise ValueError("iterations must be non-negative")
        if self.colormap_samples < 2:
            raise ValueError("colormap_samples must be at least 2")
        if self.control_points < 4:
            raise ValueError("control_points must be at least 4")

    def to_dict(self) -> dict:
        return {
            "learning_rate": self.learning_rate,
            "iterations": self.iterations,
            "adam_beta1": self.adam_beta1,
            "adam_beta2": self.adam_beta2,
            "adam_epsilon": self.adam_epsilon,
            "anchor_phase_fraction": self.anchor_phase_fraction,
            "colormap_samples": self.colormap_samples,
            "weights": {
                "reconstruction": self.weights.reconstruction,
                "data_fidelity": self.weights.data_fidelity,
                "color_fidelity": self.weights.color_fidelity,
                "color_order": self.weights.color_order,
            },
            "control_points": self.control_points,
            "seed": self.seed,
            "lr_floor_fraction": self.lr_floor_fraction,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "OptimizerConfig":
        data = dict(data)
        weights = data.pop("weights", None)
        config = cls(**data) if weights is None else cls(weights=LossWeights(**weights), **data)
        return config


@dataclass(frozen=True)
class RecoveryResult:
    cmap: Colormap
    field: ScalarField
    trace: list[LossReport]
    converged: bool
    direction: str  # "canonical" or "flipped"


class Adam:
    """Adam with bias correction; each step projects back onto [0, 1]."""

    def __init__(self, shape, beta1: float = 0.5, beta2: float = 0.999,
                 epsilon: float = 1e-8):
        self.beta1 = beta1
        self.beta2 = beta2
        self.epsilon = epsilon
        self.step_count = 0
        self.first_moment = np.zeros(shape)
        self.second_moment = np.zeros(shape)

    def step(self, params: np.ndarray, grads: np.ndarray, learning_rate: float) -> np.ndarray:
        if params.shape != grads.shape:
            raise ValueError(f"parameter shape {params.shape} != gradient shape {grads.shape}")
        self.step_count += 1
        self.first_moment = self.beta1 * self.first_moment + (1.0 - self.beta1) * grads
        self.second_moment = self.beta2 * self.second_moment + (1.0 - self.beta2) * grads * grads
        m_hat = self.first_moment / (1.0 - self.beta1 ** self.step_count)
        v_hat = self.second_moment / (1.0 - self.beta2 ** self.step_count)
        updated = params - learning_rate * m_hat / (np.sqrt(v_hat) + self.epsilon)
        return np.clip(updated, 0.0, 1.0)


def initialize(image: RgbImage, n_points: int = 10):
    """Heuristic starting point: luminance field and binned mean colors.

    The field is the min-max-normalized relative luminance. Control colors
    are mean image colors over equal-width luminance bins; empty bins are
    filled by linear interpolation from their non-empty neighbors. A
    constant image degenerates to an all-0.5 field with every control point
    set to the constant color.
    """
    pixels = image.pixels.reshape(-1, 3)
    lum = relative_luminance(pixels)
    lo, hi = float(lum.min()), float(lum.max())
    if hi - lo < 1e-12:
        field = np.full((image.height, image.width), 0.5)
        control = np.tile(pixels.mean(axis=0), (n_points, 1))
        return np.clip(control, 0.0, 1.0), ScalarField(field)

    norm = (lum - lo) / (hi - lo)
    bins = np.minimum((norm * n_points).astype(int), n_points - 1)
    sums = np.zeros((n_points, 3))
    counts = np.zeros(n_points)
    np.add.at(sums, bins, pixels)
    np.add.at(counts, bins, 1.0)
    filled = counts > 0
    control = np.empty((n_points, 3))
    idx = np.arange(n_points)
    for c in range(3):
        means = sums[filled, c] / counts[filled]
        control[:, c] = np.interp(idx, idx[filled], means)
    return np.clip(control, 0.0, 1.0), ScalarField(norm.reshape(image.height, image.width))


def _srgb_to_lab(rgb: np.ndarray) -> np.ndarray:
    rgb = np.asarray(rgb, dtype=np.float64)
    linear = np.where(rgb <= 0.04045, rgb / 12.92, ((rgb + 0.055) / 1.055) ** 2.4)
    to_xyz = np.array(
        [
            [0.4124564, 0.3575761, 0.1804375],
            [0.2126729, 0.7151522, 0.0721750],
            [0.0193339, 0.1191920, 0.9503041],
        ]
    )
    xyz = linear @ to_xyz.T / np.array([0.95047, 1.0, 1.08883])
    cut = (6.0 / 29.0) ** 3
    f = np.where(xyz > cut, np.cbrt(xyz), xyz / (3.0 * (6.0 / 29.0) ** 2) + 4.0 / 29.0)
    return np.stack(
        [116.0 * f[..., 1] - 16.0, 500.0 * (f[..., 0] - f[..., 1]), 200.0 * (f[..., 1] - f[..., 2])],
        axis=-1,
    )


_REFINE_BINS = 64


def refine_initialization(image: RgbImage, control: np.ndarray, field: ScalarField,
                          lut_size: int = 256):
    """Upgrade the heuristic starting point before optimization.

    The raw initialization parameterizes the curve by image luminance,
    which bakes the colormap's own luminance profile into the recovered
    parameterization as a warp. This stage (1) estimates the color curve
    from 64 luminance-binned mean colors, (2) re-parameterizes it by
    CIELAB arc length, the closest cheap stand-in for the perceptual
    uniformity colormaps are designed around, (3) fits control points to
    the re-parameterized curve, and (4) re-estimates the field by
    nearest-color projection onto that curve. Degenerate inputs (constant
    image or zero-length curve) pass through unchanged.
    """
    from .synth import fit_colormap

    n_points = len(control)
    pixels = image.pixels.reshape(-1, 3)
    positions = field.values.ravel()
    if positions.max() - positions.min() < 1e-12:
        return control, field

    bins = np.minimum((positions * _REFINE_BINS).astype(int), _REFINE_BINS - 1)
    sums = np.zeros((_REFINE_BINS, 3))
    counts = np.zeros(_REFINE_BINS)
    np.add.at(sums, bins, pixels)
    np.add.at(counts, bins, 1.0)
    filled = counts > 0
    centers = (np.arange(_REFINE_BINS) + 0.5) / _REFINE_BINS
    curve = np.empty((_REFINE_BINS, 3))
    for c in range(3):
        curve[:, c] = np.interp(centers, centers[filled], sums[filled, c] / counts[filled])

    # re-parameterize the binned curve by CIELAB arc length
    lab = _srgb_to_lab(curve)
    arc = np.concatenate([[0.0], np.cumsum(np.sqrt(((np.diff(lab, axis=0)) ** 2).sum(axis=1)))])
    if arc[-1] < 1e-9:
        return control, field
    u = np.maximum.accumulate(arc / arc[-1])
    grid = np.linspace(0.0, 1.0, lut_size)
    resampled = np.stack([np.interp(grid, u, curve[:, c]) for c in range(3)], axis=1)

    refined_control = fit_colormap(resampled, n_points)
    lut = sample_colormap(Colormap.from_control(refined_control), lut_size)

    # nearest-color projection of every pixel onto the refined curve
    lut_sq = (lut * lut).sum(axis=1)
    nearest = np.empty(len(pixels), dtype=np.int64)
    for start in range(0, len(pixels), 65536):
        block = pixels[start : start + 65536]
        scores = lut_sq[None, :] - 2.0 * (block @ lut.T)  # |p|^2 constant per row
        nearest[start : start + 65536] = np.argmin(scores, axis=1)
    refined_field = nearest / (lut_size - 1)
    return refined_control, ScalarField(refined_field.reshape(image.height, image.width))


def canonicalize(result: RecoveryResult) -> RecoveryResult:
    """Force a dark-first colormap direction.

    If the first control color is brighter than the last, reverse the
    control points (mirroring the knots) and replace every field value v by
    1 - v; by the reversal symmetry of the spline the rendered image is
    unchanged. Idempotent.
    """
    lum_first = float(relative_luminance(result.cmap.control[0]))
    lum_last = float(relative_luminance(result.cmap.control[-1]))
    if lum_first <= lum_last:
        return result
    return replace(
        result,
        cmap=result.cmap.reversed(),
        field=ScalarField(1.0 - result.field.values),
        direction="flipped",
    )


def _cosine_lr(config: OptimizerConfig, iteration: int) -> float:
    floor = config.learning_rate * config.lr_floor_fraction
    if config.iterations <= 1:
        return config.learning_rate
    span = config.iterations - 1
    return floor + 0.5 * (config.learning_rate - floor) * (
        1.0 + math.cos(math.pi * iteration / span)
    )


def recover(image: RgbImage, config: OptimizerConfig | None = None,
            progress=None) -> RecoveryResult:
    """Run the two-phase direct optimization against a single image.

    Phase 1 (the first ``anchor_phase_fraction`` of iterations) minimizes
    the full objective with the fidelity terms anchored to the heuristic
    initialization; phase 2 drops the anchors and minimizes only the
    reconstruction and color order terms. Stops early once the
    reconstruction loss falls below 1e-4, or (in phase 2, after a grace
    period) when the mean reconstruction loss of the last 100 iterations
    improves on the 100 before it by less than a 1e-6 relative factor.
    Raises ``RecoveryError`` on a non-finite loss.
    """
    if config is None:
        config = OptimizerConfig()
    control, init_field = initialize(image, config.control_points)
    control, init_field = refine_initialization(image, control, init_field)
    knots = clamped_uniform_knots(config.control_points)
    anchors = LossAnchors(
        color_reference=sample_colormap(Colormap(control, knots), config.colormap_samples),
        field_reference=init_field.values.copy(),
    )

    field_values = init_field.values.copy()
    adam_control = Adam(control.shape, config.adam_beta1, config.adam_beta2, config.adam_epsilon)
    adam_field = Adam(field_values.shape, config.adam_beta1, config.adam_beta2,
                      config.adam_epsilon)

    total = config.iterations
    anchored_until = int(config.anchor_phase_fraction * total)
    phase2_weights = LossWeights(
        reconstruction=config.weights.reconstruction,
        data_fidelity=0.0,
        color_fidelity=0.0,
        color_order=config.weights.color_order,
    )

    trace: list[LossReport] = []
    recon_history: list[float] = []
    converged = False

    for iteration in range(total):
        in_phase2 = iteration >= anchored_until
        if iteration == anchored_until and 0 < anchored_until:
            # the objective changes here; stale Adam moments from the
            # anchored phase would throttle progress for ~1/(1-beta2) steps
            adam_control = Adam(control.shape, config.adam_beta1, config.adam_beta2,
                                config.adam_epsilon)
            adam_field = Adam(field_values.shape, config.adam_beta1, config.adam_beta2,
                              config.adam_epsilon)
        weights = phase2_weights if in_phase2 else config.weights
        step_anchors = None if in_phase2 else anchors
        cmap = Colormap(control, knots)
        report, grad_control, grad_field = evaluate_objective(
            weights, image, cmap, field_values, step_anchors, config.colormap_samples
        )
        if not math.isfinite(report.total):
            raise RecoveryError(
                f"non-finite loss at iteration {iteration}: {report.to_dict()}"
            )
        trace.append(report)

        lr = _cosine_lr(config, iteration)
        control = adam_control.step(control, grad_control, lr)
        field_values = adam_field.step(field_values, grad_field, lr)
        if progress is not None:
            progress(iteration + 1, total)

        recon_history.append(report.reconstruction)
        if report.reconstruction < RECONSTRUCTION_STOP:
            converged = True
            break
        if in_phase2 and iteration - anchored_until >= PLATEAU_GRACE and _plateaued(recon_history):
            converged = True
            break

    if trace and not converged:
        if trace[-1].reconstruction < RECONSTRUCTION_STOP or _plateaued(recon_history):
            converged = True

    result = RecoveryResult(
        cmap=Colormap(control, knots),
        field=ScalarField(field_values),
        trace=trace,
        converged=converged,
        direction="canonical",
    )
    return canonicalize(result)


def reconstruct(result: RecoveryResult) -> RgbImage:
    """Re-render the recovered field under the recovered colormap."""
    return render(result.field, result.cmap)
