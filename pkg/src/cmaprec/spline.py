"""Cubic B-spline colormaps: control colors, clamped knots, curve sampling.

A colormap is a curve in RGB space, S(t) = sum_i N_i(t) * c_i for t in
[0, 1], built from n+1 control colors and a clamped knot vector. Clamping
(degree+1 repeated knots at each end) makes the curve interpolate its
first and last control colors, so t=0 and t=1 land exactly on the end
colors of the legend the curve represents.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .serialize import round_floats

DEGREE = 3
DEFAULT_CONTROL_COUNT = 10
DEFAULT_LUT_SIZE = 256

_CHANNEL_TOL = 1e-9


def clamped_uniform_knots(n_points: int) -> np.ndarray:
    """Clamped uniform knot vector for a cubic spline on ``n_points`` controls.

    Layout: four zeros, interior knots k/(n_points-3), four ones; the vector
    has n_points+4 entries.
    """
    if n_points < 4:
        raise ValueError(
            f"a cubic spline needs at least 4 control points, got {n_points}"
        )
    interior = np.arange(1, n_points - 3, dtype=np.float64) / (n_points - 3)
    return np.concatenate([np.zeros(4), interior, np.ones(4)])


def basis(i: int, degree: int, t: float, knots: np.ndarray) -> float:
    """Cox-de Boor recursion value N_{i,degree}(t).

    Zero-degree intervals are half-open except the last non-empty one, which
    is closed so the basis still partitions unity at t = 1.
    """
    knots = np.asarray(knots, dtype=np.float64)
    if not 0 <= i <= len(knots) - degree - 2:
        raise ValueError(f"basis index {i} out of range for degree {degree}")
    if degree == 0:
        if knots[i] <= t < knots[i + 1]:
            return 1.0
        if t == knots[-1] and knots[i] < knots[i + 1] == knots[-1]:
            return 1.0
        return 0.0
    total = 0.0
    left_span = knots[i + degree] - knots[i]
    if left_span > 0.0:
        total += (t - knots[i]) / left_span * basis(i, degree - 1, t, knots)
    right_span = knots[i + degree + 1] - knots[i + 1]
    if right_span > 0.0:
        total += (knots[i + degree + 1] - t) / right_span * basis(i + 1, degree - 1, t, knots)
    return total


def _find_spans(knots: np.ndarray, ts: np.ndarray, degree: int) -> np.ndarray:
    n_basis = len(knots) - degree - 1
    spans = np.searchsorted(knots, ts, side="right") - 1
    return np.clip(spans, degree, n_basis - 1)


def basis_matrix(knots: np.ndarray, ts, degree: int = DEGREE) -> np.ndarray:
    """Dense matrix of basis values, one row per parameter in ``ts``.

    Rows sum to 1 (partition of unity). Parameters outside the knot range
    are clamped. Uses the banded evaluation of the degree+1 non-vanishing
    functions per span; rows at the exact domain endpoints are set to the
    unit vectors so endpoint interpolation is bit-exact.
    """
    knots = np.asarray(knots, dtype=np.float64)
    flat = np.clip(np.atleast_1d(np.asarray(ts, dtype=np.float64)).ravel(), knots[0], knots[-1])
    n_basis = len(knots) - degree - 1
    spans = _find_spans(knots, flat, degree)

    values = np.zeros((flat.size, degree + 1))
    values[:, 0] = 1.0
    left = np.zeros((flat.size, degree + 1))
    right = np.zeros((flat.size, degree + 1))
    for j in range(1, degree + 1):
        left[:, j] = flat - knots[spans + 1 - j]
        right[:, j] = knots[spans + j] - flat
        saved = np.zeros(flat.size)
        for r in range(j):
            denom = right[:, r + 1] + left[:, j - r]
            safe = np.where(denom > 0.0, denom, 1.0)
            temp = np.where(denom > 0.0, values[:, r] / safe, 0.0)
            values[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        values[:, j] = saved

    out = np.zeros((flat.size, n_basis))
    cols = spans[:, None] - degree + np.arange(degree + 1)[None, :]
    np.put_along_axis(out, cols, values, axis=1)

    # exact unit rows at the clamped endpoints
    at_start = flat == knots[0]
    at_end = flat == knots[-1]
    if np.any(at_start):
        out[at_start] = 0.0
        out[at_start, 0] = 1.0
    if np.any(at_end):
        out[at_end] = 0.0
        out[at_end, n_basis - 1] = 1.0
    return out


def basis_and_derivative_matrix(knots: np.ndarray, ts) -> tuple[np.ndarray, np.ndarray]:
    """Cubic basis values and their t-derivatives in one pass.

    Returns ``(values, derivs)`` with one row per parameter; the derivative
    rows come from the degree-2 band of the same triangular table, so this
    costs one evaluation instead of two.
    """
    knots = np.asarray(knots, dtype=np.float64)
    flat = np.clip(np.atleast_1d(np.asarray(ts, dtype=np.float64)).ravel(), knots[0], knots[-1])
    degree = DEGREE
    n_basis = len(knots) - degree - 1
    spans = _find_spans(knots, flat, degree)

    values = np.zeros((flat.size, degree + 1))
    values[:, 0] = 1.0
    left = np.zeros((flat.size, degree + 1))
    right = np.zeros((flat.size, degree + 1))
    quad = None
    for j in range(1, degree + 1):
        left[:, j] = flat - knots[spans + 1 - j]
        right[:, j] = knots[spans + j] - flat
        saved = np.zeros(flat.size)
        for r in range(j):
            denom = right[:, r + 1] + left[:, j - r]
            safe = np.where(denom > 0.0, denom, 1.0)
            temp = np.where(denom > 0.0, values[:, r] / safe, 0.0)
            values[:, r] = saved + right[:, r + 1] * temp
            saved = left[:, j - r] * temp
        values[:, j] = saved
        if j == degree - 1:
            quad = values[:, :degree].copy()  # N_{s-2+k,2}, k = 0..2

    # N'_{i,3} = 3 (N_{i,2}/(t_{i+3}-t_i) - N_{i+1,2}/(t_{i+4}-t_{i+1}))
    deriv_band = np.zeros((flat.size, degree + 1))
    for r in range(degree + 1):
        i = spans - degree + r
        if r >= 1:
            dl = knots[i + degree] - knots[i]
            deriv_band[:, r] += np.where(dl > 0.0, quad[:, r - 1] / np.where(dl > 0.0, dl, 1.0), 0.0)
        if r <= degree - 1:
            dr = knots[i + degree + 1] - knots[i + 1]
            deriv_band[:, r] -= np.where(dr > 0.0, quad[:, r] / np.where(dr > 0.0, dr, 1.0), 0.0)
    deriv_band *= degree

    cols = spans[:, None] - degree + np.arange(degree + 1)[None, :]
    out = np.zeros((flat.size, n_basis))
    np.put_along_axis(out, cols, values, axis=1)
    out_deriv = np.zeros((flat.size, n_basis))
    np.put_along_axis(out_deriv, cols, deriv_band, axis=1)

    at_start = flat == knots[0]
    at_end = flat == knots[-1]
    if np.any(at_start):
        out[at_start] = 0.0
        out[at_start, 0] = 1.0
    if np.any(at_end):
        out[at_end] = 0.0
        out[at_end, n_basis - 1] = 1.0
    return out, out_deriv


_GRID_CACHE: dict[tuple[bytes, int], np.ndarray] = {}


def cached_grid_basis(knots: np.ndarray, size: int) -> np.ndarray:
    """Basis matrix on the uniform inclusive grid, memoized per knot vector."""
    key = (np.asarray(knots, dtype=np.float64).tobytes(), size)
    hit = _GRID_CACHE.get(key)
    if hit is None:
        if len(_GRID_CACHE) > 16:
            _GRID_CACHE.clear()
        hit = basis_matrix(knots, np.linspace(0.0, 1.0, size))
        hit.flags.writeable = False
        _GRID_CACHE[key] = hit
    return hit


def greville_abscissae(knots: np.ndarray, degree: int = DEGREE) -> np.ndarray:
    """Parameter positions whose basis-weighted sum reproduces t exactly.

    Control values placed at these abscissae make the spline the identity
    map (linear precision), which is what a true gray ramp needs.
    """
    knots = np.asarray(knots, dtype=np.float64)
    n_basis = len(knots) - degree - 1
    return np.array([knots[i + 1 : i + 1 + degree].sum() / degree for i in range(n_basis)])


@dataclass(frozen=True)
class Colormap:
    """Continuous colormap: control colors, clamped knots, optional LUT cache.

    ``control`` is an (n+1, 3) array of RGB rows in [0, 1]; ``knots`` has
    n+5 non-decreasing entries with 4 repeats at each end. ``lut``, when
    present, caches ``sample_colormap(self, len(lut))`` bit-exactly.
    """

    control: np.ndarray
    knots: np.ndarray
    lut: np.ndarray | None = None
    name: str | None = None

    def __post_init__(self):
        control = np.asarray(self.control, dtype=np.float64).copy()
        if control.ndim != 2 or control.shape[1] != 3:
            raise ValueError(f"control points must be (n, 3), got {control.shape}")
        if len(control) < 4:
            raise ValueError("cubic colormap needs at least 4 control points")
        if control.min() < -_CHANNEL_TOL or control.max() > 1.0 + _CHANNEL_TOL:
            raise ValueError("control point channels must lie in [0, 1]")
        control = np.clip(control, 0.0, 1.0)
        control.flags.writeable = False

        knots = np.asarray(self.knots, dtype=np.float64).copy()
        if knots.shape != (len(control) + 4,):
            raise ValueError(
                f"knot vector must have {len(control) + 4} entries, got {knots.shape}"
            )
        if np.any(np.diff(knots) < 0.0):
            raise ValueError("knots must be non-decreasing")
        if np.any(knots[:4] != knots[0]) or np.any(knots[-4:] != knots[-1]):
            raise ValueError("knots must be clamped (4 repeats at each end)")
        knots.flags.writeable = False

        object.__setattr__(self, "control", control)
        object.__setattr__(self, "knots", knots)
        if self.lut is not None:
            lut = np.asarray(self.lut, dtype=np.float64).copy()
            if lut.ndim != 2 or lut.shape[1] != 3 or len(lut) < 2:
                raise ValueError("LUT must be (m, 3) with m >= 2")
            expected = basis_matrix(knots, np.linspace(0.0, 1.0, len(lut))) @ control
            if not np.array_equal(lut, expected):
                raise ValueError("LUT does not equal the colormap's own samples")
            lut.flags.writeable = False
            object.__setattr__(self, "lut", lut)

    @classmethod
    def from_control(cls, control, name: str | None = None) -> "Colormap":
        control = np.asarray(control, dtype=np.float64)
        return cls(control=control, knots=clamped_uniform_knots(len(control)), name=name)

    @property
    def n_points(self) -> int:
        return len(self.control)

    def with_lut(self, size: int = DEFAULT_LUT_SIZE) -> "Colormap":
        return replace(self, lut=sample_colormap(self, size))

    def reversed(self) -> "Colormap":
        """Mirror the curve: S_rev(t) = S(1 - t) exactly."""
        return Colormap(
            control=self.control[::-1],
            knots=(1.0 - self.knots)[::-1],
            name=self.name,
        )


def gray_colormap(n_points: int = DEFAULT_CONTROL_COUNT) -> Colormap:
    """Gray ramp that reproduces the identity map S(t) = (t, t, t).

    Control values sit at the Greville abscissae; by linear precision the
    spline then evaluates to t exactly, so sampling yields k/(m-1).
    """
    knots = clamped_uniform_knots(n_points)
    g = greville_abscissae(knots)
    return Colormap(control=np.repeat(g[:, None], 3, axis=1), knots=knots, name="gray")


def eval_colormap(cmap: Colormap, t):
    """Sample the curve at parameter(s) ``t``; out-of-range t is clamped.

    Scalar input returns an RGB triple; array input returns shape + (3,).
    """
    ts = np.asarray(t, dtype=np.float64)
    rgb = basis_matrix(cmap.knots, ts.ravel()) @ cmap.control
    if ts.ndim == 0:
        return rgb[0]
    return rgb.reshape(ts.shape + (3,))


def sample_colormap(cmap: Colormap, size: int) -> np.ndarray:
    """Uniform samples over [0, 1] inclusive: t_k = k/(size-1), k = 0..size-1."""
    if size < 2:
        raise ValueError(f"need at least 2 samples, got {size}")
    return eval_colormap(cmap, np.linspace(0.0, 1.0, size))


def eval_colormap_gradient(cmap: Colormap, t: float) -> np.ndarray:
    """Per-control-point weights of dS(t)/dc_i.

    Channel r of S(t) depends only on channel r of each control color, with
    the returned basis value as the coefficient; weights sum to 1.
    """
    return basis_matrix(cmap.knots, np.clip(float(t), 0.0, 1.0))[0]


def colormap_to_dict(cmap: Colormap) -> dict:
    out = {
        "n": cmap.n_points - 1,
        "control_points": round_floats(cmap.control.tolist()),
        "knots": round_floats(cmap.knots.tolist()),
    }
    if cmap.name is not None:
        out["name"] = cmap.name
    return out


def colormap_from_dict(data: dict) -> Colormap:
    """Parse the shared colormap JSON schema; knots default to clamped uniform."""
    control = np.asarray(data["control_points"], dtype=np.float64)
    if "n" in data and int(data["n"]) + 1 != len(control):
        raise ValueError(
            f"inconsistent colormap JSON: n={data['n']} but {len(control)} control points"
        )
    knots = data.get("knots")
    if knots is None:
        knots = clamped_uniform_knots(len(control))
    return Colormap(control=control, knots=np.asarray(knots, dtype=np.float64),
                    name=data.get("name"))


def save_colormap(cmap: Colormap, path) -> None:
    Path(path).write_text(json.dumps(colormap_to_dict(cmap), indent=2) + "\n")


def load_colormap(path) -> Colormap:
    cmap = colormap_from_dict(json.loads(Path(path).read_text()))
    if cmap.name is None:
        cmap = replace(cmap, name=Path(path).stem)
    return cmap
