"""Discrete palette extraction by density clustering of recovered values.

Recovered field values concentrate around a few levels when the source
visualization used a discrete palette. A 1D DBSCAN over the values finds
those levels; each cluster contributes one palette entry whose color is
the recovered curve evaluated at the cluster's mean value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .recovery import RecoveryResult
from .spline import eval_colormap


class PaletteError(ValueError):
    pass


@dataclass(frozen=True)
class DbscanParams:
    """Value-space radius and density threshold.

    ``min_pts`` of None derives the threshold from the data size as 0.5%
    of the point count with a floor of 8. Neighborhoods are closed balls
    including the point itself.
    """

    eps: float = 0.02
    min_pts: int | None = None

    def __post_init__(self):
        if self.eps <= 0.0:
            raise ValueError("eps must be positive")
        if self.min_pts is not None and self.min_pts < 1:
            raise ValueError("min_pts must be at least 1")

    def resolve_min_pts(self, count: int) -> int:
        if self.min_pts is not None:
            return self.min_pts
        return max(8, int(round(0.005 * count)))


@dataclass(frozen=True)
class PaletteEntry:
    value: float
    color: np.ndarray


@dataclass(frozen=True)
class Palette:
    entries: list[PaletteEntry]

    def to_dict(self) -> dict:
        return {
            "entries": [
                {"value": e.value, "color": list(e.color)} for e in self.entries
            ]
        }


def dbscan_1d(values: np.ndarray, params: DbscanParams) -> np.ndarray:
    """DBSCAN over scalars with the absolute-difference metric.

    Returns one label per input value in input order; noise is -1.
    Equivalent to the textbook algorithm with seeds visited in sorted
    order, but runs in O(n log n) by sweeping the sorted values: core
    points are found with two binary searches each, core runs separated by
    more than eps become clusters, and border points join the cluster of
    the earliest-processed (leftmost) core within eps.
    """
    values = np.asarray(values, dtype=np.float64).ravel()
    if values.size == 0:
        raise ValueError("no values to cluster")
    min_pts = params.resolve_min_pts(values.size)

    order = np.argsort(values, kind="stable")
    sv = values[order]
    n = sv.size
    lo = np.searchsorted(sv, sv - params.eps, side="left")
    hi = np.searchsorted(sv, sv + params.eps, side="right")
    core = (hi - lo) >= min_pts

    labels_sorted = np.full(n, -1, dtype=np.int64)
    core_positions = np.flatnonzero(core)
    if core_positions.size:
        # new cluster whenever the gap to the previous core exceeds eps
        gaps = np.diff(sv[core_positions]) > params.eps
        cluster_ids = np.concatenate([[0], np.cumsum(gaps)])
        labels_sorted[core_positions] = cluster_ids

        border = np.flatnonzero(~core)
        if border.size:
            # nearest core at or left of each border point, and at or right
            left_idx = np.searchsorted(core_positions, border, side="left") - 1
            right_idx = left_idx + 1
            has_left = left_idx >= 0
            left_core = core_positions[np.clip(left_idx, 0, None)]
            left_ok = has_left & (sv[border] - sv[left_core] <= params.eps)
            has_right = right_idx < core_positions.size
            right_core = core_positions[np.clip(right_idx, None, core_positions.size - 1)]
            right_ok = has_right & (sv[right_core] - sv[border] <= params.eps)
            take_left = left_ok
            take_right = ~left_ok & right_ok
            labels_sorted[border[take_left]] = cluster_ids[left_idx[take_left]]
            labels_sorted[border[take_right]] = cluster_ids[right_idx[take_right]]

    labels = np.empty(n, dtype=np.int64)
    labels[order] = labels_sorted
    return labels


def extract_palette(result: RecoveryResult, params: DbscanParams | None = None) -> Palette:
    """One palette entry per value cluster, colored from the recovered curve.

    Entries are sorted by value; noise points contribute nothing. Raises
    ``PaletteError`` when every point is noise (eps too small for the data).
    """
    if params is None:
        params = DbscanParams()
    values = result.field.values.ravel()
    labels = dbscan_1d(values, params)
    cluster_ids = np.unique(labels[labels >= 0])
    if cluster_ids.size == 0:
        raise PaletteError(
            f"DBSCAN found no clusters (eps={params.eps}); increase eps or lower min_pts"
        )
    entries = []
    for cid in cluster_ids:
        mean_value = float(values[labels == cid].mean())
        entries.append(PaletteEntry(value=mean_value, color=eval_colormap(result.cmap, mean_value)))
    entries.sort(key=lambda e: e.value)
    return Palette(entries=entries)
