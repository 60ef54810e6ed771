"""Synthetic benchmark construction: fields, colormap library, corpora.

Fields come from a handful of mathematical generators (gradients, radial
distances, sinusoid products, gaussian bumps, a soft ridge), each min-max
normalized to [0, 1]. Colormaps load from JSON files in the shared schema
or from CSV sample lists fitted to 10 control points by least squares.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field as dataclass_field, replace
from importlib import resources
from pathlib import Path

import numpy as np

from .colormapping import RgbImage, ScalarField, render, write_field, write_image
from .serialize import dump_json
from .spline import (
    Colormap,
    basis_matrix,
    clamped_uniform_knots,
    colormap_from_dict,
    colormap_to_dict,
    load_colormap,
    sample_colormap,
    save_colormap,
)

log = logging.getLogger(__name__)

FIELD_KINDS = ("linear-gradient", "radial", "sinusoid-product", "gaussian-bumps", "ridge")


@dataclass(frozen=True)
class FieldSpec:
    kind: str
    height: int = 64
    width: int = 64
    seed: int = 0
    params: dict = dataclass_field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict) -> "FieldSpec":
        return cls(
            kind=data["kind"],
            height=int(data.get("height", 64)),
            width=int(data.get("width", 64)),
            seed=int(data.get("seed", 0)),
            params=dict(data.get("params", {})),
        )


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    image: RgbImage
    cmap: Colormap
    field: ScalarField


def _axes(height: int, width: int):
    ys = np.linspace(0.0, 1.0, height) if height > 1 else np.full(height, 0.5)
    xs = np.linspace(0.0, 1.0, width) if width > 1 else np.full(width, 0.5)
    return np.meshgrid(xs, ys)


def _normalize(values: np.ndarray) -> np.ndarray:
    lo, hi = values.min(), values.max()
    if hi - lo < 1e-12:
        return np.full_like(values, 0.5)
    return (values - lo) / (hi - lo)


def generate_field(spec: FieldSpec) -> ScalarField:
    """Deterministic field for the given spec, min-max normalized to [0, 1]."""
    if spec.height <= 0 or spec.width <= 0:
        raise ValueError("field dimensions must be positive")
    p = spec.params
    x, y = _axes(spec.height, spec.width)
    rng = np.random.default_rng(spec.seed)

    if spec.kind == "linear-gradient":
        angle = float(p.get("angle", 0.0))
        values = np.cos(angle) * x + np.sin(angle) * y
    elif spec.kind == "radial":
        cx, cy = float(p.get("cx", 0.5)), float(p.get("cy", 0.5))
        values = np.hypot(x - cx, y - cy)
    elif spec.kind == "sinusoid-product":
        fx = float(p.get("fx", p.get("frequency", 1.5)))
        fy = float(p.get("fy", p.get("frequency", 1.0)))
        px, py = float(p.get("phase_x", 0.0)), float(p.get("phase_y", 0.0))
        values = np.sin(2.0 * np.pi * fx * x + px) * np.sin(2.0 * np.pi * fy * y + py)
    elif spec.kind == "gaussian-bumps":
        count = int(p.get("count", 4))
        widths = p.get("widths")
        values = np.zeros_like(x)
        for k in range(count):
            cx, cy = rng.uniform(0.15, 0.85, 2)
            w = float(widths[k % len(widths)]) if widths else rng.uniform(0.08, 0.25)
            amp = rng.uniform(0.5, 1.0)
            values += amp * np.exp(-((x - cx) ** 2 + (y - cy) ** 2) / (2.0 * w * w))
    elif spec.kind == "ridge":
        angle = float(p.get("angle", 0.6))
        cx, cy = float(p.get("cx", 0.5)), float(p.get("cy", 0.5))
        w = float(p.get("width", 0.18))
        d = np.cos(angle) * (x - cx) + np.sin(angle) * (y - cy)
        values = np.exp(-(d * d) / (2.0 * w * w))
    else:
        raise ValueError(f"unknown field kind {spec.kind!r} (known: {FIELD_KINDS})")

    return ScalarField(_normalize(values))


def fit_colormap(samples: np.ndarray, n_points: int = 10) -> np.ndarray:
    """Least-squares control points for a curve through the given samples.

    Minimizes the summed squared distance between samples (assumed on the
    uniform inclusive grid) and the spline, then clamps channels to [0, 1].
    """
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[1] != 3:
        raise ValueError("samples must be (m, 3)")
    if len(samples) < n_points:
        raise ValueError(f"need at least {n_points} samples, got {len(samples)}")
    design = basis_matrix(clamped_uniform_knots(n_points), np.linspace(0.0, 1.0, len(samples)))
    if np.linalg.matrix_rank(design) < n_points:
        raise ValueError("rank-deficient spline basis; cannot fit control points")
    control, *_ = np.linalg.lstsq(design, samples, rcond=None)
    return np.clip(control, 0.0, 1.0)


def _load_csv_colormap(path: Path, n_points: int) -> Colormap:
    with path.open(newline="") as fh:
        rows = [row for row in csv.reader(fh) if row and not row[0].startswith("#")]
    samples = np.asarray([[float(v) for v in row[:3]] for row in rows])
    if samples.max() > 1.0 + 1e-9:  # 0..255 files
        samples = samples / 255.0
    control = fit_colormap(samples, n_points)
    cmap = Colormap.from_control(control, name=path.stem)
    residual = float(((sample_colormap(cmap, len(samples)) - samples) ** 2).mean())
    if residual > 1e-4:
        log.warning("colormap %s: least-squares fit residual %.3g", path.name, residual)
    return cmap


def load_colormap_library(path, n_points: int = 10) -> list[Colormap]:
    """Load every colormap JSON/CSV file in a directory, sorted by name.

    Malformed files are skipped with a logged error; an empty directory
    yields an empty list and a warning.
    """
    directory = Path(path)
    cmaps: list[Colormap] = []
    for file in sorted(directory.iterdir()):
        try:
            if file.suffix == ".json":
                cmaps.append(load_colormap(file))
            elif file.suffix == ".csv":
                cmaps.append(_load_csv_colormap(file, n_points))
        except Exception as exc:  # noqa: BLE001 - per-file isolation
            log.error("skipping colormap file %s: %s", file.name, exc)
    if not cmaps:
        log.warning("no colormaps loaded from %s", directory)
    return cmaps


def bundled_colormaps() -> list[Colormap]:
    """The packaged colormap library (sorted by name)."""
    root = resources.files("cmaprec").joinpath("data/colormaps")
    cmaps = []
    for entry in sorted(root.iterdir(), key=lambda e: e.name):
        if entry.name.endswith(".json"):
            cmap = colormap_from_dict(json.loads(entry.read_text()))
            if cmap.name is None:
                cmap = replace(cmap, name=entry.name[: -len(".json")])
            cmaps.append(cmap)
    return cmaps


def make_corpus(cmaps: list[Colormap], specs: list[FieldSpec], out_dir) -> dict:
    """Render the colormap x field-spec cross product and write a manifest.

    Every entry gets its own directory with ``image.png``, ``cmap.json``
    and ``field.csv``; the manifest lists ids and relative paths in a
    deterministic order.
    """
    if not cmaps or not specs:
        raise ValueError("need at least one colormap and one field spec")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not out.is_dir():
        raise ValueError(f"not a writable directory: {out}")

    entries = []
    for ci, cmap in enumerate(cmaps):
        cname = cmap.name or f"cmap{ci:02d}"
        for si, spec in enumerate(specs):
            entry_id = f"{cname}__{spec.kind}-{si:02d}"
            field = generate_field(spec)
            image = render(field, cmap)
            entry_dir = out / entry_id
            entry_dir.mkdir(exist_ok=True)
            write_image(image, entry_dir / "image.png")
            save_colormap(cmap, entry_dir / "cmap.json")
            write_field(field, entry_dir / "field.csv")
            entries.append(
                {
                    "id": entry_id,
                    "image": f"{entry_id}/image.png",
                    "cmap": f"{entry_id}/cmap.json",
                    "field": f"{entry_id}/field.csv",
                }
            )
    manifest = {"entries": entries}
    dump_json(manifest, out / "manifest.json")
    return manifest


def corpus_entries(cmaps: list[Colormap], specs: list[FieldSpec]) -> list[CorpusEntry]:
    """In-memory cross product, image rendered bit-exactly from (field, cmap)."""
    entries = []
    for ci, cmap in enumerate(cmaps):
        cname = cmap.name or f"cmap{ci:02d}"
        for si, spec in enumerate(specs):
            field = generate_field(spec)
            entries.append(
                CorpusEntry(
                    id=f"{cname}__{spec.kind}-{si:02d}",
                    image=render(field, cmap),
                    cmap=cmap,
                    field=field,
                )
            )
    return entries


def export_bundled_colormaps(out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for cmap in bundled_colormaps():
        target = out / f"{cmap.name}.json"
        dump_json(colormap_to_dict(cmap), target)
        paths.append(target)
    return paths
