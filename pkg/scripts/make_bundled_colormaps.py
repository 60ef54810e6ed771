#!/usr/bin/env python3
"""Regenerate the packaged colormap library under src/cmaprec/data/colormaps.

The gray entry is the exact identity ramp; the rest are 10-control-point
least-squares fits of widely used matplotlib colormaps.
"""

from pathlib import Path

import matplotlib
import numpy as np

from cmaprec.serialize import dump_json
from cmaprec.spline import Colormap, colormap_to_dict, gray_colormap, sample_colormap
from cmaprec.synth import fit_colormap

OUT = Path(__file__).resolve().parents[1] / "src" / "cmaprec" / "data" / "colormaps"
NAMES = ["viridis", "plasma", "inferno", "magma", "cividis", "coolwarm", "turbo"]


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    gray = gray_colormap(10)
    dump_json(colormap_to_dict(gray), OUT / "gray.json")
    print("gray: identity ramp")
    for name in NAMES:
        source = matplotlib.colormaps[name]
        samples = np.asarray(source(np.linspace(0.0, 1.0, 256)))[:, :3]
        control = fit_colormap(samples, 10)
        cmap = Colormap.from_control(control, name=name)
        residual = float(((sample_colormap(cmap, 256) - samples) ** 2).mean())
        dump_json(colormap_to_dict(cmap), OUT / f"{name}.json")
        print(f"{name}: fit residual {residual:.3g}")


if __name__ == "__main__":
    main()
