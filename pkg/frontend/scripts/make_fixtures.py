#!/usr/bin/env python3
"""Regenerate the frontend contract fixtures.

Writes ten colormap sampling fixtures (inputs plus server-computed sample
lists) and a 512x512 test visualization used by the integration test.
"""

import json
from pathlib import Path

import numpy as np

from cmaprec.colormapping import render, write_image
from cmaprec.serialize import round_floats
from cmaprec.spline import Colormap, clamped_uniform_knots, sample_colormap
from cmaprec.synth import FieldSpec, bundled_colormaps, generate_field

OUT = Path(__file__).resolve().parents[1] / "fixtures"


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(424242)
    fixtures = []
    for case in range(10):
        n_points = int(rng.integers(4, 13)) if case else 10
        control = rng.random((n_points, 3))
        cmap = Colormap(control, clamped_uniform_knots(n_points))
        size = int(rng.choice([64, 128, 256]))
        fixtures.append(
            {
                "control_points": round_floats(cmap.control.tolist(), 17),
                "knots": round_floats(cmap.knots.tolist(), 17),
                "samples": round_floats(sample_colormap(cmap, size).tolist(), 17),
            }
        )
    (OUT / "spline_fixtures.json").write_text(json.dumps(fixtures) + "\n")

    cmaps = {c.name: c for c in bundled_colormaps()}
    field = generate_field(FieldSpec("sinusoid-product", 512, 512, 21, {"fx": 2.0, "fy": 1.5}))
    write_image(render(field, cmaps["plasma"]), OUT / "viz512.png")
    print(f"wrote {OUT / 'spline_fixtures.json'} and {OUT / 'viz512.png'}")


if __name__ == "__main__":
    main()
