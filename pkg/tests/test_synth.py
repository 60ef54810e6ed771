import json
import logging

import numpy as np
import pytest

from cmaprec.colormapping import read_field, read_image, render
from cmaprec.spline import Colormap, gray_colormap, load_colormap, sample_colormap, save_colormap
from cmaprec.synth import (
    FieldSpec,
    bundled_colormaps,
    corpus_entries,
    fit_colormap,
    generate_field,
    load_colormap_library,
    make_corpus,
)

from conftest import random_colormap


class TestGenerateField:
    def test_linear_gradient_angle_zero(self):
        field = generate_field(FieldSpec("linear-gradient", 4, 4, 0, {"angle": 0.0}))
        expected = np.broadcast_to([0, 1 / 3, 2 / 3, 1.0], (4, 4))
        assert np.allclose(field.values, expected, atol=1e-12)

    def test_sinusoid_zero_frequency_degenerates(self):
        field = generate_field(FieldSpec("sinusoid-product", 4, 4, 0, {"frequency": 0.0}))
        assert np.array_equal(field.values, np.full((4, 4), 0.5))

    def test_deterministic(self):
        spec = FieldSpec("gaussian-bumps", 16, 16, 7, {"count": 3})
        assert np.array_equal(generate_field(spec).values, generate_field(spec).values)

    def test_unknown_kind_rejected(self):
        with pytest.raises(ValueError):
            generate_field(FieldSpec("perlin", 4, 4))

    def test_non_positive_dimensions_rejected(self):
        with pytest.raises(ValueError):
            generate_field(FieldSpec("radial", 0, 4))

    @pytest.mark.parametrize(
        "kind", ["linear-gradient", "radial", "sinusoid-product", "gaussian-bumps", "ridge"]
    )
    def test_normalized_range(self, kind):
        field = generate_field(FieldSpec(kind, 24, 24, 11))
        assert field.values.min() == 0.0
        assert field.values.max() == 1.0


class TestFitColormap:
    def test_recovers_exact_spline_samples(self, rng):
        cmap = random_colormap(rng, 10)
        control = fit_colormap(sample_colormap(cmap, 256), 10)
        assert np.abs(control - cmap.control).max() <= 1e-8

    def test_constant_samples(self):
        control = fit_colormap(np.full((64, 3), 0.3), 10)
        assert np.allclose(control, 0.3, atol=1e-9)

    def test_gray_ramp_low_residual(self):
        samples = np.repeat(np.linspace(0, 1, 256)[:, None], 3, axis=1)
        cmap = Colormap.from_control(fit_colormap(samples, 10))
        residual = ((sample_colormap(cmap, 256) - samples) ** 2).mean(axis=0)
        assert residual.max() <= 1e-6

    def test_too_few_samples_rejected(self):
        with pytest.raises(ValueError):
            fit_colormap(np.zeros((5, 3)), 10)


class TestLoadColormapLibrary:
    def test_json_loaded_verbatim(self, tmp_path, rng):
        cmap = random_colormap(rng)
        save_colormap(cmap, tmp_path / "one.json")
        loaded = load_colormap_library(tmp_path)
        assert len(loaded) == 1
        assert loaded[0].name == "one"
        assert np.allclose(loaded[0].control, cmap.control, atol=1e-8)

    def test_csv_gray_ramp_fit(self, tmp_path):
        rows = "\n".join(f"{v},{v},{v}" for v in np.linspace(0, 1, 256))
        (tmp_path / "ramp.csv").write_text(rows + "\n")
        loaded = load_colormap_library(tmp_path)
        assert len(loaded) == 1
        samples = sample_colormap(loaded[0], 256)
        reference = np.repeat(np.linspace(0, 1, 256)[:, None], 3, axis=1)
        assert ((samples - reference) ** 2).mean() <= 1e-6

    def test_empty_directory_warns(self, tmp_path, caplog):
        with caplog.at_level(logging.WARNING):
            assert load_colormap_library(tmp_path) == []
        assert any("no colormaps" in r.message for r in caplog.records)

    def test_malformed_file_skipped(self, tmp_path, rng, caplog):
        (tmp_path / "bad.json").write_text("{not json")
        save_colormap(random_colormap(rng), tmp_path / "good.json")
        with caplog.at_level(logging.ERROR):
            loaded = load_colormap_library(tmp_path)
        assert [c.name for c in loaded] == ["good"]
        assert any("bad.json" in r.message for r in caplog.records)


class TestBundled:
    def test_bundle_has_gray_identity(self):
        cmaps = {c.name: c for c in bundled_colormaps()}
        assert len(cmaps) >= 5
        samples = sample_colormap(cmaps["gray"], 256)
        assert np.abs(samples - np.linspace(0, 1, 256)[:, None]).max() <= 1e-8


class TestMakeCorpus:
    def _build(self, tmp_path, rng):
        cmaps = [gray_colormap(10), random_colormap(rng)]
        cmaps[1] = Colormap(cmaps[1].control, cmaps[1].knots, name="random")
        specs = [
            FieldSpec("linear-gradient", 8, 8, 0),
            FieldSpec("radial", 8, 8, 1),
            FieldSpec("ridge", 8, 8, 2),
        ]
        return cmaps, specs, make_corpus(cmaps, specs, tmp_path / "corpus")

    def test_cross_product_count(self, tmp_path, rng):
        _, _, manifest = self._build(tmp_path, rng)
        assert len(manifest["entries"]) == 6

    def test_entries_render_consistently(self, tmp_path, rng):
        _, _, manifest = self._build(tmp_path, rng)
        root = tmp_path / "corpus"
        for entry in manifest["entries"]:
            cmap = load_colormap(root / entry["cmap"])
            field = read_field(root / entry["field"])
            image = read_image(root / entry["image"])
            rendered = render(field, cmap)
            # PNG quantization bounds the per-channel difference by half a step
            assert np.abs(rendered.pixels - image.pixels).max() <= 0.5 / 255 + 1e-9

    def test_regeneration_is_identical(self, tmp_path, rng):
        cmaps, specs, manifest = self._build(tmp_path, rng)
        again = make_corpus(cmaps, specs, tmp_path / "corpus2")
        assert [e["id"] for e in again["entries"]] == [e["id"] for e in manifest["entries"]]
        for entry in manifest["entries"]:
            a = (tmp_path / "corpus" / entry["image"]).read_bytes()
            b = (tmp_path / "corpus2" / entry["image"]).read_bytes()
            assert a == b

    def test_in_memory_entries_bit_exact(self, rng):
        cmaps = [gray_colormap(10)]
        specs = [FieldSpec("radial", 8, 8, 3)]
        entry = corpus_entries(cmaps, specs)[0]
        assert np.array_equal(entry.image.pixels, render(entry.field, entry.cmap).pixels)

    def test_empty_inputs_rejected(self, tmp_path):
        with pytest.raises(ValueError):
            make_corpus([], [FieldSpec("radial", 4, 4)], tmp_path / "x")

    def test_manifest_is_valid_json(self, tmp_path, rng):
        self._build(tmp_path, rng)
        manifest = json.loads((tmp_path / "corpus" / "manifest.json").read_text())
        assert {"id", "image", "cmap", "field"} <= set(manifest["entries"][0])
