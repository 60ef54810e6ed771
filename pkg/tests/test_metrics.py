import numpy as np
import pytest

from cmaprec.metrics import (
    EVAL_COLUMNS,
    MetricReport,
    colormap_mse,
    colormap_ssim,
    colormap_strip,
    compare_colormaps,
    evaluate_corpus,
    psnr,
    ssim,
)
from cmaprec.spline import Colormap, gray_colormap, sample_colormap, save_colormap
from cmaprec.synth import FieldSpec, make_corpus

from conftest import random_colormap
from oracles import ssim_reference


class TestColormapMse:
    def test_identical(self, gray10):
        assert colormap_mse(gray10, gray10) == 0.0

    def test_reverse_ignoring_direction(self, rng):
        cmap = random_colormap(rng)
        assert colormap_mse(cmap, cmap.reversed(), direction="ignoring") <= 1e-12

    def test_gray_vs_constant_half(self, gray10):
        flat = Colormap.from_control(np.full((10, 3), 0.5))
        expected = float(((np.linspace(0, 1, 256) - 0.5) ** 2).mean())
        got = colormap_mse(gray10, flat, direction="considering")
        assert got == pytest.approx(expected, abs=1e-9)
        assert got == pytest.approx(0.0833, abs=1e-3)

    def test_ignoring_never_exceeds_considering(self, rng):
        for _ in range(20):
            a = random_colormap(rng)
            b = random_colormap(rng)
            assert colormap_mse(a, b, direction="ignoring") <= colormap_mse(
                a, b, direction="considering"
            )

    def test_bad_direction_rejected(self, gray10):
        with pytest.raises(ValueError):
            colormap_mse(gray10, gray10, direction="sideways")


class TestPsnr:
    def test_closed_forms(self):
        assert psnr(0.01) == pytest.approx(20.0)
        assert psnr(1.0) == pytest.approx(0.0)

    def test_floor(self):
        assert psnr(0.0) == pytest.approx(120.0)

    def test_negative_rejected(self):
        with pytest.raises(ValueError):
            psnr(-1e-9)


class TestSsim:
    def test_self_similarity_exact(self, rng):
        image = rng.random((16, 16, 3))
        assert ssim(image, image) == 1.0

    def test_contrast_inversion_degrades(self, rng):
        image = rng.random((16, 16))
        assert ssim(image, 1.0 - image) < 1.0

    def test_matches_naive_reference_2d(self, rng):
        for _ in range(3):
            a = rng.random((16, 16))
            b = rng.random((16, 16))
            assert ssim(a, b) == pytest.approx(ssim_reference(a, b), abs=1e-9)

    def test_matches_naive_reference_rgb(self, rng):
        a = rng.random((16, 16, 3))
        b = np.clip(a + 0.1 * rng.standard_normal((16, 16, 3)), 0, 1)
        assert ssim(a, b) == pytest.approx(ssim_reference(a, b), abs=1e-9)

    def test_strip_uses_1d_window(self, rng):
        a = colormap_strip(random_colormap(rng), 64)
        b = colormap_strip(random_colormap(rng), 64)
        assert ssim(a, b) == pytest.approx(ssim_reference(a, b), abs=1e-9)

    def test_shape_mismatch_rejected(self, rng):
        with pytest.raises(ValueError):
            ssim(rng.random((16, 16)), rng.random((16, 17)))

    def test_window_larger_than_image_rejected(self, rng):
        with pytest.raises(ValueError):
            ssim(rng.random((8, 8)), rng.random((8, 8)))


class TestCompare:
    def test_report_fields(self, rng):
        reports = compare_colormaps(random_colormap(rng), random_colormap(rng))
        assert set(reports) == {"ignoring", "considering"}
        assert reports["ignoring"].mse <= reports["considering"].mse
        assert isinstance(reports["ignoring"], MetricReport)

    def test_colormap_ssim_ignoring_takes_better(self, rng):
        a = random_colormap(rng)
        b = random_colormap(rng)
        assert colormap_ssim(a, b, direction="ignoring") >= colormap_ssim(
            a, b, direction="considering"
        )


class TestEvaluateCorpus:
    def _corpus(self, tmp_path, rng):
        cmaps = [gray_colormap(10)]
        specs = [FieldSpec("radial", 8, 8, 0), FieldSpec("ridge", 8, 8, 1)]
        manifest = make_corpus(cmaps, specs, tmp_path / "corpus")
        return manifest, tmp_path / "corpus"

    def test_perfect_recovery_scores(self, tmp_path, rng):
        manifest, corpus_dir = self._corpus(tmp_path, rng)
        results = tmp_path / "results"
        for entry in manifest["entries"]:
            out = results / entry["id"]
            out.mkdir(parents=True)
            save_colormap(gray_colormap(10), out / "cmap.json")
        rows, mean_row, skipped = evaluate_corpus(manifest, corpus_dir, results)
        assert not skipped
        assert mean_row["mse_ign"] <= 1e-12
        assert mean_row["ssim_ign"] == pytest.approx(1.0, abs=1e-9)

    def test_single_entry_mean_equals_row(self, tmp_path, rng):
        manifest, corpus_dir = self._corpus(tmp_path, rng)
        manifest = {"entries": manifest["entries"][:1]}
        results = tmp_path / "results"
        out = results / manifest["entries"][0]["id"]
        out.mkdir(parents=True)
        save_colormap(random_colormap(rng), out / "cmap.json")
        rows, mean_row, _ = evaluate_corpus(manifest, corpus_dir, results)
        for col in EVAL_COLUMNS[1:]:
            assert mean_row[col] == rows[0][col]

    def test_mean_recomputation_matches(self, tmp_path, rng):
        manifest, corpus_dir = self._corpus(tmp_path, rng)
        results = tmp_path / "results"
        for entry in manifest["entries"]:
            out = results / entry["id"]
            out.mkdir(parents=True)
            save_colormap(random_colormap(rng), out / "cmap.json")
        rows, mean_row, _ = evaluate_corpus(manifest, corpus_dir, results)
        for col in EVAL_COLUMNS[1:]:
            assert abs(mean_row[col] - np.mean([r[col] for r in rows])) <= 1e-12

    def test_missing_results_skipped(self, tmp_path, rng):
        manifest, corpus_dir = self._corpus(tmp_path, rng)
        results = tmp_path / "results"
        first = manifest["entries"][0]["id"]
        out = results / first
        out.mkdir(parents=True)
        save_colormap(gray_colormap(10), out / "cmap.json")
        rows, _, skipped = evaluate_corpus(manifest, corpus_dir, results)
        assert [r["id"] for r in rows] == [first]
        assert skipped == [manifest["entries"][1]["id"]]
