import numpy as np
import pytest

from cmaprec.colormapping import ScalarField
from cmaprec.palette import DbscanParams, Palette, PaletteError, dbscan_1d, extract_palette
from cmaprec.recovery import RecoveryResult
from cmaprec.spline import eval_colormap, gray_colormap

from oracles import dbscan_reference


def _result(cmap, values):
    return RecoveryResult(
        cmap=cmap, field=ScalarField(values), trace=[], converged=True, direction="canonical"
    )


class TestDbscan1d:
    def test_two_well_separated_levels(self):
        values = np.concatenate([np.full(500, 0.2), np.full(500, 0.8)])
        labels = dbscan_1d(values, DbscanParams(eps=0.02))
        assert set(labels) == {0, 1}
        assert (labels[:500] == labels[0]).all()
        assert (labels[500:] == labels[500]).all()
        assert labels[0] != labels[500]

    def test_all_identical(self):
        labels = dbscan_1d(np.full(100, 0.42), DbscanParams(eps=0.02))
        assert set(labels) == {0}

    def test_matches_reference_on_random_inputs(self, rng):
        for trial in range(30):
            n = int(rng.integers(5, 200))
            values = rng.random(n)
            if trial % 3 == 0:
                # concentrate values so clusters and noise both appear
                values = np.round(values * 8) / 8 + rng.normal(0, 0.004, n)
            eps = float(rng.uniform(0.005, 0.08))
            min_pts = int(rng.integers(1, 12))
            params = DbscanParams(eps=eps, min_pts=min_pts)
            assert np.array_equal(
                dbscan_1d(values, params), dbscan_reference(values, eps, min_pts)
            ), f"trial {trial}: eps={eps} min_pts={min_pts}"

    def test_labels_follow_input_order(self, rng):
        values = rng.random(50)
        labels = dbscan_1d(values, DbscanParams(eps=0.05, min_pts=3))
        perm = rng.permutation(50)
        assert np.array_equal(dbscan_1d(values[perm], DbscanParams(eps=0.05, min_pts=3)),
                              labels[perm])

    def test_min_pts_default_floor(self):
        params = DbscanParams()
        assert params.resolve_min_pts(100) == 8
        assert params.resolve_min_pts(100_000) == 500

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            DbscanParams(eps=0.0)
        with pytest.raises(ValueError):
            DbscanParams(min_pts=0)


class TestExtractPalette:
    def test_two_level_field_under_gray(self, gray10):
        values = np.concatenate([np.full(512, 0.2), np.full(512, 0.8)]).reshape(32, 32)
        palette = extract_palette(_result(gray10, values))
        assert len(palette.entries) == 2
        assert palette.entries[0].value == pytest.approx(0.2, abs=1e-9)
        assert palette.entries[1].value == pytest.approx(0.8, abs=1e-9)
        for entry in palette.entries:
            assert np.array_equal(entry.color, eval_colormap(gray10, entry.value))

    def test_constant_field_single_entry(self, gray10):
        palette = extract_palette(_result(gray10, np.full((16, 16), 0.5)))
        assert len(palette.entries) == 1
        assert palette.entries[0].value == pytest.approx(0.5)

    def test_smooth_ramp_with_tiny_eps(self, gray10):
        values = np.linspace(0, 1, 4096).reshape(64, 64)
        try:
            palette = extract_palette(_result(gray10, values), DbscanParams(eps=1e-5))
            assert len(palette.entries) >= 1
        except PaletteError:
            pass  # all-noise outcome is acceptable, crashing is not

    def test_values_strictly_increasing(self, rng, gray10):
        values = np.round(rng.random((32, 32)) * 4) / 4
        palette = extract_palette(_result(gray10, values), DbscanParams(eps=0.01))
        diffs = np.diff([e.value for e in palette.entries])
        assert (diffs > 0).all()

    def test_cluster_count_monotone_in_eps(self, rng, gray10):
        values = (np.round(rng.random((24, 24)) * 6) / 6 + rng.normal(0, 0.002, (24, 24)))
        values = np.clip(values, 0, 1)
        counts = []
        for eps in (0.004, 0.01, 0.03, 0.1, 0.5):
            labels = dbscan_1d(values.ravel(), DbscanParams(eps=eps, min_pts=8))
            counts.append(len(set(labels[labels >= 0])))
        assert all(a >= b for a, b in zip(counts, counts[1:]))

    def test_all_noise_raises(self, gray10):
        values = np.linspace(0, 1, 256).reshape(16, 16)
        with pytest.raises(PaletteError, match="eps"):
            extract_palette(_result(gray10, values), DbscanParams(eps=1e-9, min_pts=8))

    def test_serialization(self, gray10):
        palette = extract_palette(_result(gray10, np.full((16, 16), 0.25)))
        data = palette.to_dict()
        assert data["entries"][0]["value"] == pytest.approx(0.25)
        assert len(data["entries"][0]["color"]) == 3
