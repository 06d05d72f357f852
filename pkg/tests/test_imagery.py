from datetime import date

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from parkwatch.errors import SceneError
from parkwatch.imagery import (
    ExclusionRect,
    band_index,
    composite_false_color,
    estimate_scale,
    ndvi,
    scene_stats,
    threshold_mask,
    trend_series,
)
from parkwatch.ingest import BAND_IDS, MultiSpectralScene

D = date(2016, 6, 1)


def _scene(**overrides):
    bands = {b: np.full((20, 20), 0.3) for b in BAND_IDS}
    bands.update(overrides)
    return MultiSpectralScene(D, bands)


class TestEstimateScale:
    def test_published_lake_numbers(self):
        s = estimate_scale((96, 98), 3000.0)
        assert s.diag_pixels == pytest.approx(137.186, abs=0.001)
        assert abs(s.feet_per_pixel - 21.87) <= 0.01 + 1e-9
        assert abs(s.meters_per_pixel - 6.66) <= 0.01
        assert abs(s.image_extent_feet - 14209.0) <= 5.0

    def test_three_four_five_triangle(self):
        s = estimate_scale((3, 4), 5.0)
        assert s.feet_per_pixel == 1.0
        assert s.meters_per_pixel == pytest.approx(0.3048)
        assert s.image_extent_feet == 650.0

    def test_extent_consistent_with_feet_per_pixel(self):
        s = estimate_scale((96, 98), 3000.0)
        assert s.image_extent_feet == pytest.approx(650 * s.feet_per_pixel, abs=1e-9)
        assert s.meters_per_pixel == pytest.approx(s.feet_per_pixel * 0.3048, abs=1e-12)

    def test_doubling_bbox_halves_scale(self):
        s1 = estimate_scale((96, 98), 3000.0)
        s2 = estimate_scale((192, 196), 3000.0)
        assert s2.feet_per_pixel == pytest.approx(s1.feet_per_pixel / 2, abs=0.01)

    def test_zero_dimension_rejected(self):
        with pytest.raises(ValueError):
            estimate_scale((0, 98), 3000.0)


class TestComposite:
    def test_equal_bands_give_gray(self):
        scene = _scene()
        rgb = composite_false_color(scene, ("B1", "B2", "B3"))
        assert rgb.shape == (20, 20, 3)
        assert np.allclose(rgb[..., 0], rgb[..., 1])
        assert np.allclose(rgb[..., 1], rgb[..., 2])

    def test_high_b4_region_red_dominant(self):
        b4 = np.full((20, 20), 0.2)
        b4[5:10, 5:10] = 0.9
        rgb = composite_false_color(_scene(B4=b4), ("B4", "B3", "B2"))
        region = rgb[5:10, 5:10]
        assert (region[..., 0] > region[..., 1]).all()
        assert (region[..., 0] > region[..., 2]).all()

    def test_high_b5_region_red_dominant_in_dryness_triple(self):
        b5 = np.full((20, 20), 0.2)
        b5[0:4, 0:4] = 0.95
        rgb = composite_false_color(_scene(B5=b5), ("B5", "B4", "B2"))
        region = rgb[0:4, 0:4]
        assert (region[..., 0] > region[..., 1]).all()

    def test_unknown_band_rejected(self):
        with pytest.raises(SceneError, match="B9"):
            composite_false_color(_scene(), ("B9", "B3", "B2"))

    def test_clamping_idempotent(self):
        scene = _scene()
        rgb1 = composite_false_color(scene, ("B4", "B3", "B2"))
        rgb2 = np.clip(rgb1, 0.0, 1.0)
        assert np.array_equal(rgb1, rgb2)


class TestNdvi:
    def test_equal_bands_zero(self):
        index = ndvi(_scene(B3=np.full((20, 20), 0.4), B4=np.full((20, 20), 0.4)))
        assert np.all(index.values == 0.0)

    def test_point_six_minus_point_two(self):
        index = ndvi(_scene(B3=np.full((20, 20), 0.2), B4=np.full((20, 20), 0.6)))
        assert np.allclose(index.values, 0.5)

    def test_zero_red_gives_one(self):
        index = ndvi(_scene(B3=np.zeros((20, 20)), B4=np.full((20, 20), 0.7)))
        assert np.all(index.values == 1.0)

    def test_degenerate_pixels_tallied(self):
        b3 = np.full((20, 20), 0.2)
        b4 = np.full((20, 20), 0.6)
        b3[0, :3] = b4[0, :3] = 0.0
        index = ndvi(_scene(B3=b3, B4=b4))
        assert index.degenerate_count == 3
        assert np.all(index.values[0, :3] == 0.0)

    @given(st.integers(0, 2**32 - 1))
    @settings(max_examples=25, deadline=None)
    def test_range_always_within_unit(self, seed):
        rng = np.random.default_rng(seed)
        scene = _scene(B3=rng.uniform(0, 1, (20, 20)), B4=rng.uniform(0, 1, (20, 20)))
        index = ndvi(scene)
        assert index.values.min() >= -1.0
        assert index.values.max() <= 1.0
        finite = index.values.size - index.degenerate_count
        assert finite + index.degenerate_count == index.values.size


class TestThresholdMask:
    def test_uniform_above_threshold_full_fraction(self):
        index = ndvi(_scene(B3=np.full((20, 20), 0.2), B4=np.full((20, 20), 0.3)))
        _, fraction, _ = threshold_mask(index, 0.1)
        assert fraction == 1.0

    def test_all_below_zero_fraction(self):
        index = band_index(_scene(B5=np.full((20, 20), 0.4)), "B5")
        _, fraction, _ = threshold_mask(index, 0.7)
        assert fraction == 0.0

    def test_hand_computed_fixture_with_exclusion(self):
        # 20x20 grid: left half (x<10) above the 0.7 B5 threshold; the
        # quarter-image rect x,y in [0,9] is excluded and overlaps it.
        b5 = np.full((20, 20), 0.2)
        b5[:, :10] = 0.9
        index = band_index(_scene(B5=b5), "B5")
        rect = ExclusionRect(0, 0, 9, 9)
        mask, fraction, excluded = threshold_mask(index, 0.7, [rect])
        # 400 px total, 100 excluded; above-threshold & kept: x<10, y>=10 -> 100
        assert excluded == 100
        assert mask.sum() == 100
        assert fraction == pytest.approx(100 / 300)

    def test_total_exclusion_undefined(self):
        index = band_index(_scene(), "B5")
        with pytest.raises(SceneError, match="undefined"):
            threshold_mask(index, 0.5, [ExclusionRect(0, 0, 19, 19)])

    def test_fraction_monotone_in_threshold(self):
        rng = np.random.default_rng(3)
        index = band_index(_scene(B5=rng.uniform(0, 1, (20, 20))), "B5")
        fractions = [threshold_mask(index, t)[1] for t in np.linspace(0, 1, 20)]
        assert all(a >= b for a, b in zip(fractions, fractions[1:]))

    def test_bigger_exclusion_never_increases_kept_count(self):
        rng = np.random.default_rng(8)
        index = band_index(_scene(B5=rng.uniform(0, 1, (20, 20))), "B5")
        small = ExclusionRect(2, 2, 6, 6)
        big = ExclusionRect(2, 2, 10, 10)
        mask_s, _, excl_s = threshold_mask(index, 0.5, [small])
        mask_b, _, excl_b = threshold_mask(index, 0.5, [big])
        assert excl_b >= excl_s
        outside = np.ones((20, 20), dtype=bool)
        outside[2:11, 2:11] = False
        assert np.array_equal(mask_s[outside], mask_b[outside])

    def test_rect_validation(self):
        with pytest.raises(ValueError):
            ExclusionRect(5, 5, 4, 9)
        with pytest.raises(ValueError):
            threshold_mask(band_index(_scene(), "B5"), 0.5, [ExclusionRect(0, 0, 25, 5)])


class TestWriters:
    def test_index_pgm_header_and_size(self, tmp_path):
        from parkwatch.imagery import write_index_pgm
        index = ndvi(_scene(B3=np.full((20, 20), 0.2), B4=np.full((20, 20), 0.6)))
        path = tmp_path / "ndvi.pgm"
        write_index_pgm(path, index)
        blob = path.read_bytes()
        assert blob.startswith(b"P5\n20 20\n255\n")
        assert len(blob) == len(b"P5\n20 20\n255\n") + 400

    def test_composite_png_round_trip(self, tmp_path):
        from PIL import Image
        from parkwatch.imagery import write_composite_png
        rgb = composite_false_color(_scene(), ("B4", "B3", "B2"))
        path = tmp_path / "composite.png"
        write_composite_png(path, rgb)
        with Image.open(path) as img:
            assert img.size == (20, 20)
            assert img.mode == "RGB"


class TestTrends:
    def _stats(self, fractions):
        out = []
        for i, f in enumerate(fractions):
            b4 = np.full((20, 20), 0.2)
            n = int(round(f * 400))
            b4.ravel()[:n] = 0.9
            scene = MultiSpectralScene(date(2014 + i, 6, 1), {
                **{b: np.full((20, 20), 0.3) for b in BAND_IDS}, "B4": b4,
                "B3": np.full((20, 20), 0.2)})
            out.append(scene_stats(scene))
        return out

    def test_delta_arithmetic(self):
        stats = self._stats([0.5, 0.4])
        deltas = trend_series(stats)
        assert len(deltas) == 1
        assert deltas[0].vegetated == pytest.approx(-0.1)

    def test_single_scene_no_deltas(self):
        assert trend_series(self._stats([0.5])) == []

    def test_monotone_decline_all_negative(self):
        stats = self._stats([0.5, 0.45, 0.4, 0.35])
        deltas = trend_series(stats)
        assert len(deltas) == 3
        assert all(d.vegetated < 0 for d in deltas)
