import numpy as np
import pytest
from scipy import ndimage

from drift.buffers import ColorSpace, ImageBuffer, InvalidImageError, constant_image
from drift.color import luma
from drift.tonemap_lite import (
    ExposurePair,
    GlobalContext,
    LiteParams,
    compute_global_context,
    derive_gains,
    tone_curve,
    tonemap_lite,
)


def hdr_scene(h, w, seed, lo=0.01, hi=6.0):
    rng = np.random.default_rng(seed)
    data = ndimage.gaussian_filter(rng.random((h, w, 3)), sigma=(2, 2, 0))
    data = (data - data.min()) / (data.max() - data.min())
    # log-uniform radiance spread
    rad = lo * np.power(hi / lo, data)
    return ImageBuffer(rad.astype(np.float32))


class TestGlobalContext:
    def test_constant_image(self):
        ctx = compute_global_context(constant_image(0.25, 64, 64))
        for v in ctx.percentiles.values():
            assert np.isclose(v, 0.25, atol=1e-7)
        assert np.isclose(ctx.mean_log_luma, -2.0, atol=1e-6)

    def test_two_value_image(self):
        data = np.full((128, 128, 3), 0.1, dtype=np.float32)
        data[:, 64:, :] = 0.9
        ctx = compute_global_context(ImageBuffer(data))
        p = ctx.percentiles
        assert np.isclose(p["p1"], 0.1, atol=1e-6)
        assert np.isclose(p["p99"], 0.9, atol=1e-6)
        assert any(np.isclose(p["p50"], v, atol=1e-6) for v in (0.1, 0.9))

    def test_histogram_normalized(self):
        ctx = compute_global_context(hdr_scene(100, 80, 0))
        assert abs(ctx.log_luma_histogram.sum() - 1.0) < 1e-9

    def test_all_zero_image_degenerates_to_floor(self):
        ctx = compute_global_context(constant_image(0.0, 32, 32))
        for v in ctx.percentiles.values():
            assert np.isclose(v, 1e-6)

    def test_thumbnail_cap(self):
        ctx = compute_global_context(hdr_scene(100, 520, 1))
        assert max(ctx.thumb_size) <= 256
        assert ctx.source_size == (520, 100)


class TestToneMapLite:
    def test_constant_hits_anchor_targets(self):
        img = constant_image(0.18, 32, 32)
        ctx = compute_global_context(img)
        pair = tonemap_lite(img, ctx)
        # constant image: p90 == p50 == 0.18, so the anchors land exactly
        assert np.allclose(pair.s0_y, 0.40, atol=1e-5)
        assert np.allclose(pair.s1_y, 0.70, atol=1e-5)

    def test_zero_image_maps_to_zero(self):
        img = constant_image(0.0, 16, 16)
        ctx = compute_global_context(img)
        pair = tonemap_lite(img, ctx)
        assert np.allclose(pair.s0_y, 0.0)
        assert np.allclose(pair.s1_y, 0.0)

    def test_pointwise_ordering(self):
        img = hdr_scene(64, 64, 2)
        pair = tonemap_lite(img, compute_global_context(img))
        assert np.all(pair.s0_y <= pair.s1_y + 1e-6)
        assert np.all(pair.s0_y >= 0) and np.all(pair.s1_y <= 1)

    def test_monotone_in_luma(self):
        img = hdr_scene(48, 48, 3)
        pair = tonemap_lite(img, compute_global_context(img))
        y = luma(img.data).ravel()
        order = np.argsort(y)
        for plane in (pair.s0_y, pair.s1_y):
            v = plane.astype(np.float64).ravel()[order]
            assert np.all(np.diff(v) >= -1e-6)

    def test_exposure_invariance(self):
        img = hdr_scene(64, 64, 4)
        pair1 = tonemap_lite(img, compute_global_context(img))
        img2 = img.with_data(img.data * 2.0)
        pair2 = tonemap_lite(img2, compute_global_context(img2))
        assert np.max(np.abs(pair1.s0_y - pair2.s0_y)) < 1e-3
        assert np.max(np.abs(pair1.s1_y - pair2.s1_y)) < 1e-3

    def test_tile_independence(self):
        img = hdr_scene(64, 96, 5)
        ctx = compute_global_context(img)
        full = tonemap_lite(img, ctx)
        tile = ImageBuffer(img.data[16:48, 32:80, :])
        part = tonemap_lite(tile, ctx)
        assert np.array_equal(part.s0_y, full.s0_y[16:48, 32:80])
        assert np.array_equal(part.s1_c, full.s1_c[16:48, 32:80])

    def test_closed_form_curve_values(self):
        img = constant_image(0.3, 8, 8)
        ctx = compute_global_context(img)
        g_dark, g_bright = derive_gains(ctx)
        pair = tonemap_lite(img, ctx)
        assert np.allclose(pair.s0_y, tone_curve(np.array(g_dark * 0.3)), atol=1e-6)
        assert np.allclose(pair.s1_y, tone_curve(np.array(g_bright * 0.3)), atol=1e-6)

    def test_pair_ordering_validated(self):
        good = np.full((4, 4), 0.5, dtype=np.float32)
        with pytest.raises(ValueError):
            ExposurePair(
                s0_y=good + 0.2,
                s1_y=good,
                s0_c=np.zeros((4, 4, 2), np.float32),
                s1_c=np.zeros((4, 4, 2), np.float32),
            )

    def test_lite_params_validation(self):
        with pytest.raises(ValueError):
            LiteParams(dark_target=0.8, bright_target=0.4)
