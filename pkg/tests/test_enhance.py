import numpy as np
import pytest
from scipy import ndimage

from drift.buffers import ImageBuffer
from drift.color import rgb_to_ycbcr_array
from drift.enhance import (
    CaptureMetadata,
    HeuristicConfig,
    MetadataRegistry,
    ShapeMismatchError,
    ToneMaps,
    TuningProfile,
    UnknownCategoryError,
    default_profile,
    encode_metadata,
    fuse_tone,
    fuse_tone_ycc,
    heuristic_maps,
    modulate,
    profile_from_dict,
    profile_to_dict,
    read_tmaps,
    solve_oracle_maps,
    write_tmaps,
)
from drift.lut import Lut1D
from drift.tonemap_lite import ExposurePair, compute_global_context, tonemap_lite


def hdr_scene(h, w, seed, lo=0.02, hi=4.0, sat=0.3):
    # correlated channels: a luma field with bounded per-channel tinting,
    # so synthesized chroma stays representable after the display clamp
    rng = np.random.default_rng(seed)
    base = ndimage.gaussian_filter(rng.random((h, w)), 2.0)
    base = (base - base.min()) / (base.max() - base.min())
    lum = lo * np.power(hi / lo, base)
    tint = ndimage.gaussian_filter(rng.random((h, w, 3)), (4, 4, 0))
    tint = 1.0 + sat * (tint - 0.5)
    return ImageBuffer((lum[:, :, None] * tint).astype(np.float32))


def make_pair(h=48, w=48, seed=0):
    img = hdr_scene(h, w, seed)
    return tonemap_lite(img, compute_global_context(img))


def smooth_plane(h, w, seed, lo=0.0, hi=1.0):
    rng = np.random.default_rng(seed)
    p = ndimage.gaussian_filter(rng.random((h, w)), 2.0)
    p = (p - p.min()) / (p.max() - p.min())
    return (lo + (hi - lo) * p).astype(np.float32)


def make_maps(h=48, w=48, seed=1, g_lo=0.7, g_hi=1.3):
    return ToneMaps(
        w_y=smooth_plane(h, w, seed),
        w_c0=smooth_plane(h, w, seed + 1),
        w_c1=smooth_plane(h, w, seed + 2),
        g=smooth_plane(h, w, seed + 3, g_lo, g_hi),
    )


def masked_psnr(a, b, mask=None):
    d = (a.astype(np.float64) - b.astype(np.float64)) ** 2
    if mask is not None:
        d = d[mask]
    mse = float(np.mean(d))
    return 10.0 * np.log10(1.0 / max(mse, 1e-12))


class TestModulate:
    def test_strength_zero_unit_gain(self):
        pair, maps = make_pair(), make_maps()
        prof = TuningProfile(strength=0.0)
        w, s0, s1, g = modulate(maps, pair, prof)
        assert np.array_equal(w, maps.w_y.astype(np.float64))
        assert np.array_equal(s0, pair.s0_y.astype(np.float64))
        assert np.array_equal(s1, pair.s1_y.astype(np.float64))
        assert np.all(g == 1.0)

    def test_strength_one_full_gain(self):
        pair, maps = make_pair(), make_maps()
        _, _, _, g = modulate(maps, pair, TuningProfile(strength=1.0))
        assert np.allclose(g, maps.g, atol=1e-7)

    def test_gain_blend_arithmetic(self):
        # (1 - 0.5) + 0.5 * 1.6 = 1.3
        pair = make_pair(8, 8)
        maps = ToneMaps(
            w_y=np.full((8, 8), 0.5, np.float32),
            w_c0=np.full((8, 8), 0.5, np.float32),
            w_c1=np.full((8, 8), 0.5, np.float32),
            g=np.full((8, 8), 1.6, np.float32),
        )
        _, _, _, g = modulate(maps, pair, TuningProfile(strength=0.5))
        assert np.allclose(g, 1.3, atol=1e-6)

    def test_default_profile_is_identity_full_strength(self):
        prof = default_profile()
        assert prof.is_identity()
        assert prof.strength == 1.0

    def test_shape_mismatch(self):
        pair, maps = make_pair(48, 48), make_maps(32, 32)
        with pytest.raises(ShapeMismatchError):
            modulate(maps, pair, default_profile())


class TestFuseTone:
    def test_weight_endpoints(self):
        pair = make_pair()
        h, w = pair.shape
        ones = np.ones((h, w), np.float32)
        maps1 = ToneMaps(ones, ones * 0.5, ones * 0.5, ones)
        i_y, _, _, _ = fuse_tone_ycc(pair, maps1, default_profile())
        assert np.allclose(i_y, pair.s0_y, atol=1e-7)
        maps0 = ToneMaps(ones * 0.0, ones * 0.5, ones * 0.5, ones)
        i_y, _, _, _ = fuse_tone_ycc(pair, maps0, default_profile())
        assert np.allclose(i_y, pair.s1_y, atol=1e-7)

    def test_luma_arithmetic(self):
        # 0.25*0.3 + 0.75*0.7 = 0.6; with gain 1.1 -> 0.66
        s0 = np.full((4, 4), 0.3, np.float32)
        s1 = np.full((4, 4), 0.7, np.float32)
        pair = ExposurePair(s0, s1, np.zeros((4, 4, 2), np.float32),
                            np.zeros((4, 4, 2), np.float32))
        maps = ToneMaps(np.full((4, 4), 0.25, np.float32),
                        np.full((4, 4), 0.5, np.float32),
                        np.full((4, 4), 0.5, np.float32),
                        np.full((4, 4), 1.1, np.float32))
        i_y, _, it_y, _ = fuse_tone_ycc(pair, maps, default_profile())
        assert np.allclose(i_y, 0.6, atol=1e-6)
        assert np.allclose(it_y, 0.66, atol=1e-6)

    def test_strength_zero_enhanced_equals_plain(self):
        pair, maps = make_pair(seed=3), make_maps(seed=4)
        i_y, i_c, it_y, it_c = fuse_tone_ycc(pair, maps, TuningProfile(strength=0.0))
        assert np.array_equal(i_y, it_y)
        assert np.array_equal(i_c, it_c)
        img, img_t = fuse_tone(pair, maps, TuningProfile(strength=0.0))
        assert np.array_equal(img.data, img_t.data)

    def test_chroma_immune_to_gain(self):
        pair, maps = make_pair(seed=5), make_maps(seed=6, g_lo=0.25, g_hi=4.0)
        _, i_c, _, it_c = fuse_tone_ycc(pair, maps, default_profile())
        assert i_c is it_c

    def test_convex_combination_bound(self):
        pair, maps = make_pair(seed=7), make_maps(seed=8)
        prof = TuningProfile(lut_weight=Lut1D(((0, 0.1), (0.5, 0.6), (1, 0.9))))
        w, s0m, s1m, _ = modulate(maps, pair, prof)
        i_y, _, _, _ = fuse_tone_ycc(pair, maps, prof)
        lo = np.minimum(s0m, s1m) - 1e-9
        hi = np.maximum(s0m, s1m) + 1e-9
        assert np.all(i_y >= lo) and np.all(i_y <= hi)

    def test_monotone_in_weight(self):
        pair, maps = make_pair(seed=9), make_maps(seed=10)
        low = TuningProfile(lut_weight=Lut1D(((0, 0.0), (1, 0.5))))
        high = TuningProfile(lut_weight=Lut1D(((0, 0.5), (1, 1.0))))
        iy_low, _, _, _ = fuse_tone_ycc(pair, maps, low)
        iy_high, _, _, _ = fuse_tone_ycc(pair, maps, high)
        sign = np.sign(pair.s0_y.astype(np.float64) - pair.s1_y.astype(np.float64))
        assert np.all((iy_high - iy_low) * sign >= -1e-9)

    def test_output_clamped_rgb(self):
        pair, maps = make_pair(seed=11), make_maps(seed=12, g_lo=0.25, g_hi=4.0)
        img, img_t = fuse_tone(pair, maps)
        for b in (img, img_t):
            assert b.data.min() >= 0.0 and b.data.max() <= 1.0


class TestOracle:
    def test_midpoint_blend_recovers_half(self):
        pair = make_pair(seed=13)
        h, w = pair.shape
        half = np.full((h, w), 0.5, np.float32)
        maps_true = ToneMaps(half, half, half, np.ones((h, w), np.float32))
        y0, y1 = fuse_tone(pair, maps_true, default_profile())
        solved = solve_oracle_maps(pair, y0, y1)
        nondeg = np.abs(pair.s0_y.astype(np.float64) - pair.s1_y) >= 1e-3
        assert np.allclose(solved.w_y[nondeg], 0.5, atol=1e-3)

    def test_equal_targets_unit_gain(self):
        pair = make_pair(seed=14)
        maps = make_maps(*pair.shape, seed=15, g_lo=1.0, g_hi=1.0)
        y0, y1 = fuse_tone(pair, maps, default_profile())
        solved = solve_oracle_maps(pair, y0, y0)
        i_y = solved.w_y * pair.s0_y + (1 - solved.w_y) * pair.s1_y
        ok = i_y > 1e-3
        assert np.allclose(solved.g[ok], 1.0, atol=2e-3)

    def test_synthesize_invert_roundtrip(self):
        for seed in (16, 17, 18):
            pair = make_pair(seed=seed)
            maps_true = make_maps(*pair.shape, seed=seed + 100)
            y0, y1 = fuse_tone(pair, maps_true, default_profile())
            solved = solve_oracle_maps(pair, y0, y1)
            r0, r1 = fuse_tone(pair, solved, default_profile())
            nondeg = np.abs(pair.s0_y.astype(np.float64) - pair.s1_y) >= 1e-3
            mask3 = np.repeat(nondeg[:, :, None], 3, axis=2)
            assert masked_psnr(r0.data, y0.data, mask3) >= 50.0
            assert masked_psnr(r1.data, y1.data, mask3) >= 50.0

    def test_shape_mismatch(self):
        pair = make_pair(seed=19)
        img = ImageBuffer(np.zeros((8, 8, 3), np.float32))
        with pytest.raises(ShapeMismatchError):
            solve_oracle_maps(pair, img, img)


class TestMetadata:
    def test_one_hot_layout(self):
        reg = MetadataRegistry()
        vec = encode_metadata(
            CaptureMetadata("main", "denoise", iso=50, exposure_time=1 / 64), reg
        )
        assert vec.shape == (reg.n_features,)
        assert np.array_equal(vec[:3], [1, 0, 0])
        assert np.array_equal(vec[3:5], [1, 0])

    def test_iso_baseline_is_zero(self):
        vec = encode_metadata(CaptureMetadata("main", "denoise", 50, 1 / 64))
        assert vec[-2] == 0.0

    def test_iso_top_of_range(self):
        vec = encode_metadata(CaptureMetadata("main", "denoise", 3200, 1 / 64))
        assert np.isclose(vec[-2], 1.0)

    def test_exposure_normalization(self):
        vec = encode_metadata(CaptureMetadata("main", "denoise", 100, 1.0))
        assert np.isclose(vec[-1], 1.0)
        vec = encode_metadata(CaptureMetadata("main", "denoise", 100, 1 / 1024))
        assert vec[-1] == 0.0

    def test_unknown_category(self):
        with pytest.raises(UnknownCategoryError):
            encode_metadata(CaptureMetadata("tele9", "denoise", 100, 0.01))


class TestHeuristic:
    def test_full_noise_attenuation_disables_gain(self):
        pair = make_pair(seed=20)
        ctx = compute_global_context(hdr_scene(48, 48, 20))
        vec = encode_metadata(CaptureMetadata("main", "denoise", 3200, 0.01))
        maps = heuristic_maps(pair, ctx, vec, HeuristicConfig(k_noise=1.0))
        assert np.allclose(maps.g, 1.0, atol=1e-7)

    def test_flat_input_unit_gain(self):
        flat = np.full((16, 16), 0.5, np.float32)
        pair = ExposurePair(flat * 0.8, flat, np.zeros((16, 16, 2), np.float32),
                            np.zeros((16, 16, 2), np.float32))
        ctx = compute_global_context(ImageBuffer(np.full((16, 16, 3), 0.3, np.float32)))
        vec = encode_metadata(CaptureMetadata("main", "denoise", 50, 0.01))
        maps = heuristic_maps(pair, ctx, vec)
        assert np.allclose(maps.g, 1.0, atol=1e-6)

    def test_attenuation_is_linear_in_iso(self):
        pair = make_pair(seed=21)
        ctx = compute_global_context(hdr_scene(48, 48, 21))
        iso_mid = 50 * 2 ** 3.0  # iso_n = 0.5
        v0 = encode_metadata(CaptureMetadata("main", "denoise", 50, 0.01))
        v5 = encode_metadata(CaptureMetadata("main", "denoise", iso_mid, 0.01))
        cfg = HeuristicConfig(k_noise=1.0, detail_amp=0.8)
        m0 = heuristic_maps(pair, ctx, v0, cfg)
        m5 = heuristic_maps(pair, ctx, v5, cfg)
        r = np.mean(np.abs(m5.g - 1.0)) / np.mean(np.abs(m0.g - 1.0))
        assert abs(r - 0.5) < 0.05

    def test_dark_pixels_lean_on_bright_exposure(self):
        pair = make_pair(seed=22)
        ctx = compute_global_context(hdr_scene(48, 48, 22))
        vec = encode_metadata(CaptureMetadata("main", "denoise", 50, 0.01))
        maps = heuristic_maps(pair, ctx, vec)
        m = 0.5 * (pair.s0_y.astype(np.float64) + pair.s1_y)
        dark = m < 0.2
        bright = m > 0.8
        if dark.any() and bright.any():
            assert maps.w_y[dark].max() < maps.w_y[bright].min()


class TestContainers:
    def test_tmaps_roundtrip_bit_exact(self, tmp_path):
        maps = make_maps(seed=23)
        p = tmp_path / "m.tmaps"
        write_tmaps(maps, p)
        back = read_tmaps(p)
        for name in ("w_y", "w_c0", "w_c1", "g"):
            assert np.array_equal(getattr(back, name), getattr(maps, name))

    def test_tmaps_rejects_garbage(self, tmp_path):
        p = tmp_path / "bad.tmaps"
        p.write_bytes(b"NOPE1234")
        with pytest.raises(ValueError):
            read_tmaps(p)

    def test_profile_dict_roundtrip(self):
        prof = TuningProfile(
            lut_weight=Lut1D(((0, 0), (0.3, 0.4), (1, 1))),
            lut_exp0=Lut1D(((0, 0.1), (1, 0.9))),
            strength=0.35,
        )
        back = profile_from_dict(profile_to_dict(prof))
        assert back == prof

    def test_partial_patch_over_base(self):
        base = TuningProfile(strength=0.8)
        patched = profile_from_dict({"lut_exp1": [[0, 0], [0.5, 0.7], [1, 1]]}, base)
        assert patched.strength == 0.8
        assert patched.lut_exp1.points == ((0.0, 0.0), (0.5, 0.7), (1.0, 1.0))
        assert patched.lut_weight.is_identity()
