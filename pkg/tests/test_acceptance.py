"""Acceptance suite: one test per release criterion, one line per verdict.

Run with `pytest -s tests/test_acceptance.py` to see the PASS lines.
"""

import time

import numpy as np
import pytest
from scipy import ndimage

from drift.buffers import ColorSpace, ImageBuffer, constant_image
from drift.burst import (
    BurstSpec,
    generate_handshake_pool,
    read_pool,
    sample_handshake_group,
    synthesize_burst,
    warp,
    write_pool,
)
from drift.cli import main as cli_main
from drift.enhance import (
    ToneMaps,
    TuningProfile,
    default_profile,
    fuse_tone,
    fuse_tone_ycc,
    modulate,
    read_tmaps,
    solve_oracle_maps,
    write_tmaps,
)
from drift.fusion import ExposureFrame, deghost, fuse_hdr
from drift.homography import Homography, estimate_homography
from drift.io import read_lfr, write_lfr
from drift.lut import Lut1D
from drift.metrics import (
    IdentityExtractor,
    LossWeights,
    apl,
    generator_objective,
    l1,
    make_default_extractor,
    psnr,
    ssim,
    tonemap_loss,
)
from drift.pipeline import (
    PipelineConfig,
    compute_heuristic_maps,
    render_tonemap,
)
from drift.pyramid import build_laplacian, reconstruct
from drift.reference import ReferenceConfig, render_targets
from drift.service import Preset, PresetStore
from drift.tiling import mean_gradient, plan_tiles, run_tiled, seam_energy
from drift.tonemap_lite import compute_global_context, tonemap_lite


def report(criterion: int, text: str):
    print(f"\n[PASS] criterion {criterion}: {text}")


def hdr_scene(h, w, seed, lo=0.02, hi=8.0, sat=0.3):
    rng = np.random.default_rng(seed)
    base = ndimage.gaussian_filter(rng.random((h, w)), 2.0)
    base = (base - base.min()) / (base.max() - base.min())
    lum = lo * np.power(hi / lo, base)
    tint = 1.0 + sat * (ndimage.gaussian_filter(rng.random((h, w, 3)), (4, 4, 0)) - 0.5)
    return ImageBuffer((lum[:, :, None] * tint).astype(np.float32))


def smooth_plane(h, w, seed, lo=0.0, hi=1.0):
    rng = np.random.default_rng(seed)
    p = ndimage.gaussian_filter(rng.random((h, w)), 2.0)
    p = (p - p.min()) / (p.max() - p.min())
    return (lo + (hi - lo) * p).astype(np.float32)


def analytic_scene(h=384, w=512):
    yy, xx = np.mgrid[0:h, 0:w].astype(np.float64)
    base = 0.05 + 0.4 * (xx / w + yy / h)
    blob1 = 0.08 * np.exp(-(((xx - 0.3 * w) ** 2 + (yy - 0.3 * h) ** 2)) / (2 * 100 ** 2))
    blob2 = 0.06 * np.exp(-(((xx - 0.75 * w) ** 2 + (yy - 0.7 * h) ** 2)) / (2 * 120 ** 2))
    s = np.clip(base + blob1 + blob2, 0.01, 1)
    return ImageBuffer(np.stack([s, s * 0.95, s * 0.9], axis=2).astype(np.float32))


def test_criterion_1_pyramid_roundtrip():
    rng = np.random.default_rng(2024)
    start = time.time()
    worst = 0.0
    for _ in range(50):
        img = ImageBuffer(rng.random((256, 256, 3), dtype=np.float32))
        back = reconstruct(build_laplacian(img, 5))
        worst = max(worst, float(np.max(np.abs(back.data - img.data))))
    elapsed = time.time() - start
    assert worst < 1e-6, f"max abs error {worst}"
    assert elapsed < 10.0, f"took {elapsed:.1f}s"
    report(1, f"pyramid round-trip, 50 images, max err {worst:.2e}, {elapsed:.1f}s")


def test_criterion_2_fusion_algebra():
    rng = np.random.default_rng(7)
    h, w = 100, 100  # 1e4 randomized pixels per property
    s0 = np.minimum(rng.random((h, w)), rng.random((h, w))).astype(np.float32)
    s1 = np.maximum(s0 + rng.random((h, w), dtype=np.float32) * (1 - s0), s0)
    from drift.tonemap_lite import ExposurePair

    pair = ExposurePair(s0, s1,
                        (rng.random((h, w, 2)).astype(np.float32) - 0.5) * 0.4,
                        (rng.random((h, w, 2)).astype(np.float32) - 0.5) * 0.4)
    g = (0.25 + rng.random((h, w)) * 3.75).astype(np.float32)
    wc0 = rng.random((h, w)).astype(np.float32)
    wc1 = rng.random((h, w)).astype(np.float32)

    # endpoint cases
    ones = np.ones((h, w), np.float32)
    for w_y, target in ((ones, s0), (ones * 0, s1)):
        maps = ToneMaps(w_y, wc0, wc1, g)
        i_y, _, _, _ = fuse_tone_ycc(pair, maps, default_profile())
        assert np.allclose(i_y, target, atol=1e-7)

    maps = ToneMaps(rng.random((h, w)).astype(np.float32), wc0, wc1, g)

    # S = 0 -> enhanced output identical to plain
    i_y, i_c, it_y, it_c = fuse_tone_ycc(pair, maps, TuningProfile(strength=0.0))
    assert np.array_equal(i_y, it_y) and np.array_equal(i_c, it_c)

    # S = 1 -> modulated gain equals the map
    _, _, _, g_mod = modulate(maps, pair, TuningProfile(strength=1.0))
    assert np.allclose(g_mod, g, atol=1e-7)

    # convex combination bound
    i_y, _, _, _ = fuse_tone_ycc(pair, maps, default_profile())
    assert np.all(i_y >= np.minimum(s0, s1) - 1e-9)
    assert np.all(i_y <= np.maximum(s0, s1) + 1e-9)

    # chroma immunity: enhanced chroma is the plain chroma, bit for bit
    _, i_c, _, it_c = fuse_tone_ycc(pair, maps, default_profile())
    assert it_c is i_c
    report(2, "fusion algebra: endpoints, S=0, S=1, convexity, chroma immunity")


def test_criterion_3_oracle_inversion():
    worst = 1e9
    for seed in range(20):
        img = hdr_scene(64, 64, 100 + seed)
        pair = tonemap_lite(img, compute_global_context(img))
        h, w = pair.shape
        maps_true = ToneMaps(
            smooth_plane(h, w, seed + 1),
            smooth_plane(h, w, seed + 2),
            smooth_plane(h, w, seed + 3),
            smooth_plane(h, w, seed + 4, 0.7, 1.3),
        )
        y0, y1 = fuse_tone(pair, maps_true, default_profile())
        solved = solve_oracle_maps(pair, y0, y1)
        r0, r1 = fuse_tone(pair, solved, default_profile())
        nondeg = np.abs(pair.s0_y.astype(np.float64) - pair.s1_y) >= 1e-3
        mask = np.repeat(nondeg[:, :, None], 3, axis=2)
        for rendered, target in ((r0, y0), (r1, y1)):
            err = (rendered.data.astype(np.float64) - target.data) ** 2
            p = 10 * np.log10(1.0 / max(float(err[mask].mean()), 1e-12))
            worst = min(worst, p)
    assert worst >= 50.0, f"worst PSNR {worst:.2f} dB"
    report(3, f"oracle inversion over 20 scenes, worst PSNR {worst:.2f} dB")


def test_criterion_4_reference_matching():
    worst_p, worst_s = 1e9, 1.0
    for seed in range(10):
        img = hdr_scene(128, 128, 200 + seed)
        ctx = compute_global_context(img)
        pair = tonemap_lite(img, ctx)
        y0, y1 = render_targets(img, ctx, ReferenceConfig())
        maps = solve_oracle_maps(pair, y0, y1)
        plain, enhanced = fuse_tone(pair, maps, default_profile())
        worst_p = min(worst_p, psnr(plain, y0), psnr(enhanced, y1))
        worst_s = min(worst_s, ssim(plain, y0), ssim(enhanced, y1))
    assert worst_p >= 45.0, f"worst PSNR {worst_p:.2f} dB"
    assert worst_s >= 0.99, f"worst SSIM {worst_s:.4f}"
    report(4, f"reference match over 10 scenes, worst {worst_p:.1f} dB / {worst_s:.4f} SSIM")


def test_criterion_5_tiling_equivalence():
    img = analytic_scene()
    cfg = PipelineConfig()
    ctx = compute_global_context(img)
    meta = np.zeros(cfg.registry.n_features)
    maps = compute_heuristic_maps(img, ctx, meta, cfg)
    full = render_tonemap(img, ctx=ctx, maps=maps, cfg=cfg)
    plan = plan_tiles(img.width, img.height, 4, 4, 50)
    tiled = render_tonemap(img, ctx=ctx, maps=maps, cfg=cfg, plan=plan)
    diff = float(np.max(np.abs(tiled.data.astype(np.float64) - full.data)))
    assert diff < 1e-6, f"tiled vs full max abs {diff}"

    energy = seam_energy(tiled, plan)
    threshold = 1e-3 * mean_gradient(tiled)
    assert abs(energy) < threshold, f"seam {energy:.2e} vs {threshold:.2e}"

    def offset_stage(tile_img, tile, _ctx, _maps):
        k = (tile.index[0] * 4 + tile.index[1]) / 100.0
        return tile_img.with_data((tile_img.astype64() + k).astype(np.float32))

    plan0 = plan_tiles(img.width, img.height, 4, 4, 0)
    seamed = run_tiled(img, plan0, offset_stage)
    adv = seam_energy(seamed, plan0)
    assert adv > 5 * threshold, f"adversarial {adv:.2e} not above 5x threshold"
    report(5, f"tiling: max diff {diff:.1e}, seam {abs(energy):.1e} < {threshold:.1e}, "
              f"adversarial {adv:.1e}")


def test_criterion_6_hdr_fusion_and_deghost():
    radiance = np.full((192, 192, 3), 0.3, dtype=np.float64)
    radiance[48:144, 48:144, :] = 4.0
    ev0 = ImageBuffer(np.clip(radiance, 0, 1).astype(np.float32))
    evm = ImageBuffer((radiance / 8.0).astype(np.float32))
    fused = fuse_hdr(ExposureFrame(ev0, 1.0), ExposureFrame(evm, 1 / 8), tau=0.1)
    interior = fused.data[72:120, 72:120, :]
    rel = np.max(np.abs(interior - 4.0) / 4.0)
    assert rel < 0.05, f"highlight error {rel:.3f}"

    img = ImageBuffer(smooth_plane(64, 64, 9)[:, :, None].repeat(3, axis=2) * 0.5 + 0.2)
    assert np.array_equal(deghost(img, img, tau=0.1).data, img.data)
    moved = img.with_data(np.clip(img.data + 0.05, 0, 1))
    assert np.array_equal(deghost(img, moved, tau=0.0).data, img.data)
    ref = constant_image(0.4, 96, 96)
    aux_data = ref.data.copy()
    aux_data[32:64, 32:64, :] += 0.5
    out = deghost(ref, ImageBuffer(aux_data), tau=0.1)
    assert np.allclose(out.data[40:56, 40:56], 0.4, atol=1e-6)
    assert np.allclose(out.data[:16, :16], aux_data[:16, :16], atol=1e-7)
    report(6, f"HDR fusion: highlight within {rel * 100:.2f}%, deghost suite green")


def test_criterion_7_burst_and_alignment():
    rng = np.random.default_rng(11)
    img = ImageBuffer(
        ndimage.gaussian_filter(rng.random((128, 128, 3)), (2, 2, 0)).astype(np.float32))
    h = Homography(np.array([[1.0, 0.01, 2.5], [-0.008, 1.0, -1.5], [0, 0, 1.0]]))
    back = warp(warp(img, h), h.inverse())
    crop = (slice(16, -16), slice(16, -16))
    err = np.mean((back.data[crop].astype(np.float64) - img.data[crop]) ** 2)
    rt_psnr = 10 * np.log10(1.0 / max(err, 1e-12))
    assert rt_psnr > 40.0

    true = Homography(np.array([[1.01, 0.02, 5.0], [-0.015, 0.99, -3.0],
                                [1e-5, -2e-5, 1.0]]))
    src = rng.uniform(10, 240, size=(50, 2))
    dst = true.apply(src)
    dst[:10] = rng.uniform(0, 250, size=(10, 2))  # 20% outliers
    est = estimate_homography(src, dst, iters=500, inlier_px=1.0, seed=1)
    probe = rng.uniform(10, 240, size=(30, 2))
    reproj = np.sqrt(((est.apply(probe) - true.apply(probe)) ** 2).sum(axis=1))
    assert np.max(reproj) < 0.5

    gt = constant_image(0.5, 400, 500)
    group = tuple(Homography.identity() for _ in range(10))
    spec = BurstSpec(noise_read=0.005, noise_shot=0.001)
    frames = synthesize_burst(gt, group, spec, rng_seed=5)
    assert len(frames) == 11
    samples = frames[0].data.astype(np.float64).ravel()
    assert samples.size >= 1e5
    expected = 0.001 * 0.5 + 0.005 ** 2
    assert abs(samples.var() - expected) / expected < 0.10

    pool = generate_handshake_pool(6, 128, 128, seed=2)
    assert all(len(g) == 10 for g in pool.groups)
    report(7, f"burst: warp round-trip {rt_psnr:.1f} dB, RANSAC {np.max(reproj):.2f} px, "
              f"noise var within {abs(samples.var() - expected) / expected * 100:.1f}%")


def test_criterion_8_metric_suite():
    x = ImageBuffer(np.random.default_rng(3).random((32, 32, 3), dtype=np.float32))
    fx = make_default_extractor()
    assert apl(fx, x, x) == 0.0
    y = ImageBuffer(np.random.default_rng(4).random((32, 32, 3), dtype=np.float32))
    assert np.isclose(apl(IdentityExtractor(), x, y), l1(x, y), atol=1e-12)
    assert np.isclose(
        psnr(constant_image(0.0, 8, 8), constant_image(0.1, 8, 8)), 20.0, atol=1e-9)
    assert abs(ssim(x, x) - 1.0) < 1e-9
    assert np.isclose(
        generator_objective(1.0, 0.5, 2.0, LossWeights(0.1, 0.01)), 1.07, atol=1e-12)
    y0, y1 = x, y
    assert tonemap_loss(y0, y1, y0, y1) < 1e-12
    other = ImageBuffer(np.random.default_rng(5).random((32, 32, 3), dtype=np.float32))
    assert tonemap_loss(y0, other, y0, y1) > tonemap_loss(y0, y1, y0, y1)
    a = tonemap_loss(y0, y1, y0, y1, strict_equation=True)
    b = tonemap_loss(y0, other, y0, y1, strict_equation=True)
    assert np.isclose(a, b, atol=1e-12)
    report(8, "metric suite: apl, psnr, ssim, objective, dual-target loss")


def test_criterion_9_cli_contract(tmp_path, capsys):
    scene = hdr_scene(64, 64, 42)
    scene_path = tmp_path / "scene.lfr"
    write_lfr(scene, scene_path)

    def run(*argv):
        return cli_main([str(a) for a in argv])

    # all 7 subcommands on valid fixtures
    pool = tmp_path / "pool.txt"
    assert run("synth", "--gt", scene_path, "--pool", pool, "--gen-pool", 3,
               "--sigma-read", 0.01, "--out", tmp_path / "burst") == 0
    ev0 = tmp_path / "ev0.lfr"
    evm = tmp_path / "evm.lfr"
    write_lfr(scene.with_data(np.clip(scene.data, 0, 1)), ev0)
    write_lfr(scene.with_data((scene.data / 8).astype(np.float32)), evm)
    assert run("fuse", "--ev0", ev0, "--evm", evm, "--out", tmp_path / "hdr.lfr") == 0
    assert run("reference", "--in", scene_path, "--out", tmp_path / "y0.png",
               "--out-enhanced", tmp_path / "y1.png") == 0
    assert run("tonemap", "--in", scene_path, "--out", tmp_path / "t.png",
               "--tiles", "2x2", "--overlap", 16) == 0
    assert run("eval", "--a", tmp_path / "t.png", "--b", tmp_path / "t.png",
               "--metrics", "psnr,ssim,apl") == 0
    assert run("oracle-maps", "--in", scene_path, "--out", tmp_path / "m.tmaps") == 0
    assert run("serve", "--presets", tmp_path / "p", "--smoke-test") == 0

    # specified failures
    assert run("tonemap", "--in", tmp_path / "missing.lfr",
               "--out", tmp_path / "x.png") == 1
    assert run("definitely-not-a-command") == 2
    assert run("tonemap", "--in", scene_path, "--out", tmp_path / "x.png",
               "--bogus-flag") == 2

    # container round-trips, bit exact
    assert np.array_equal(read_lfr(scene_path).data, scene.data)
    maps = read_tmaps(tmp_path / "m.tmaps")
    write_tmaps(maps, tmp_path / "m2.tmaps")
    maps2 = read_tmaps(tmp_path / "m2.tmaps")
    for name in ("w_y", "w_c0", "w_c1", "g"):
        assert np.array_equal(getattr(maps, name), getattr(maps2, name))
    pool_a = read_pool(pool)
    write_pool(pool_a, tmp_path / "pool2.txt")
    pool_b = read_pool(tmp_path / "pool2.txt")
    for ga, gb in zip(pool_a.groups, pool_b.groups):
        for ha, hb in zip(ga, gb):
            assert np.array_equal(ha.m, hb.m)
    store = PresetStore(tmp_path / "presets")
    prof = TuningProfile(lut_weight=Lut1D(((0, 0), (0.37, 0.61), (1, 1))), strength=0.42)
    store.save(Preset("night", prof))
    assert store.load("night").profile == prof
    report(9, "CLI contract: 7 subcommands, exit codes, bit-exact containers")
