"""Command-line interface: every pipeline stage as a subcommand.

Exit codes: 0 success, 2 usage errors (argparse), 1 processing errors.
All randomness is seedable via --seed.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import burst as burst_mod
from .buffers import ColorSpace, ImageBuffer
from .color import luma
from .config import load_pipeline_config, load_profile
from .enhance import (
    CaptureMetadata,
    default_profile,
    encode_metadata,
    read_tmaps,
    write_tmaps,
)
from .fusion import ExposureFrame, fuse_hdr
from .homography import Homography, estimate_homography
from .io import read_image, read_lfr, write_lfr, write_png8
from .metrics import apl, make_default_extractor, psnr, read_extractor, ssim
from .pipeline import (
    PipelineConfig,
    compute_heuristic_maps,
    compute_oracle_maps,
    render_tonemap,
)
from .tiling import auto_grid, mean_gradient, plan_tiles, seam_energy
from .tonemap_lite import compute_global_context


class CliError(RuntimeError):
    pass


def _positive_int(value):
    v = int(value)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{value} is not a positive integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="drift",
        description="HDR burst synthesis, exposure fusion, and tunable tone-mapping",
    )
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sp = sub.add_parser("synth", help="synthesize a noisy handheld burst from a clean frame")
    sp.add_argument("--gt", required=True, help="clean linear RGB input (.lfr)")
    sp.add_argument("--pool", required=True, help="handshake pool file")
    sp.add_argument("--frames", type=_positive_int, default=11)
    sp.add_argument("--sigma-read", type=float, default=0.0)
    sp.add_argument("--k-shot", type=float, default=0.0)
    sp.add_argument("--sr4", action="store_true", help="4x downscale (super-resolution task)")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--gen-pool", type=int, metavar="N_GROUPS",
                    help="generate a synthetic pool at --pool first")

    fp = sub.add_parser("fuse", help="fuse EV0 + EV- into a single HDR linear image")
    fp.add_argument("--ev0", required=True)
    fp.add_argument("--evm", required=True)
    fp.add_argument("--ratio", type=float, default=0.125, help="EV- exposure ratio")
    fp.add_argument("--tau", type=float, default=0.1, help="deghosting threshold")
    fp.add_argument("--align", default="identity",
                    help="'auto', 'identity', or a 3x3 matrix text file")
    fp.add_argument("--seed", type=int, default=0)
    fp.add_argument("--out", required=True)

    rp = sub.add_parser("reference", help="run the full-quality reference tone-map")
    rp.add_argument("--in", dest="input", required=True)
    rp.add_argument("--config", help="pipeline config TOML")
    rp.add_argument("--out", required=True, help="unenhanced target output")
    rp.add_argument("--out-enhanced", help="contrast-enhanced target output")

    tp = sub.add_parser("tonemap", help="fast tunable tone-map of an HDR image")
    tp.add_argument("--in", dest="input", required=True)
    tp.add_argument("--profile", help="tuning profile TOML")
    tp.add_argument("--maps", default="heuristic",
                    help="'heuristic', 'oracle', or a .tmaps file")
    tp.add_argument("--tiles", default="none", help="'RxC', 'auto', or 'none'")
    tp.add_argument("--overlap", type=int, default=50)
    tp.add_argument("--workers", type=_positive_int, default=1)
    tp.add_argument("--config", help="pipeline config TOML")
    tp.add_argument("--check-seams", action="store_true")
    tp.add_argument("--sensor", default="main")
    tp.add_argument("--pipeline", default="denoise")
    tp.add_argument("--iso", type=float, default=50.0)
    tp.add_argument("--exposure-time", type=float, default=1 / 64)
    tp.add_argument("--out", required=True)

    ep = sub.add_parser("eval", help="compare two images with quality metrics")
    ep.add_argument("--a", required=True)
    ep.add_argument("--b", required=True)
    ep.add_argument("--metrics", default="psnr,ssim")
    ep.add_argument("--extractor", help="FXW1 weights file for the perceptual metric")

    vp = sub.add_parser("serve", help="run the HTTP tuning service")
    vp.add_argument("--host", default="127.0.0.1")
    vp.add_argument("--port", type=int, default=8000)
    vp.add_argument("--presets", help="preset store directory")
    vp.add_argument("--frontend", help="static frontend directory")
    vp.add_argument("--smoke-test", action="store_true",
                    help="build the app, verify routes, exit without serving")

    op = sub.add_parser("oracle-maps", help="solve enhancement maps against the reference")
    op.add_argument("--in", dest="input", required=True)
    op.add_argument("--config", help="pipeline config TOML")
    op.add_argument("--out", required=True, help=".tmaps output")
    return p


def _read_linear(path) -> ImageBuffer:
    img = read_image(path)
    if img.channels != 3:
        raise CliError(f"{path}: expected a 3-channel linear image")
    return img


def _write_display(img: ImageBuffer, path):
    path = Path(path)
    if path.suffix.lower() == ".lfr":
        write_lfr(img, path)
    else:
        write_png8(img, path)


def cmd_synth(args) -> int:
    pool_path = Path(args.pool)
    if args.gen_pool:
        gt_probe = read_lfr(args.gt)
        pool = burst_mod.generate_handshake_pool(
            args.gen_pool, gt_probe.width, gt_probe.height, seed=args.seed)
        burst_mod.write_pool(pool, pool_path)
    if not pool_path.exists():
        raise FileNotFoundError(f"no such pool file: {pool_path}")
    pool = burst_mod.read_pool(pool_path)
    gt = read_lfr(args.gt)
    spec = burst_mod.BurstSpec(
        n_frames=args.frames,
        noise_read=args.sigma_read,
        noise_shot=args.k_shot,
        downscale_factor=4 if args.sr4 else 1,
    )
    group = burst_mod.sample_handshake_group(pool, args.seed)
    if len(group) != spec.n_frames - 1:
        group = group[: spec.n_frames - 1]
    frames = burst_mod.synthesize_burst(gt, group, spec, args.seed)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    for i, frame in enumerate(frames):
        write_lfr(frame, out_dir / f"frame_{i:02d}.lfr")
    print(f"wrote {len(frames)} Bayer frames to {out_dir}")
    return 0


def _resolve_alignment(args, ev0: ImageBuffer, evm_eq: ImageBuffer):
    mode = args.align
    if mode == "identity":
        return None
    if mode == "auto":
        ref_y = luma(ev0.data)
        aux_y = luma(evm_eq.data)
        corners = burst_mod.detect_corners(ref_y)
        if corners.shape[0] < 8:
            raise CliError(
                "auto alignment: not enough corners detected "
                "(scene too flat; try --align identity or a matrix file)"
            )
        src, dst = burst_mod.match_patches(ref_y, aux_y, corners)
        return estimate_homography(src, dst, iters=500, inlier_px=1.5, seed=args.seed)
    matrix_path = Path(mode)
    if not matrix_path.exists():
        raise FileNotFoundError(f"no such alignment matrix file: {matrix_path}")
    vals = [float(v) for v in matrix_path.read_text().split()]
    if len(vals) != 9:
        raise CliError(f"{matrix_path}: expected 9 values, got {len(vals)}")
    return Homography(np.array(vals).reshape(3, 3))


def cmd_fuse(args) -> int:
    ev0 = _read_linear(args.ev0)
    evm = _read_linear(args.evm)
    if args.ratio <= 0:
        raise CliError(f"--ratio must be positive, got {args.ratio}")
    evm_eq = evm.with_data((evm.astype64() / args.ratio).astype(np.float32))
    align = _resolve_alignment(args, ev0, evm_eq)
    fused = fuse_hdr(
        ExposureFrame(ev0, 1.0), ExposureFrame(evm, args.ratio),
        align=align, tau=args.tau,
    )
    write_lfr(fused, args.out)
    print(f"wrote HDR fusion to {args.out}")
    return 0


def cmd_reference(args) -> int:
    cfg = load_pipeline_config(args.config)
    hdr = _read_linear(args.input)
    ctx = compute_global_context(hdr)
    from .reference import render_targets

    y0, y1 = render_targets(hdr, ctx, cfg.reference)
    _write_display(y0, args.out)
    if args.out_enhanced:
        _write_display(y1, args.out_enhanced)
    print(f"wrote reference targets to {args.out}"
          + (f" and {args.out_enhanced}" if args.out_enhanced else ""))
    return 0


def _parse_tiles(spec_str: str, width: int, height: int, overlap: int):
    if spec_str == "none":
        return None
    if spec_str == "auto":
        rows, cols = auto_grid(width, height, overlap_px=overlap)
    else:
        try:
            rows_s, cols_s = spec_str.lower().split("x")
            rows, cols = int(rows_s), int(cols_s)
        except ValueError as exc:
            raise CliError(f"bad --tiles value {spec_str!r} (want 'RxC', 'auto' or 'none')") from exc
    if rows == cols == 1:
        return None
    return plan_tiles(width, height, rows, cols, overlap)


def cmd_tonemap(args) -> int:
    cfg = load_pipeline_config(args.config)
    hdr = _read_linear(args.input)
    profile = load_profile(args.profile) if args.profile else default_profile()
    ctx = compute_global_context(hdr)
    meta = CaptureMetadata(args.sensor, args.pipeline, args.iso, args.exposure_time)
    meta_vec = encode_metadata(meta, cfg.registry)
    if args.maps == "heuristic":
        maps = compute_heuristic_maps(hdr, ctx, meta_vec, cfg)
    elif args.maps == "oracle":
        maps = compute_oracle_maps(hdr, ctx, cfg)
    else:
        maps_path = Path(args.maps)
        if not maps_path.exists():
            raise FileNotFoundError(f"no such maps file: {maps_path}")
        maps = read_tmaps(maps_path)
    plan = _parse_tiles(args.tiles, hdr.width, hdr.height, args.overlap)
    out = render_tonemap(hdr, ctx=ctx, maps=maps, profile=profile, cfg=cfg,
                         meta_vec=meta_vec, plan=plan, workers=args.workers)
    _write_display(out, args.out)
    print(f"wrote tone-mapped image to {args.out}")
    if args.check_seams:
        if plan is None:
            print("seam check skipped: single-tile render")
        else:
            energy = seam_energy(out, plan)
            rel = energy / max(mean_gradient(out), 1e-12)
            print(f"seam energy: {energy:.3e} ({rel:.3e} of mean gradient)")
    return 0


def cmd_eval(args) -> int:
    a = read_image(args.a)
    b = read_image(args.b)
    wanted = [m.strip() for m in args.metrics.split(",") if m.strip()]
    known = {"psnr", "ssim", "apl"}
    unknown = set(wanted) - known
    if unknown:
        raise CliError(f"unknown metrics: {', '.join(sorted(unknown))}")
    for metric in wanted:
        if metric == "psnr":
            print(f"psnr: {psnr(a, b):.4f}")
        elif metric == "ssim":
            print(f"ssim: {ssim(a, b):.6f}")
        elif metric == "apl":
            fx = read_extractor(args.extractor) if args.extractor else make_default_extractor()
            print(f"apl: {apl(fx, a, b):.6f}")
    return 0


def cmd_serve(args) -> int:
    from .service import create_app

    app = create_app(preset_dir=args.presets, frontend_dir=args.frontend)
    if args.smoke_test:
        routes = sorted({getattr(r, "path", "") for r in app.routes})
        print(f"service ok: {len(routes)} routes")
        return 0
    import uvicorn

    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def cmd_oracle_maps(args) -> int:
    cfg = load_pipeline_config(args.config)
    hdr = _read_linear(args.input)
    ctx = compute_global_context(hdr)
    maps = compute_oracle_maps(hdr, ctx, cfg)
    write_tmaps(maps, args.out)
    print(f"wrote oracle maps to {args.out}")
    return 0


HANDLERS = {
    "synth": cmd_synth,
    "fuse": cmd_fuse,
    "reference": cmd_reference,
    "tonemap": cmd_tonemap,
    "eval": cmd_eval,
    "serve": cmd_serve,
    "oracle-maps": cmd_oracle_maps,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return HANDLERS[args.command](args)
    except (CliError, FileNotFoundError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def entrypoint():
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
