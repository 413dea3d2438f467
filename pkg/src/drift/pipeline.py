"""End-to-end tone rendering shared by the CLI and the HTTP service.

One render = global context (once per image) + lightweight exposure pair
+ enhancement maps + LUT/strength fusion. The tone path is pointwise
given a fixed context and full-frame-consistent maps, so tiled execution
reproduces the full-frame render exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .buffers import ImageBuffer
from .enhance import (
    HeuristicConfig,
    MetadataRegistry,
    ToneMaps,
    TuningProfile,
    default_profile,
    encode_metadata,
    fuse_tone,
    heuristic_maps,
    solve_oracle_maps,
)
from .reference import ReferenceConfig, render_targets
from .resample import resize_bilinear, resize_to_max_pixels
from .tiling import Tile, TilePlan, run_tiled
from .tonemap_lite import (
    GlobalContext,
    LiteParams,
    compute_global_context,
    tonemap_lite,
)

MAPS_COMPUTE_MAX_PIXELS = 1 << 20  # heuristic maps run at <= 1 MP


@dataclass(frozen=True)
class PipelineConfig:
    lite: LiteParams = field(default_factory=LiteParams)
    reference: ReferenceConfig = field(default_factory=ReferenceConfig)
    heuristic: HeuristicConfig = field(default_factory=HeuristicConfig)
    registry: MetadataRegistry = field(default_factory=MetadataRegistry)


def compute_heuristic_maps(hdr: ImageBuffer, ctx: GlobalContext,
                           meta_vec: np.ndarray, cfg: PipelineConfig) -> ToneMaps:
    """Full-frame heuristic maps, computed at reduced resolution and
    upsampled, so per-tile crops stay globally consistent."""
    small = resize_to_max_pixels(hdr, MAPS_COMPUTE_MAX_PIXELS)
    pair = tonemap_lite(small, ctx, cfg.lite)
    maps = heuristic_maps(pair, ctx, meta_vec, cfg.heuristic, cfg.registry)
    if small.shape[:2] == hdr.shape[:2]:
        return maps
    h, w = hdr.height, hdr.width

    def up(plane):
        buf = ImageBuffer(np.asarray(plane, dtype=np.float32))
        return resize_bilinear(buf, w, h).data

    return ToneMaps(up(maps.w_y), up(maps.w_c0), up(maps.w_c1), up(maps.g),
                    maps.g_bounds, maps.provider)


def compute_oracle_maps(hdr: ImageBuffer, ctx: GlobalContext,
                        cfg: PipelineConfig) -> ToneMaps:
    """Maps solved against the reference pipeline's dual targets."""
    pair = tonemap_lite(hdr, ctx, cfg.lite)
    y0, y1 = render_targets(hdr, ctx, cfg.reference)
    return solve_oracle_maps(pair, y0, y1)


class FullFrameMapsProvider:
    """Crops a full-frame ToneMaps per tile (exact tiling consistency)."""

    def __init__(self, maps: ToneMaps):
        self.maps = maps

    def __call__(self, tile: Tile) -> ToneMaps:
        o = tile.outer
        return self.maps.crop(o.y0, o.y1, o.x0, o.x1)


def tone_stage(tile_img: ImageBuffer, tile, ctx: GlobalContext, maps: ToneMaps,
               lite: LiteParams | None = None,
               profile: TuningProfile | None = None,
               enhanced: bool = True) -> ImageBuffer:
    """Pointwise tone path for one tile (or the full frame)."""
    pair = tonemap_lite(tile_img, ctx, lite)
    plain, enh = fuse_tone(pair, maps, profile or default_profile())
    return enh if enhanced else plain


def render_tonemap(hdr: ImageBuffer, ctx: GlobalContext | None = None,
                   maps: ToneMaps | None = None,
                   profile: TuningProfile | None = None,
                   cfg: PipelineConfig | None = None,
                   meta_vec: np.ndarray | None = None,
                   plan: TilePlan | None = None,
                   workers: int = 1,
                   enhanced: bool = True) -> ImageBuffer:
    """Render a linear HDR image to display SDR.

    Context and maps are computed on the full frame when not supplied;
    `plan` switches to tiled execution with feather blending.
    """
    cfg = cfg or PipelineConfig()
    profile = profile or default_profile()
    if ctx is None:
        ctx = compute_global_context(hdr)
    if maps is None:
        if meta_vec is None:
            meta_vec = np.zeros(cfg.registry.n_features)
        maps = compute_heuristic_maps(hdr, ctx, meta_vec, cfg)
    if maps.shape != hdr.shape[:2]:
        raise ValueError(
            f"maps {maps.shape} do not cover the frame {hdr.shape[:2]}"
        )
    if plan is None:
        return tone_stage(hdr, None, ctx, maps, cfg.lite, profile, enhanced)

    def stage(tile_img, tile, stage_ctx, tile_maps):
        return tone_stage(tile_img, tile, stage_ctx, tile_maps,
                          cfg.lite, profile, enhanced)

    return run_tiled(hdr, plan, stage, ctx, FullFrameMapsProvider(maps),
                     workers=workers)
