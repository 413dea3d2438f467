"""Full-quality reference tone-map: synthetic exposure fusion + adjustments.

This is the slow, full-resolution pipeline the fast path is matched
against. It synthesizes a geometric exposure ladder whose endpoints are
exactly the lightweight tone-map's dark/bright gains, Mertens-fuses the
ladder, then applies chroma saturation and (optionally) a per-band
Laplacian contrast boost on luma. Run twice — boost off and on — it
yields the dual targets used to solve enhancement maps.

Brightness anchoring is deliberately hull-safe: it acts through the
percentile-anchored gains and the exposedness center of the fusion
weights, never as a post-fusion luma remap, so the fused luma always
stays inside [S0, S1] of the lightweight pair.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_banded
from scipy.ndimage import correlate1d

from .buffers import ColorSpace, ImageBuffer, InvalidImageError
from .color import rgb_to_ycbcr_array, ycbcr_to_rgb_array
from .fusion import mertens_fuse
from .pyramid import KERNEL, max_levels, pyr_down, pyr_up
from .tonemap_lite import GlobalContext, LiteParams, derive_gains, render_exposure


@dataclass(frozen=True)
class ReferenceConfig:
    """Block configuration for the reference pipeline."""

    n_exposures: int = 5
    exposure_gains: tuple | None = None
    contrast_enabled: bool = True
    contrast_boost: tuple = (1.5, 1.25, 1.1)
    brightness_target: float = 0.55
    saturation_gain: float = 1.0
    fusion_exponents: tuple = (1.0, 1.0, 1.0)
    fusion_levels: int | None = None
    lite: LiteParams = field(default_factory=LiteParams)

    def __post_init__(self):
        if self.exposure_gains is not None:
            gains = tuple(float(g) for g in self.exposure_gains)
            if len(gains) != self.n_exposures:
                raise ValueError("n_exposures must match len(exposure_gains)")
            if len(gains) < 2:
                raise ValueError("need at least 2 exposures")
            if any(g <= 0 for g in gains):
                raise ValueError("exposure gains must be positive")
            if any(b <= a for a, b in zip(gains, gains[1:])):
                raise ValueError("exposure gains must be strictly increasing")
            object.__setattr__(self, "exposure_gains", gains)
        elif self.n_exposures < 2:
            raise ValueError("need at least 2 exposures")
        boost = tuple(float(b) for b in self.contrast_boost)
        if any(b < 0 for b in boost):
            raise ValueError("contrast boost gains must be >= 0")
        object.__setattr__(self, "contrast_boost", boost)
        if not (0.0 < self.brightness_target < 1.0):
            raise ValueError("brightness target must be in (0, 1)")
        if self.saturation_gain < 0:
            raise ValueError("saturation gain must be >= 0")


def ladder_gains(ctx: GlobalContext, cfg: ReferenceConfig) -> np.ndarray:
    """Exposure gains: explicit, or geometric between the lite anchors."""
    if cfg.exposure_gains is not None:
        return np.array(cfg.exposure_gains, dtype=np.float64)
    g_dark, g_bright = derive_gains(ctx, cfg.lite)
    if g_bright <= g_dark:
        g_bright = g_dark * 1.0000001
    return np.geomspace(g_dark, g_bright, cfg.n_exposures)


def _bilin_up_1d(c: np.ndarray, n_fine: int, axis: int) -> np.ndarray:
    """Bilinear 2x upsample along one axis: even rows copy, odd rows average."""
    shape = list(c.shape)
    m = shape[axis]
    shape[axis] = n_fine
    out = np.zeros(shape, dtype=np.float64)
    src = np.moveaxis(c, axis, 0)
    dst = np.moveaxis(out, axis, 0)
    dst[0::2] = src[: (n_fine + 1) // 2]
    idx = np.arange(n_fine // 2)
    nxt = np.minimum(idx + 1, m - 1)
    dst[1::2] = 0.5 * (src[idx] + src[nxt])
    return out


def _bilin_up(c: np.ndarray, shape: tuple) -> np.ndarray:
    out = _bilin_up_1d(c, shape[0], axis=0)
    return _bilin_up_1d(out, shape[1], axis=1)


def _down_of_up_banded(m: int, n_fine: int) -> np.ndarray:
    """Tridiagonal (banded) matrix of blur-decimate o bilinear-up along one
    axis, probed with stride-3 combs (interior stencil [3, 10, 3]/16)."""
    ab = np.zeros((3, m))
    for phase in range(3):
        e = np.zeros(m)
        e[phase::3] = 1.0
        fine = _bilin_up_1d(e, n_fine, axis=0)
        w = correlate1d(fine, KERNEL, axis=0, mode="nearest")[::2]
        for k in range(phase, m, 3):
            if k > 0:
                ab[0, k] = w[k - 1]      # superdiagonal entry T[k-1, k]
            ab[1, k] = w[k]              # diagonal T[k, k]
            if k + 1 < m:
                ab[2, k] = w[k + 1]      # subdiagonal T[k+1, k]
    return ab


def _restore_lowpass(out: np.ndarray, g1: np.ndarray) -> np.ndarray:
    """Add a smooth correction so pyr_down(out) equals g1 exactly.

    The correction is a bilinearly-upsampled coarse field c solving
    (blur-decimate o bilinear-up) c = g1 - pyr_down(out); the operator is
    separable and tridiagonal per axis, so the solve is exact and O(N).
    """
    r = g1 - pyr_down(out)
    mh, mw = r.shape
    if mh < 2 or mw < 2:
        return out
    ab_h = _down_of_up_banded(mh, out.shape[0])
    ab_w = _down_of_up_banded(mw, out.shape[1])
    c = solve_banded((1, 1), ab_h, r)
    c = solve_banded((1, 1), ab_w, c.T).T
    return out + _bilin_up(c, out.shape)


def boost_luma_bands(y: np.ndarray, boost: tuple) -> np.ndarray:
    """Scale Laplacian detail bands of a luma plane, finest band first.

    Detail bands leak into the low-pass on re-analysis (binomial pyramids
    are not band-orthogonal), which would let a contrast boost shift
    global tone. An exact smooth correction pins the boosted image's
    level-1 Gaussian (hence every deeper level) to the original's, so the
    boost is contrast-only by construction.
    """
    if not boost:
        return y
    h, w = y.shape
    n_levels = min(len(boost) + 1, max(1, max_levels(w, h)))
    if n_levels < 2:
        return y
    gauss = [y.astype(np.float64)]
    for _ in range(n_levels - 1):
        gauss.append(pyr_down(gauss[-1]))
    out = gauss[-1]
    for i in reversed(range(n_levels - 1)):
        band = gauss[i] - pyr_up(gauss[i + 1], gauss[i].shape)
        gain = boost[i] if i < len(boost) else 1.0
        out = pyr_up(out, gauss[i].shape) + gain * band
    return _restore_lowpass(out, gauss[1])


def _fused_ycc(hdr: ImageBuffer, ctx: GlobalContext, cfg: ReferenceConfig) -> np.ndarray:
    """Shared half of the pipeline: ladder synthesis + fusion + saturation."""
    if hdr.channels != 3:
        raise InvalidImageError("reference tone-map expects a 3-channel image")
    gains = ladder_gains(ctx, cfg)
    frames = []
    for g in gains:
        y, c = render_exposure(hdr.data, float(g), cfg.lite.curve_gamma)
        ycc = np.concatenate([y[:, :, None], c], axis=2)
        frames.append(ImageBuffer(ycbcr_to_rgb_array(ycc).astype(np.float32)))
    fused = mertens_fuse(
        frames,
        exponents=cfg.fusion_exponents,
        n_levels=cfg.fusion_levels,
        exposedness_center=cfg.brightness_target,
    )
    ycc = rgb_to_ycbcr_array(fused.astype64())
    ycc[:, :, 1:] *= cfg.saturation_gain
    return ycc


def _assemble(ycc: np.ndarray, boost: tuple | None) -> ImageBuffer:
    out = ycc.copy()
    if boost:
        out[:, :, 0] = boost_luma_bands(out[:, :, 0], boost)
    rgb = np.clip(ycbcr_to_rgb_array(out), 0.0, 1.0)
    return ImageBuffer(rgb.astype(np.float32), ColorSpace.SRGB)


def reference_tonemap(hdr: ImageBuffer, ctx: GlobalContext,
                      cfg: ReferenceConfig | None = None) -> ImageBuffer:
    """Display-referred SDR render of a linear HDR image."""
    cfg = cfg or ReferenceConfig()
    ycc = _fused_ycc(hdr, ctx, cfg)
    return _assemble(ycc, cfg.contrast_boost if cfg.contrast_enabled else None)


def render_targets(hdr: ImageBuffer, ctx: GlobalContext,
                   cfg: ReferenceConfig | None = None) -> tuple:
    """(y0, y1): reference output with contrast enhancement off and on.

    Every other block is byte-identical between the two renders; the
    shared fusion runs once.
    """
    cfg = cfg or ReferenceConfig()
    ycc = _fused_ycc(hdr, ctx, cfg)
    y0 = _assemble(ycc, None)
    y1 = _assemble(ycc, cfg.contrast_boost)
    return y0, y1
