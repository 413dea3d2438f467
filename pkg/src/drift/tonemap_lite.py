"""Lightweight two-exposure tone-map and the per-image global context.

The global context is a once-per-image statistics bundle (log-luma
histogram, percentiles) computed on a thumbnail; it stands in for global
scene understanding and keeps per-tile rendering consistent. The
tone-map itself is pointwise: two gain+curve exposures anchored by the
context percentiles so that auto-exposure changes do not shift the look.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .buffers import ColorSpace, ImageBuffer, InvalidImageError
from .color import luma, rgb_to_ycbcr_array
from .resample import resize_to_long_edge

LUMA_FLOOR = 1e-6
HIST_BINS = 256
HIST_LOG2_MIN = -20.0
HIST_LOG2_MAX = 12.0
THUMB_LONG_EDGE = 256


@dataclass(frozen=True)
class GlobalContext:
    """Once-per-image luma statistics driving all tone decisions."""

    log_luma_histogram: np.ndarray
    percentiles: dict
    mean_log_luma: float
    source_size: tuple
    thumb_size: tuple

    def __post_init__(self):
        hist = np.asarray(self.log_luma_histogram, dtype=np.float64)
        if hist.shape != (HIST_BINS,):
            raise ValueError(f"histogram must have {HIST_BINS} bins")
        if abs(hist.sum() - 1.0) > 1e-9:
            raise ValueError("histogram mass must sum to 1")
        keys = ("p1", "p10", "p50", "p90", "p99")
        vals = [self.percentiles[k] for k in keys]
        if any(b < a for a, b in zip(vals, vals[1:])):
            raise ValueError("percentiles must be non-decreasing")
        hist = np.ascontiguousarray(hist)
        hist.setflags(write=False)
        object.__setattr__(self, "log_luma_histogram", hist)


@dataclass(frozen=True)
class LiteParams:
    """Targets and bounds for the two synthesized exposures.

    dark_anchor maps the p90 luma through the curve to `dark_target`;
    bright_anchor maps p50 to `bright_target`. Since p50 <= p90 and
    dark_target < bright_target, the dark gain never exceeds the bright
    gain and the exposure ordering holds by construction.
    """

    dark_target: float = 0.40
    bright_target: float = 0.70
    curve_gamma: float = 2.2
    gain_min: float = 1.0 / 64.0
    gain_max: float = 64.0

    def __post_init__(self):
        if not (0.0 < self.dark_target < self.bright_target < 1.0):
            raise ValueError("targets must satisfy 0 < dark < bright < 1")
        if self.curve_gamma <= 0:
            raise ValueError("curve gamma must be positive")
        if not (0 < self.gain_min < self.gain_max):
            raise ValueError("gain bounds must satisfy 0 < min < max")


@dataclass(frozen=True)
class ExposurePair:
    """Tone-map Lite outputs: dark/bright luma planes plus chroma pairs."""

    s0_y: np.ndarray
    s1_y: np.ndarray
    s0_c: np.ndarray
    s1_c: np.ndarray
    provenance: str = "lite"

    def __post_init__(self):
        for name in ("s0_y", "s1_y"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float32)
            if arr.ndim != 2:
                raise ValueError(f"{name} must be a 2D luma plane")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        for name in ("s0_c", "s1_c"):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float32)
            if arr.ndim != 3 or arr.shape[2] != 2:
                raise ValueError(f"{name} must be (H, W, 2) chroma")
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        if self.s0_y.shape != self.s1_y.shape or self.s0_y.shape != self.s0_c.shape[:2]:
            raise ValueError("exposure planes disagree in shape")
        if np.any(self.s0_y > self.s1_y + 1e-6):
            raise ValueError("dark exposure must not exceed bright exposure")

    @property
    def shape(self) -> tuple:
        return self.s0_y.shape


def compute_global_context(hdr: ImageBuffer) -> GlobalContext:
    """Thumbnail luma statistics: histogram over log2 domain + percentiles."""
    if hdr.channels != 3:
        raise InvalidImageError("global context expects a 3-channel image")
    thumb = resize_to_long_edge(hdr, THUMB_LONG_EDGE)
    y = np.maximum(luma(thumb.data), LUMA_FLOOR)
    log_y = np.log2(y)
    hist, _ = np.histogram(
        np.clip(log_y, HIST_LOG2_MIN, HIST_LOG2_MAX),
        bins=HIST_BINS,
        range=(HIST_LOG2_MIN, HIST_LOG2_MAX),
    )
    hist = hist.astype(np.float64)
    hist /= hist.sum()
    qs = {"p1": 1, "p10": 10, "p50": 50, "p90": 90, "p99": 99}
    # nearest-rank (lower) so percentile values are actual samples
    pct = {k: float(np.percentile(y, q, method="lower")) for k, q in qs.items()}
    return GlobalContext(
        log_luma_histogram=hist,
        percentiles=pct,
        mean_log_luma=float(log_y.mean()),
        source_size=(hdr.width, hdr.height),
        thumb_size=(thumb.width, thumb.height),
    )


def tone_curve(x: np.ndarray, gamma: float = 2.2) -> np.ndarray:
    """Display compression x/(1+x) followed by gamma encoding."""
    x = np.maximum(x, 0.0)
    return np.power(x / (1.0 + x), 1.0 / gamma)


def invert_tone_curve(y: np.ndarray, gamma: float = 2.2) -> np.ndarray:
    t = np.power(np.clip(y, 0.0, 1.0 - 1e-9), gamma)
    return t / (1.0 - t)


def _gain_for(anchor_luma: float, target: float, params: LiteParams) -> float:
    """Gain g with tone_curve(g * anchor) == target (before bounds)."""
    u = target ** params.curve_gamma
    g = u / ((1.0 - u) * max(anchor_luma, LUMA_FLOOR))
    return float(np.clip(g, params.gain_min, params.gain_max))


def derive_gains(ctx: GlobalContext, params: LiteParams | None = None) -> tuple:
    """(dark, bright) exposure gains anchored on the context percentiles."""
    params = params or LiteParams()
    g_dark = _gain_for(ctx.percentiles["p90"], params.dark_target, params)
    g_bright = _gain_for(ctx.percentiles["p50"], params.bright_target, params)
    if g_dark > g_bright:  # only possible when both bounds clamp
        g_dark = g_bright
    return g_dark, g_bright


def render_exposure(hdr_rgb: np.ndarray, gain: float, gamma: float = 2.2) -> tuple:
    """One synthesized exposure: (luma plane, chroma pair) in [0,1] luma.

    Luma is tone_curve(gain * L) exactly; RGB is scaled by the luma ratio
    so chroma carries the exposure's own saturation and hue is preserved.
    Saturated colors whose scaled channels exceed 1 are desaturated toward
    the luma axis (luma-preserving gamut compression), so the rendered RGB
    always lies in [0, 1].
    """
    lin = hdr_rgb.astype(np.float64)
    y = np.maximum(luma(lin), 0.0)
    ty = tone_curve(gain * y, gamma)
    scale = ty / np.maximum(y, LUMA_FLOOR)
    rgb = lin * scale[:, :, None]
    peak = rgb.max(axis=2)
    over = peak > 1.0
    if np.any(over):
        k = np.ones_like(peak)
        k[over] = (1.0 - ty[over]) / np.maximum(peak[over] - ty[over], LUMA_FLOOR)
        rgb = ty[:, :, None] + (rgb - ty[:, :, None]) * k[:, :, None]
    ycc = rgb_to_ycbcr_array(rgb)
    return ty, ycc[:, :, 1:3]


def tonemap_lite(hdr: ImageBuffer, ctx: GlobalContext,
                 params: LiteParams | None = None) -> ExposurePair:
    """Two pointwise exposures approximating the reference's extremes."""
    if hdr.channels != 3:
        raise InvalidImageError("tone-map expects a 3-channel linear image")
    params = params or LiteParams()
    g_dark, g_bright = derive_gains(ctx, params)
    s0_y, s0_c = render_exposure(hdr.data, g_dark, params.curve_gamma)
    s1_y, s1_c = render_exposure(hdr.data, g_bright, params.curve_gamma)
    return ExposurePair(
        s0_y=s0_y.astype(np.float32),
        s1_y=s1_y.astype(np.float32),
        s0_c=s0_c.astype(np.float32),
        s1_c=s1_c.astype(np.float32),
        provenance="lite",
    )
